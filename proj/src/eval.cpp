// Copyright 2026 The mallineage Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mallineage/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "mallineage/errors.hpp"
#include "mallineage/parallel.hpp"
#include "mallineage/random.hpp"

namespace mallineage {

namespace {

constexpr std::uint64_t kConditionalStream = 0x636f6e64;

// reach[a][b] == true iff a is a proper ancestor of b.
std::vector<std::vector<bool>> ancestors(const LineageGraph& g, const std::unordered_map<std::string, std::size_t>& index)
{
    const auto n = index.size();
    std::vector<std::vector<std::size_t>> children(n);
    for (const auto& e : g.edges) {
        children[index.at(e.parent)].push_back(index.at(e.child));
    }
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    std::vector<std::size_t> stack;
    for (std::size_t a = 0; a < n; ++a) {
        stack.assign(children[a].begin(), children[a].end());
        while (!stack.empty()) {
            const auto b = stack.back();
            stack.pop_back();
            if (reach[a][b]) {
                continue;
            }
            reach[a][b] = true;
            stack.insert(stack.end(), children[b].begin(), children[b].end());
        }
    }
    return reach;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

double f1_score(double precision, double recall) noexcept
{
    if (precision + recall <= 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

nlohmann::json metrics_to_json(const Metrics& m)
{
    return {
        {"edge_precision", m.edge_precision},
        {"edge_recall", m.edge_recall},
        {"edge_f1", m.edge_f1},
        {"root_accuracy", m.root_accuracy},
        {"ancestor_accuracy", m.ancestor_accuracy},
        {"mean_abs_time_error", m.mean_abs_time_error ? nlohmann::json(*m.mean_abs_time_error) : nlohmann::json()},
    };
}

Metrics score_lineage(const LineageGraph& pred, const LineageGraph& truth)
{
    const std::set<std::string> pred_nodes(pred.nodes.begin(), pred.nodes.end());
    const std::set<std::string> truth_nodes(truth.nodes.begin(), truth.nodes.end());
    if (pred_nodes != truth_nodes || pred_nodes.size() != pred.nodes.size() ||
        truth_nodes.size() != truth.nodes.size()) {
        throw NodeSetMismatch("predicted and true lineages cover different nodes");
    }

    const std::set<Edge> pred_edges(pred.edges.begin(), pred.edges.end());
    const std::set<Edge> truth_edges(truth.edges.begin(), truth.edges.end());
    std::size_t shared = 0;
    for (const auto& e : pred_edges) {
        shared += truth_edges.contains(e) ? 1 : 0;
    }

    Metrics m;
    m.edge_precision = pred_edges.empty() ? 1.0 : static_cast<double>(shared) / static_cast<double>(pred_edges.size());
    m.edge_recall = truth_edges.empty() ? 1.0 : static_cast<double>(shared) / static_cast<double>(truth_edges.size());
    m.edge_f1 = f1_score(m.edge_precision, m.edge_recall);

    const std::set<std::string> pred_roots(pred.roots.begin(), pred.roots.end());
    std::size_t roots_hit = 0;
    for (const auto& r : truth.roots) {
        roots_hit += pred_roots.contains(r) ? 1 : 0;
    }
    m.root_accuracy = truth.roots.empty() ? 1.0 : static_cast<double>(roots_hit) / static_cast<double>(truth.roots.size());

    std::unordered_map<std::string, std::size_t> index;
    std::size_t next = 0;
    for (const auto& n : truth_nodes) {
        index.emplace(n, next++);
    }
    const auto a = ancestors(pred, index);
    const auto b = ancestors(truth, index);
    const auto n = index.size();
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && a[i][j] == b[i][j]) {
                ++agree;
            }
        }
    }
    const auto pairs = n * (n - 1);
    m.ancestor_accuracy = pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
    return m;
}

double time_error(const TimesMap& pred, const TimesMap& truth)
{
    if (pred.size() != truth.size()) {
        throw IdMismatch("predicted and true times cover different binaries");
    }
    double total = 0.0;
    for (const auto& [id, t] : truth) {
        const auto it = pred.find(id);
        if (it == pred.end()) {
            throw IdMismatch("no predicted time for \"" + id + "\"");
        }
        total += std::abs(static_cast<double>(it->second - t));
    }
    return truth.empty() ? 0.0 : total / static_cast<double>(truth.size());
}

double time_error(const Dataset& dataset, std::span<const TimePosterior> posteriors, const TimesMap& truth)
{
    if (posteriors.size() != dataset.size() || truth.size() != dataset.size()) {
        throw IdMismatch("posteriors, dataset and truth differ in size");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto it = truth.find(dataset[i].id);
        if (it == truth.end()) {
            throw IdMismatch("no true time for \"" + dataset[i].id + "\"");
        }
        total += std::abs(posteriors[i].mean() - static_cast<double>(it->second));
    }
    return total / static_cast<double>(dataset.size());
}

LineageGraph greedy_baseline(const Dataset& dataset, const SimilarityMatrix& sim,
                             std::span<const TimePosterior> posteriors)
{
    const auto n = dataset.size();
    std::vector<double> mean(n);
    for (std::size_t i = 0; i < n; ++i) {
        mean[i] = posteriors[i].mean();
    }
    ParentSets parents(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < n; ++j) {
            if (mean[j] < mean[c] && (!best || sim(c, j) > sim(c, *best))) {
                best = j;
            }
        }
        if (best) {
            parents[c].push_back(*best);
        }
    }
    return LineageGraph::from_parents(dataset.ids(), parents);
}

SweepReport obfuscation_sweep(const GenConfig& base, std::span<const double> levels,
                              const TimeModelParams& time_params, const LineageModelParams& lineage_params,
                              const InferConfig& infer_config, std::size_t reps, const SweepOptions& options)
{
    if (reps < 1) {
        throw ConfigError("sweep needs at least one rep");
    }
    for (double l : levels) {
        if (!(l >= 0.0 && l <= 1.0)) {
            throw ConfigError("obfuscation levels must lie in [0, 1]");
        }
    }
    auto params = time_params;
    params.window = base.window;
    params.validate();

    SweepReport report;
    report.rows.resize(levels.size() * reps);
    parallel_for(report.rows.size(), options.threads, [&](std::size_t cell) {
        const auto li = cell / reps;
        const auto rep = cell % reps;
        const auto start = std::chrono::steady_clock::now();

        auto gen = base;
        gen.obf_fraction = levels[li];
        gen.seed = derive_seed(base.seed, li, rep);
        const auto family = generate_family(gen);

        auto cfg = infer_config;
        cfg.seed = derive_seed(infer_config.seed, li, rep);
        cfg.threads = 1;
        const auto sim = similarity_matrix(family.dataset);
        const auto posteriors = time_posteriors(family.dataset, params, cfg);
        const auto result = infer_lineage(family.dataset, sim, posteriors, params, lineage_params, cfg);

        auto& row = report.rows[cell];
        row.level = levels[li];
        row.rep = rep;
        row.pre_time_err = time_error(family.dataset, posteriors, family.times);
        row.map_time_err = time_error(result.times, family.times);
        ParentSets parents(family.dataset.size());
        for (const auto& e : result.lineage.edges) {
            parents[family.dataset.require_index(e.child)].push_back(family.dataset.require_index(e.parent));
        }
        for (auto& p : parents) {
            std::sort(p.begin(), p.end());
        }
        const auto map_times = times_vector(family.dataset, result.times);
        const auto means = conditional_time_means(parents, map_times, family.dataset, sim, params, lineage_params,
                                                  options.conditional_sweeps, derive_seed(cfg.seed, kConditionalStream));
        double post = 0.0;
        for (std::size_t i = 0; i < family.dataset.size(); ++i) {
            post += std::abs(means[i] - static_cast<double>(family.times.at(family.dataset[i].id)));
        }
        row.post_time_err = post / static_cast<double>(family.dataset.size());
        row.delta = row.pre_time_err - row.post_time_err;
        const auto m = score_lineage(result.lineage, family.truth);
        row.precision = m.edge_precision;
        row.recall = m.edge_recall;
        row.f1 = m.edge_f1;
        row.root_acc = m.root_accuracy;
        row.ancestor_acc = m.ancestor_accuracy;
        row.joint_log_score = result.joint_log_score;
        row.baseline_f1 = score_lineage(greedy_baseline(family.dataset, sim, posteriors), family.truth).edge_f1;
        if (options.record_timing) {
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    });
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.level != b.level ? a.level < b.level : a.rep < b.rep;
    });
    return report;
}

std::string sweep_csv(const SweepReport& report)
{
    std::string out =
        "level,rep,pre_time_err,post_time_err,delta,precision,recall,f1,root_acc,ancestor_acc,joint_log_score,seconds\n";
    for (const auto& r : report.rows) {
        out += fmt(r.level) + "," + std::to_string(r.rep) + "," + fmt(r.pre_time_err) + "," + fmt(r.post_time_err) +
               "," + fmt(r.delta) + "," + fmt(r.precision) + "," + fmt(r.recall) + "," + fmt(r.f1) + "," +
               fmt(r.root_acc) + "," + fmt(r.ancestor_acc) + "," + fmt(r.joint_log_score) + "," + fmt(r.seconds) +
               "\n";
    }
    return out;
}

nlohmann::json sweep_summary(const SweepReport& report)
{
    struct Column {
        const char* name;
        double SweepRow::*field;
    };
    static constexpr Column columns[] = {
        {"pre_time_err", &SweepRow::pre_time_err},
        {"post_time_err", &SweepRow::post_time_err},
        {"delta", &SweepRow::delta},
        {"precision", &SweepRow::precision},
        {"recall", &SweepRow::recall},
        {"f1", &SweepRow::f1},
        {"root_acc", &SweepRow::root_acc},
        {"ancestor_acc", &SweepRow::ancestor_acc},
        {"joint_log_score", &SweepRow::joint_log_score},
        {"seconds", &SweepRow::seconds},
        {"greedy_baseline_f1", &SweepRow::baseline_f1},
        {"map_time_err", &SweepRow::map_time_err},
    };

    std::map<double, std::vector<const SweepRow*>> by_level;
    for (const auto& r : report.rows) {
        by_level[r.level].push_back(&r);
    }

    auto levels = nlohmann::json::array();
    std::size_t improved = 0;
    for (const auto& [level, rows] : by_level) {
        nlohmann::json entry = {{"level", level}, {"reps", rows.size()}};
        for (const auto& col : columns) {
            double mean = 0.0;
            for (const auto* r : rows) {
                mean += r->*col.field;
            }
            mean /= static_cast<double>(rows.size());
            double var = 0.0;
            for (const auto* r : rows) {
                var += (r->*col.field - mean) * (r->*col.field - mean);
            }
            const double sd = rows.size() > 1 ? std::sqrt(var / static_cast<double>(rows.size() - 1)) : 0.0;
            entry[col.name] = {{"mean", mean}, {"stddev", sd}};
        }
        if (entry["delta"]["mean"].get<double>() >= 0.0) {
            ++improved;
        }
        levels.push_back(std::move(entry));
    }
    return {
        {"levels", std::move(levels)},
        {"levels_with_nonnegative_delta", improved},
        {"level_count", by_level.size()},
    };
}

} // namespace mallineage
