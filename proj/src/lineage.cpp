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

#include "mallineage/lineage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mallineage/errors.hpp"
#include "mallineage/random.hpp"

namespace mallineage {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Lineage nodes mapped onto dataset indices.
ParentSets dataset_parents(const LineageGraph& lineage, const Dataset& dataset)
{
    if (lineage.nodes.size() != dataset.size()) {
        throw InvalidLineage("lineage has " + std::to_string(lineage.nodes.size()) + " nodes, dataset has " +
                             std::to_string(dataset.size()));
    }
    ParentSets parents(dataset.size());
    for (const auto& n : lineage.nodes) {
        if (!dataset.index_of(n)) {
            throw InvalidLineage("lineage node \"" + n + "\" is not in the dataset");
        }
    }
    for (const auto& e : lineage.edges) {
        parents[dataset.require_index(e.child)].push_back(dataset.require_index(e.parent));
    }
    for (auto& p : parents) {
        std::sort(p.begin(), p.end());
    }
    return parents;
}

void check_parent_set(std::size_t child, std::span<const std::size_t> parents, std::span<const TimeTick> times,
                      const LineageModelParams& params)
{
    if (parents.size() > params.k_max) {
        throw InvalidParentSet("node #" + std::to_string(child) + " has " + std::to_string(parents.size()) +
                               " parents, more than k_max=" + std::to_string(params.k_max));
    }
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const auto p = parents[i];
        if (p >= times.size() || !(times[p] < times[child])) {
            throw InvalidParentSet("node #" + std::to_string(p) + " is not a candidate parent of node #" +
                                   std::to_string(child));
        }
        if (i > 0 && parents[i - 1] >= p) {
            throw InvalidParentSet("parent list of node #" + std::to_string(child) + " is not sorted and unique");
        }
    }
}

} // namespace

void LineageModelParams::validate() const
{
    if (!(p_root > 0.0 && p_root < 1.0)) {
        throw ConfigError("p_root must lie in (0, 1)");
    }
    if (!(p_k > 0.0 && p_k < 1.0)) {
        throw ConfigError("p_k must lie in (0, 1)");
    }
    if (k_max < 1) {
        throw ConfigError("k_max must be at least 1");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("lambda must be positive");
    }
}

nlohmann::json lineage_params_to_json(const LineageModelParams& params)
{
    return {{"p_root", params.p_root}, {"p_k", params.p_k}, {"k_max", params.k_max}, {"lambda", params.lambda}};
}

LineageModelParams lineage_params_from_json(const nlohmann::json& j)
{
    LineageModelParams p;
    try {
        p.p_root = j.value("p_root", p.p_root);
        p.p_k = j.value("p_k", p.p_k);
        p.k_max = j.value("k_max", p.k_max);
        p.lambda = j.value("lambda", p.lambda);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("lineage params: ") + e.what());
    }
    p.validate();
    return p;
}

void AnnealSchedule::validate() const
{
    if (!(t0 > 0.0) || !std::isfinite(t0)) {
        throw ConfigError("anneal t0 must be positive");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("anneal alpha must lie in (0, 1]");
    }
}

std::vector<TimeTick> times_vector(const Dataset& dataset, const TimesMap& times)
{
    std::vector<TimeTick> out;
    out.reserve(dataset.size());
    for (const auto& b : dataset.binaries()) {
        const auto it = times.find(b.id);
        if (it == times.end()) {
            throw UnknownId("no time assigned to \"" + b.id + "\"");
        }
        out.push_back(it->second);
    }
    return out;
}

TimesMap times_map(const Dataset& dataset, std::span<const TimeTick> times)
{
    TimesMap out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.emplace(dataset[i].id, times[i]);
    }
    return out;
}

std::vector<double> log_elementary_symmetric(std::span<const double> log_weights, std::size_t k_max)
{
    std::vector<double> out(k_max + 1, kNegInf);
    out[0] = 0.0;
    if (log_weights.empty()) {
        return out;
    }
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> e(k_max + 1, 0.0);
    e[0] = 1.0;
    for (double lw : log_weights) {
        const double w = std::exp(lw - shift);
        for (std::size_t k = k_max; k >= 1; --k) {
            e[k] += w * e[k - 1];
        }
    }
    for (std::size_t k = 1; k <= k_max; ++k) {
        if (e[k] > 0.0) {
            out[k] = std::log(e[k]) + static_cast<double>(k) * shift;
        }
    }
    return out;
}

std::vector<std::size_t> candidate_parents(std::span<const TimeTick> times, std::size_t child)
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (times[j] < times[child]) {
            out.push_back(j);
        }
    }
    return out;
}

std::vector<std::string> candidate_parents(const Dataset& dataset, const TimesMap& times, std::string_view child)
{
    const auto t = times_vector(dataset, times);
    std::vector<std::string> out;
    for (auto j : candidate_parents(t, dataset.require_index(child))) {
        out.push_back(dataset[j].id);
    }
    return out;
}

ChildScorer::ChildScorer(std::size_t child, std::span<const TimeTick> times, const SimilarityMatrix& sim,
                         const LineageModelParams& params)
    : child_(child)
    , candidates_(candidate_parents(times, child))
{
    max_parents_ = std::min(params.k_max, candidates_.size());
    log_weight_.assign(times.size(), 0.0);
    for (std::size_t j = 0; j < times.size(); ++j) {
        log_weight_[j] = params.lambda * sim(child, j);
    }
    if (candidates_.empty()) {
        log_root_ = 0.0;
        return;
    }
    log_root_ = std::log(params.p_root);
    log_not_root_ = std::log1p(-params.p_root);

    // Truncated geometric over {1..max_parents}.
    log_count_prior_.assign(max_parents_ + 1, kNegInf);
    double total = 0.0;
    for (std::size_t k = 1; k <= max_parents_; ++k) {
        total += params.p_k * std::pow(1.0 - params.p_k, static_cast<double>(k - 1));
    }
    for (std::size_t k = 1; k <= max_parents_; ++k) {
        log_count_prior_[k] =
            std::log(params.p_k) + static_cast<double>(k - 1) * std::log1p(-params.p_k) - std::log(total);
    }

    std::vector<double> cand_weights;
    cand_weights.reserve(candidates_.size());
    for (auto j : candidates_) {
        cand_weights.push_back(log_weight_[j]);
    }
    log_normalizer_ = log_elementary_symmetric(cand_weights, max_parents_);
}

double ChildScorer::score(std::span<const std::size_t> parents) const noexcept
{
    if (parents.empty()) {
        return log_root_;
    }
    double s = log_not_root_ + log_count_prior_[parents.size()] - log_normalizer_[parents.size()];
    for (auto j : parents) {
        s += log_weight_[j];
    }
    return s;
}

double parent_set_log_prob(std::size_t child, std::span<const std::size_t> parents, std::span<const TimeTick> times,
                           const SimilarityMatrix& sim, const LineageModelParams& params)
{
    check_parent_set(child, parents, times, params);
    return ChildScorer(child, times, sim, params).score(parents);
}

double parent_set_log_prob(const Dataset& dataset, std::string_view child, const std::vector<std::string>& parents,
                           const TimesMap& times, const SimilarityMatrix& sim, const LineageModelParams& params)
{
    const auto t = times_vector(dataset, times);
    std::vector<std::size_t> idx;
    for (const auto& p : parents) {
        idx.push_back(dataset.require_index(p));
    }
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
        throw InvalidParentSet("duplicate parent of \"" + std::string(child) + "\"");
    }
    return parent_set_log_prob(dataset.require_index(child), idx, t, sim, params);
}

double lineage_log_score(const ParentSets& parents, std::span<const TimeTick> times, const SimilarityMatrix& sim,
                         const LineageModelParams& params)
{
    double total = 0.0;
    for (std::size_t c = 0; c < parents.size(); ++c) {
        total += parent_set_log_prob(c, parents[c], times, sim, params);
    }
    return total;
}

double lineage_log_score(const LineageGraph& lineage, const Dataset& dataset, const TimesMap& times,
                         const SimilarityMatrix& sim, const LineageModelParams& params)
{
    if (const auto v = validate_lineage(lineage, times); !v.empty()) {
        throw InvalidLineage("lineage is not valid for these times: " + std::string(to_string(v.front().kind)) +
                             " " + v.front().first + " " + v.front().second);
    }
    return lineage_log_score(dataset_parents(lineage, dataset), times_vector(dataset, times), sim, params);
}

double joint_log_score(const ParentSets& parents, std::span<const TimeTick> times, const Dataset& dataset,
                       const SimilarityMatrix& sim, const TimeModelParams& time_params,
                       const LineageModelParams& lineage_params)
{
    double total = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        total += evidence_log_likelihood(times[i], dataset[i], time_params);
    }
    if (total == kNegInf) {
        return kNegInf;
    }
    return total + lineage_log_score(parents, times, sim, lineage_params);
}

double joint_log_score(const LineageGraph& lineage, const TimesMap& times, const Dataset& dataset,
                       const SimilarityMatrix& sim, const TimeModelParams& time_params,
                       const LineageModelParams& lineage_params)
{
    const double lineage_part = lineage_log_score(lineage, dataset, times, sim, lineage_params);
    double total = 0.0;
    for (const auto& b : dataset.binaries()) {
        total += evidence_log_likelihood(times.at(b.id), b, time_params);
    }
    return total + lineage_part;
}

ParentSets anneal_lineage(std::span<const TimeTick> times, const SimilarityMatrix& sim,
                          const LineageModelParams& params, const AnnealSchedule& schedule, std::uint64_t seed,
                          const ParentSets* initial)
{
    const auto n = times.size();
    ParentSets state(n);
    if (initial) {
        if (initial->size() != n) {
            throw InvalidParentSet("initial lineage has the wrong number of nodes");
        }
        for (std::size_t c = 0; c < n; ++c) {
            check_parent_set(c, (*initial)[c], times, params);
        }
        state = *initial;
    }

    std::vector<ChildScorer> scorers;
    scorers.reserve(n);
    std::vector<std::size_t> active;
    std::vector<double> child_score(n);
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        scorers.emplace_back(c, times, sim, params);
        if (!scorers.back().candidates().empty()) {
            active.push_back(c);
        }
        child_score[c] = scorers.back().score(state[c]);
        total += child_score[c];
    }

    ParentSets best = state;
    double best_score = total;
    if (active.empty()) {
        return best;
    }

    Rng rng(seed);
    std::vector<std::size_t> proposal;
    std::vector<std::size_t> free_candidates;
    double temperature = schedule.t0;
    for (std::size_t it = 0; it < schedule.iters; ++it, temperature *= schedule.alpha) {
        const auto c = active[uniform_below(rng, active.size())];
        const auto& scorer = scorers[c];
        const auto& current = state[c];
        const auto move = uniform_below(rng, 4);

        free_candidates.clear();
        for (auto j : scorer.candidates()) {
            if (!std::binary_search(current.begin(), current.end(), j)) {
                free_candidates.push_back(j);
            }
        }
        auto pick_free = [&] { return free_candidates[uniform_below(rng, free_candidates.size())]; };

        proposal = current;
        switch (move) {
        case 0: // toggle root
            if (proposal.empty()) {
                proposal.push_back(pick_free());
            } else {
                proposal.clear();
            }
            break;
        case 1: // add parent
            if (proposal.size() >= scorer.max_parents()) {
                continue;
            }
            proposal.push_back(pick_free());
            break;
        case 2: // remove parent
            if (proposal.empty()) {
                continue;
            }
            proposal.erase(proposal.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, proposal.size())));
            break;
        default: // swap parent
            if (proposal.empty() || free_candidates.empty()) {
                continue;
            }
            proposal[uniform_below(rng, proposal.size())] = pick_free();
            break;
        }
        std::sort(proposal.begin(), proposal.end());

        const double proposed = scorer.score(proposal);
        const double delta = proposed - child_score[c];
        if (delta >= 0.0 || uniform01(rng) < std::exp(delta / temperature)) {
            state[c] = proposal;
            child_score[c] = proposed;
            total += delta;
            if (total > best_score + 1e-12) {
                best = state;
                best_score = total;
            }
        }
    }
    return best;
}

LineageGraph max_lineage_given_times(const TimesMap& times, const Dataset& dataset, const SimilarityMatrix& sim,
                                     const LineageModelParams& params, const AnnealSchedule& schedule,
                                     std::uint64_t seed)
{
    const auto t = times_vector(dataset, times);
    return LineageGraph::from_parents(dataset.ids(), anneal_lineage(t, sim, params, schedule, seed));
}

namespace {

std::vector<std::pair<std::string_view, std::string_view>> sorted_edges(const ParentSets& parents,
                                                                        const Dataset& dataset)
{
    std::vector<std::pair<std::string_view, std::string_view>> edges;
    for (std::size_t c = 0; c < parents.size(); ++c) {
        for (auto p : parents[c]) {
            edges.emplace_back(dataset[p].id, dataset[c].id);
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

} // namespace

ParentSets brute_force_parents(std::span<const TimeTick> times, const Dataset& dataset, const SimilarityMatrix& sim,
                               const LineageModelParams& params)
{
    const auto n = times.size();
    if (n > 8 || params.k_max > 2) {
        throw TooLarge("brute force is limited to 8 binaries and k_max <= 2");
    }

    struct Option {
        std::vector<std::size_t> parents;
        double score;
    };
    std::vector<std::vector<Option>> options(n);
    for (std::size_t c = 0; c < n; ++c) {
        const ChildScorer scorer(c, times, sim, params);
        const auto& cand = scorer.candidates();
        options[c].push_back({{}, scorer.score({})});
        for (std::size_t a = 0; a < cand.size(); ++a) {
            std::vector<std::size_t> single{cand[a]};
            options[c].push_back({single, scorer.score(single)});
            if (scorer.max_parents() >= 2) {
                for (std::size_t b = a + 1; b < cand.size(); ++b) {
                    std::vector<std::size_t> pair{cand[a], cand[b]};
                    options[c].push_back({pair, scorer.score(pair)});
                }
            }
        }
    }

    std::vector<std::size_t> choice(n, 0);
    ParentSets current(n);
    ParentSets best;
    double best_score = kNegInf;
    std::vector<std::pair<std::string_view, std::string_view>> best_edges;
    while (true) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            s += options[c][choice[c]].score;
        }
        const bool better = s > best_score + 1e-12;
        const bool tied = !better && s >= best_score - 1e-12;
        if (better || tied) {
            for (std::size_t c = 0; c < n; ++c) {
                current[c] = options[c][choice[c]].parents;
            }
            auto edges = sorted_edges(current, dataset);
            if (better || edges < best_edges) {
                best = current;
                best_score = std::max(best_score, s);
                best_edges = std::move(edges);
            }
        }
        std::size_t c = 0;
        while (c < n && ++choice[c] == options[c].size()) {
            choice[c] = 0;
            ++c;
        }
        if (c == n) {
            break;
        }
    }
    return best;
}

LineageGraph brute_force_lineage(const TimesMap& times, const Dataset& dataset, const SimilarityMatrix& sim,
                                 const LineageModelParams& params)
{
    const auto t = times_vector(dataset, times);
    return LineageGraph::from_parents(dataset.ids(), brute_force_parents(t, dataset, sim, params));
}

} // namespace mallineage
