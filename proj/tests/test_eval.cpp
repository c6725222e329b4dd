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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "mallineage/errors.hpp"
#include "mallineage/eval.hpp"
#include "test_support.hpp"

using namespace mallineage;

namespace {

using EdgeSet = std::set<std::pair<std::string, std::string>>;

EdgeSet edges_of(const LineageGraph& g)
{
    EdgeSet s;
    for (const auto& e : g.edges) {
        s.emplace(e.parent, e.child);
    }
    return s;
}

// Reachability by Floyd–Warshall on a boolean matrix.
std::vector<std::vector<bool>> closure(const LineageGraph& g, const std::vector<std::string>& order)
{
    const auto n = order.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    auto idx = [&](const std::string& id) {
        return static_cast<std::size_t>(std::find(order.begin(), order.end(), id) - order.begin());
    };
    for (const auto& e : g.edges) {
        r[idx(e.parent)][idx(e.child)] = true;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (r[i][k] && r[k][j]) {
                    r[i][j] = true;
                }
            }
        }
    }
    return r;
}

Metrics oracle_metrics(const LineageGraph& pred, const LineageGraph& truth)
{
    const auto p = edges_of(pred);
    const auto t = edges_of(truth);
    EdgeSet common;
    std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::inserter(common, common.begin()));
    Metrics m;
    m.edge_precision = p.empty() ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(p.size());
    m.edge_recall = t.empty() ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(t.size());
    m.edge_f1 = m.edge_precision + m.edge_recall == 0.0
                    ? 0.0
                    : 2 * m.edge_precision * m.edge_recall / (m.edge_precision + m.edge_recall);
    const std::set<std::string> pr(pred.roots.begin(), pred.roots.end());
    std::size_t hit = 0;
    for (const auto& r : truth.roots) {
        hit += pr.count(r);
    }
    m.root_accuracy = truth.roots.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(truth.roots.size());
    const auto order = truth.nodes;
    const auto cp = closure(pred, order);
    const auto ct = closure(truth, order);
    std::size_t agree = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = 0; j < order.size(); ++j) {
            if (i != j) {
                ++pairs;
                agree += cp[i][j] == ct[i][j];
            }
        }
    }
    m.ancestor_accuracy = pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
    return m;
}

LineageGraph relabel(const LineageGraph& g, const std::string& prefix)
{
    auto name = [&](const std::string& id) { return prefix + id; };
    LineageGraph out;
    for (const auto& n : g.nodes) {
        out.nodes.push_back(name(n));
    }
    for (const auto& e : g.edges) {
        out.edges.push_back({name(e.parent), name(e.child)});
    }
    for (const auto& r : g.roots) {
        out.roots.push_back(name(r));
    }
    std::reverse(out.nodes.begin(), out.nodes.end());
    out.canonicalize();
    return out;
}

void check_same(const Metrics& a, const Metrics& b)
{
    CHECK(a.edge_precision == doctest::Approx(b.edge_precision));
    CHECK(a.edge_recall == doctest::Approx(b.edge_recall));
    CHECK(a.edge_f1 == doctest::Approx(b.edge_f1));
    CHECK(a.root_accuracy == doctest::Approx(b.root_accuracy));
    CHECK(a.ancestor_accuracy == doctest::Approx(b.ancestor_accuracy));
}

} // namespace

TEST_CASE("metrics examples")
{
    const auto chain = LineageGraph::from_parents({"a", "b", "c"}, {{}, {0}, {1}});
    const auto m = score_lineage(chain, chain);
    CHECK(m.edge_precision == 1.0);
    CHECK(m.edge_recall == 1.0);
    CHECK(m.edge_f1 == 1.0);
    CHECK(m.root_accuracy == 1.0);
    CHECK(m.ancestor_accuracy == 1.0);

    const auto reversed = LineageGraph::from_parents({"a", "b", "c"}, {{1}, {2}, {}});
    const auto r = score_lineage(reversed, chain);
    CHECK(r.edge_precision == 0.0);
    CHECK(r.edge_recall == 0.0);
    CHECK(r.edge_f1 == 0.0);
    CHECK(r.root_accuracy == 0.0);
    CHECK(r.ancestor_accuracy == 0.0);

    const auto roots = LineageGraph::from_parents({"a", "b", "c"}, {{}, {}, {}});
    const auto e = score_lineage(roots, chain);
    CHECK(e.edge_precision == 1.0);
    CHECK(e.edge_recall == 0.0);
    CHECK(score_lineage(chain, roots).edge_recall == 1.0);

    CHECK_THROWS_AS(score_lineage(chain, LineageGraph::from_parents({"a", "b"}, {{}, {0}})), NodeSetMismatch);
    CHECK(f1_score(0.0, 0.0) == 0.0);
    CHECK(f1_score(0.5, 1.0) == doctest::Approx(2.0 / 3));
}

TEST_CASE("metrics match an independent recomputation and ignore labels")
{
    Rng rng(81);
    for (int k = 0; k < 200; ++k) {
        const auto n = 1 + uniform_below(rng, 10);
        const auto pred = testing::random_lineage(rng, n);
        const auto truth = testing::random_lineage(rng, n);
        const auto m = score_lineage(pred, truth);
        check_same(m, oracle_metrics(pred, truth));
        check_same(m, score_lineage(relabel(pred, "x_"), relabel(truth, "x_")));
        CHECK(m.edge_f1 == doctest::Approx(f1_score(m.edge_precision, m.edge_recall)));
        CHECK(score_lineage(truth, truth).ancestor_accuracy == 1.0);
    }
}

TEST_CASE("time error")
{
    const TimesMap truth{{"a", 5}, {"b", 9}};
    CHECK(time_error(truth, truth) == 0.0);
    CHECK(time_error(TimesMap{{"a", 5}, {"b", 12}}, truth) == doctest::Approx(1.5));
    CHECK(time_error(TimesMap{{"a", 8}}, TimesMap{{"a", 5}}) == 3.0);
    CHECK_THROWS_AS(time_error(TimesMap{{"a", 5}, {"c", 9}}, truth), IdMismatch);
    CHECK_THROWS_AS(time_error(TimesMap{{"a", 5}}, truth), IdMismatch);

    const Dataset d({testing::binary("a", {1}, ObservedStamp::missing())}, {0, 10});
    const std::vector<TimePosterior> uniform{TimePosterior({0, 10}, std::vector<double>(11, 1.0 / 11))};
    CHECK(time_error(d, uniform, TimesMap{{"a", 5}}) == doctest::Approx(0.0));
}

TEST_CASE("greedy baseline picks the most similar earlier binary")
{
    const Dataset d({testing::binary("a", {1, 2, 3}, ObservedStamp::value(1)),
                     testing::binary("b", {7, 8, 9}, ObservedStamp::value(2)),
                     testing::binary("c", {1, 2, 4}, ObservedStamp::value(3))},
                    {0, 10});
    TimeModelParams tp;
    tp.p_obf = 0.0;
    tp.window = d.window();
    std::vector<TimePosterior> post;
    for (const auto& b : d.binaries()) {
        post.push_back(exact_posterior(b, tp));
    }
    const auto g = greedy_baseline(d, similarity_matrix(d), post);
    CHECK(g == LineageGraph::from_parents({"a", "b", "c"}, {{}, {0}, {0}}));
}

TEST_CASE("sweep with clean stamps and matched parameters")
{
    GenConfig g;
    g.n_binaries = 10;
    g.window = {0, 300};
    TimeModelParams tp;
    tp.p_obf = 0.0;
    InferConfig ic;
    ic.restarts = 2;
    ic.anneal.iters = 1000;
    SweepOptions opt;
    opt.conditional_sweeps = 500;
    const std::vector<double> levels{0.0};
    const auto report = obfuscation_sweep(g, levels, tp, LineageModelParams{}, ic, 2, opt);
    REQUIRE(report.rows.size() == 2);
    for (const auto& r : report.rows) {
        CHECK(r.pre_time_err == doctest::Approx(0.0));
        CHECK(r.post_time_err == doctest::Approx(0.0));
        CHECK(r.delta == doctest::Approx(0.0));
        CHECK(r.seconds == 0.0);
    }
}

TEST_CASE("sweep output is deterministic and ordered")
{
    GenConfig g;
    g.n_binaries = 8;
    g.window = {0, 200};
    InferConfig ic;
    ic.restarts = 2;
    ic.anneal.iters = 800;
    SweepOptions serial;
    serial.threads = 1;
    serial.conditional_sweeps = 300;
    SweepOptions parallel = serial;
    parallel.threads = 3;
    const std::vector<double> levels{0.0, 0.5, 1.0};
    const auto a = obfuscation_sweep(g, levels, TimeModelParams{}, LineageModelParams{}, ic, 2, serial);
    const auto b = obfuscation_sweep(g, levels, TimeModelParams{}, LineageModelParams{}, ic, 2, parallel);
    const auto csv = sweep_csv(a);
    CHECK(csv == sweep_csv(b));
    CHECK(sweep_summary(a) == sweep_summary(b));
    CHECK(csv.rfind("level,rep,pre_time_err,post_time_err,delta,precision,recall,f1,root_acc,ancestor_acc,"
                    "joint_log_score,seconds\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    for (std::size_t i = 1; i < a.rows.size(); ++i) {
        const auto& p = a.rows[i - 1];
        const auto& q = a.rows[i];
        CHECK((p.level < q.level || (p.level == q.level && p.rep < q.rep)));
    }
    for (const auto& r : a.rows) {
        CHECK(r.delta == doctest::Approx(r.pre_time_err - r.post_time_err));
    }
    const auto s = sweep_summary(a);
    CHECK(s["level_count"] == 3);
    CHECK(s["levels"].size() == 3);

    CHECK_THROWS_AS(obfuscation_sweep(g, levels, TimeModelParams{}, LineageModelParams{}, ic, 0), ConfigError);
    const std::vector<double> bad{1.2};
    CHECK_THROWS_AS(obfuscation_sweep(g, bad, TimeModelParams{}, LineageModelParams{}, ic, 1), ConfigError);
}
