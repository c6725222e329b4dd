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

#include <cmath>
#include <set>

#include "mallineage/errors.hpp"
#include "mallineage/io.hpp"
#include "mallineage/similarity.hpp"
#include "mallineage/synthgen.hpp"
#include "test_support.hpp"

using namespace mallineage;

namespace {

std::set<std::size_t> ancestors(const std::vector<std::vector<std::size_t>>& parents, std::size_t node)
{
    std::set<std::size_t> out;
    std::vector<std::size_t> stack(parents[node].begin(), parents[node].end());
    while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        if (out.insert(p).second) {
            stack.insert(stack.end(), parents[p].begin(), parents[p].end());
        }
    }
    return out;
}

// P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_upper_tail(int n, int k)
{
    double total = 0.0;
    for (int i = k; i <= n; ++i) {
        total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
    }
    return total;
}

} // namespace

TEST_CASE("single binary family")
{
    GenConfig g;
    g.n_binaries = 1;
    const auto f = generate_family(g);
    CHECK(f.dataset.size() == 1);
    CHECK(f.truth.edges.empty());
    CHECK(f.truth.roots.size() == 1);
}

TEST_CASE("all roots")
{
    GenConfig g;
    g.p_multi_root = 1.0;
    const auto f = generate_family(g);
    CHECK(f.truth.edges.empty());
    CHECK(f.truth.roots.size() == g.n_binaries);
}

TEST_CASE("zero mutation copies the parent")
{
    GenConfig g;
    g.mutation_rate = 0.0;
    g.p_second_parent = 0.0;
    g.p_multi_root = 0.0;
    const auto f = generate_family(g);
    CHECK(f.truth.edges.size() == g.n_binaries - 1);
    for (const auto& e : f.truth.edges) {
        const auto& p = f.dataset[f.dataset.require_index(e.parent)];
        const auto& c = f.dataset[f.dataset.require_index(e.child)];
        CHECK(p.features == c.features);
        CHECK(jaccard(p.features, c.features) == 1.0);
    }
}

TEST_CASE("ground truth is consistent")
{
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        GenConfig g;
        g.seed = seed;
        g.obf_fraction = static_cast<double>(seed % 11) / 10.0;
        g.window = {0, 100};
        const auto f = generate_family(g);
        CHECK(validate_lineage(f.truth, f.times).empty());
        CHECK(f.truth.nodes == f.dataset.ids());
        std::set<TimeTick> distinct;
        std::size_t obfuscated = 0;
        for (std::size_t i = 0; i < f.dataset.size(); ++i) {
            const auto& b = f.dataset[i];
            const auto t = f.times.at(b.id);
            distinct.insert(t);
            CHECK(f.dataset.window().contains(t));
            REQUIRE(b.first_seen.has_value());
            CHECK(*b.first_seen >= t);
            const auto& label = f.labels[i];
            CHECK(label.true_creation == t);
            CHECK(label.stamp == b.stamp);
            CHECK(label.first_seen == b.first_seen);
            if (!label.was_obfuscated) {
                CHECK(b.stamp == ObservedStamp::value(t));
            } else {
                ++obfuscated;
                REQUIRE(label.obfuscation_kind.has_value());
                CHECK((*label.obfuscation_kind == ObfuscationKind::Empty) == (b.stamp.kind() == StampKind::Empty));
            }
        }
        CHECK(distinct.size() == f.dataset.size());
        CHECK(obfuscated == static_cast<std::size_t>(std::llround(g.obf_fraction * static_cast<double>(g.n_binaries))));
    }
}

TEST_CASE("apply_obfuscation")
{
    Rng rng(71);
    std::vector<BinaryRecord> records;
    for (int i = 0; i < 10; ++i) {
        records.push_back(testing::binary(testing::node_id(static_cast<std::size_t>(i)), {1},
                                          ObservedStamp::value(i * 3)));
    }
    const Dataset d(records, {0, 100});
    CHECK(apply_obfuscation(d, 0.0, 0.5, rng) == d);

    const auto all = apply_obfuscation(d, 1.0, 1.0, rng);
    for (const auto& b : all.binaries()) {
        CHECK(b.stamp == ObservedStamp::empty());
    }

    for (int k = 0; k < 20; ++k) {
        std::vector<ObfuscationRecord> rec;
        const auto half = apply_obfuscation(d, 0.5, 0.0, rng, &rec);
        CHECK(rec.size() == 5);
        std::size_t changed_or_touched = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const bool touched = std::any_of(rec.begin(), rec.end(), [&](const auto& r) { return r.index == i; });
            changed_or_touched += touched;
            if (!touched) {
                CHECK(half[i].stamp == d[i].stamp);
            } else {
                CHECK(half[i].stamp.has_value());
                CHECK(d.window().contains(half[i].stamp.tick()));
            }
        }
        CHECK(changed_or_touched == 5);
    }
}

TEST_CASE("edges carry a similarity signal")
{
    Rng rng(72);
    int wins = 0;
    int trials = 0;
    int edges = 0;
    for (std::uint64_t seed = 1; edges < 1000; ++seed) {
        GenConfig g;
        g.seed = seed;
        const auto f = generate_family(g);
        const auto parents = f.truth.parent_indices();
        for (std::size_t c = 0; c < parents.size() && edges < 1000; ++c) {
            const auto anc = ancestors(parents, c);
            std::vector<std::size_t> others;
            for (std::size_t j = 0; j < parents.size(); ++j) {
                if (j != c && !anc.contains(j)) {
                    others.push_back(j);
                }
            }
            for (auto p : parents[c]) {
                if (edges >= 1000 || others.empty()) {
                    break;
                }
                ++edges;
                const auto o = others[uniform_below(rng, others.size())];
                const double a = jaccard(f.dataset[p].features, f.dataset[c].features);
                const double b = jaccard(f.dataset[o].features, f.dataset[c].features);
                if (a != b) {
                    ++trials;
                    wins += a > b;
                }
            }
        }
    }
    CHECK(binomial_upper_tail(trials, wins) < 0.01);
}

TEST_CASE("generation is deterministic given the seed")
{
    GenConfig g;
    g.obf_fraction = 0.4;
    g.seed = 1234;
    const auto a = generate_family(g);
    const auto b = generate_family(g);
    CHECK(dataset_to_json(a.dataset).dump() == dataset_to_json(b.dataset).dump());
    CHECK(a.truth == b.truth);
    CHECK(a.times == b.times);
    CHECK(a.labels == b.labels);
    g.seed = 1235;
    CHECK_FALSE(generate_family(g).dataset == a.dataset);
}

TEST_CASE("generator config validation and JSON")
{
    GenConfig g;
    g.n_binaries = 12;
    g.obf_fraction = 0.3;
    const auto back = gen_config_from_json(gen_config_to_json(g));
    CHECK(back.n_binaries == 12);
    CHECK(back.obf_fraction == 0.3);
    CHECK(gen_config_from_json(nlohmann::json::object()).n_binaries == 30);
    CHECK_THROWS_AS(gen_config_from_json(nlohmann::json{{"n_binaries", 0}}), ConfigError);
    CHECK_THROWS_AS(gen_config_from_json(nlohmann::json{{"obf_fraction", 1.5}}), ConfigError);
    CHECK_THROWS_AS(gen_config_from_json(nlohmann::json{{"p_lag", 0.0}}), ConfigError);
    CHECK_THROWS_AS(gen_config_from_json(nlohmann::json{{"window", {{"t_min", 0}, {"t_max", 5}}}}), ConfigError);
}
