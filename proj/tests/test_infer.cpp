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

#include "mallineage/errors.hpp"
#include "mallineage/infer.hpp"
#include "mallineage/synthgen.hpp"
#include "test_support.hpp"

using namespace mallineage;
using testing::binary;

namespace {

InferConfig small_config(std::uint64_t seed)
{
    InferConfig c;
    c.restarts = 4;
    c.anneal.iters = 3000;
    c.seed = seed;
    c.threads = 1;
    return c;
}

SyntheticFamily family(std::size_t n, double obf, std::uint64_t seed)
{
    GenConfig g;
    g.n_binaries = n;
    g.window = {0, 200};
    g.obf_fraction = obf;
    g.seed = seed;
    return generate_family(g);
}

TimeModelParams time_params(const Dataset& d, double p_obf = 0.3)
{
    TimeModelParams p;
    p.p_obf = p_obf;
    p.window = d.window();
    return p;
}

} // namespace

TEST_CASE("single clean binary")
{
    const Dataset d({binary("a", {1, 2}, ObservedStamp::value(40), 42)}, {0, 100});
    auto tp = time_params(d, 0.0);
    const auto r = infer_lineage(d, tp, LineageModelParams{}, small_config(1));
    CHECK(r.lineage == LineageGraph::from_parents({"a"}, {{}}));
    CHECK(r.times == TimesMap{{"a", 40}});
    for (const auto& s : r.restarts) {
        CHECK(s.iterations == 1);
    }
}

TEST_CASE("result invariants and monotone rounds")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto f = family(12, 0.5, seed);
        const auto tp = time_params(f.dataset);
        const LineageModelParams lp;
        const auto r = infer_lineage(f.dataset, tp, lp, small_config(seed));
        CHECK(validate_lineage(r.lineage, r.times).empty());
        CHECK(r.joint_log_score ==
              doctest::Approx(joint_log_score(r.lineage, r.times, f.dataset, similarity_matrix(f.dataset), tp, lp))
                  .epsilon(1e-9));
        REQUIRE(r.restarts.size() == 4);
        double best = r.restarts.front().final_score;
        for (const auto& s : r.restarts) {
            best = std::max(best, s.final_score);
            REQUIRE_FALSE(s.round_scores.empty());
            CHECK(s.round_scores.size() == s.iterations);
            CHECK(s.final_score == s.round_scores.back());
            for (std::size_t i = 1; i < s.round_scores.size(); ++i) {
                CHECK(s.round_scores[i] >= s.round_scores[i - 1]);
            }
        }
        CHECK(r.joint_log_score == best);
    }
}

TEST_CASE("inference is deterministic and independent of thread count")
{
    const auto f = family(10, 0.4, 9);
    const auto tp = time_params(f.dataset);
    auto one = small_config(3);
    auto many = one;
    many.threads = 3;
    const auto a = infer_lineage(f.dataset, tp, LineageModelParams{}, one);
    const auto b = infer_lineage(f.dataset, tp, LineageModelParams{}, many);
    CHECK(a.lineage == b.lineage);
    CHECK(a.times == b.times);
    CHECK(a.joint_log_score == b.joint_log_score);
    for (std::size_t r = 0; r < a.restarts.size(); ++r) {
        CHECK(a.restarts[r].seed == b.restarts[r].seed);
        CHECK(a.restarts[r].round_scores == b.restarts[r].round_scores);
    }
}

TEST_CASE("more restarts never lower the score")
{
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        const auto f = family(10, 0.6, seed);
        const auto tp = time_params(f.dataset);
        auto one = small_config(seed);
        one.restarts = 1;
        auto four = small_config(seed);
        const auto a = infer_lineage(f.dataset, tp, LineageModelParams{}, one);
        const auto b = infer_lineage(f.dataset, tp, LineageModelParams{}, four);
        CHECK(a.restarts[0].round_scores == b.restarts[0].round_scores);
        CHECK(b.joint_log_score >= a.joint_log_score);
    }
}

TEST_CASE("joint search beats brute force at posterior-mode times on tiny instances")
{
    Rng rng(61);
    int ok = 0;
    const int total = 100;
    for (int k = 0; k < total; ++k) {
        const auto f = family(2 + uniform_below(rng, 4), uniform01(rng), derive_seed(61, k));
        const auto tp = time_params(f.dataset);
        LineageModelParams lp;
        lp.k_max = 2;
        auto cfg = small_config(k);
        const auto sim = similarity_matrix(f.dataset);
        const auto post = time_posteriors(f.dataset, tp, cfg);
        std::vector<TimeTick> modes;
        for (const auto& p : post) {
            modes.push_back(p.mode());
        }
        const auto bf = brute_force_parents(modes, f.dataset, sim, lp);
        const double reference = joint_log_score(bf, modes, f.dataset, sim, tp, lp);
        const auto r = infer_lineage(f.dataset, sim, post, tp, lp, cfg);
        ok += r.joint_log_score >= reference - 1e-9;
    }
    CHECK(ok >= 90);
}

TEST_CASE("MH posteriors feed inference")
{
    const auto f = family(6, 0.5, 4);
    const auto tp = time_params(f.dataset);
    auto cfg = small_config(2);
    cfg.time_inference = TimeInference::Mh;
    cfg.mh_samples = 5000;
    const auto post = time_posteriors(f.dataset, tp, cfg);
    REQUIRE(post.size() == f.dataset.size());
    const auto again = time_posteriors(f.dataset, tp, cfg);
    for (std::size_t i = 0; i < post.size(); ++i) {
        CHECK(std::equal(post[i].probs().begin(), post[i].probs().end(), again[i].probs().begin()));
    }
    const auto r = infer_lineage(f.dataset, tp, LineageModelParams{}, cfg);
    CHECK(validate_lineage(r.lineage, r.times).empty());
}

TEST_CASE("infer config JSON")
{
    InferConfig c;
    c.restarts = 3;
    c.anneal.iters = 77;
    c.time_inference = TimeInference::Mh;
    c.seed = 99;
    const auto back = infer_config_from_json(infer_config_to_json(c));
    CHECK(back.restarts == 3);
    CHECK(back.anneal.iters == 77);
    CHECK(back.time_inference == TimeInference::Mh);
    CHECK(back.seed == 99);
    CHECK(infer_config_from_json(nlohmann::json::object()).restarts == 16);
    CHECK_THROWS_AS(infer_config_from_json(nlohmann::json{{"restarts", 0}}), ConfigError);
    CHECK_THROWS_AS(infer_config_from_json(nlohmann::json{{"time_inference", "gibbs"}}), ConfigError);
    CHECK_THROWS_AS(infer_config_from_json(nlohmann::json{{"restarts", "many"}}), ParseError);
}
