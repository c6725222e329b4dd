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
#include <fstream>

#include "mallineage/errors.hpp"
#include "mallineage/io.hpp"
#include "test_support.hpp"

using namespace mallineage;
using testing::binary;

namespace {

bool has_violation(const std::vector<Violation>& v, ViolationKind kind)
{
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

LineageGraph chain_abc()
{
    return LineageGraph::from_parents({"a", "b", "c"}, {{}, {0}, {1}});
}

} // namespace

TEST_CASE("dataset construction enforces invariants")
{
    CHECK_NOTHROW(Dataset({binary("a", {1}, ObservedStamp::value(100))}, {0, 1000}));
    CHECK_THROWS_AS(Dataset({binary("a", {1}, ObservedStamp::value(1)), binary("a", {2}, ObservedStamp::empty())},
                            {0, 1000}),
                    ValidationError);
    CHECK_THROWS_AS(Dataset({binary("a", {1}, ObservedStamp::empty())}, {5, 5}), ValidationError);
    CHECK_THROWS_AS(Dataset({binary("a", {1}, ObservedStamp::empty())}, {6, 5}), ValidationError);
    CHECK_THROWS_AS(Dataset({}, {0, 10}), ValidationError);
    CHECK_THROWS_AS(Dataset({binary("a", {}, ObservedStamp::empty())}, {0, 10}), ValidationError);
    CHECK_THROWS_AS(Dataset({binary("", {1}, ObservedStamp::empty())}, {0, 10}), ValidationError);
    CHECK_THROWS_AS(Dataset({binary("a", {1}, ObservedStamp::empty(), 11)}, {0, 10}), ValidationError);
    CHECK_NOTHROW(Dataset({binary("a", {1}, ObservedStamp::empty(), 10)}, {0, 10}));
}

TEST_CASE("dataset normalizes features and indexes ids")
{
    const Dataset d({binary("x", {3, 1, 3, 2}, ObservedStamp::missing()), binary("y", {9}, ObservedStamp::empty())},
                    {0, 10});
    CHECK(d[0].features == FeatureSet{1, 2, 3});
    CHECK(d.index_of("y") == 1u);
    CHECK_FALSE(d.index_of("z").has_value());
    CHECK_THROWS_AS((void)d.require_index("z"), UnknownId);
    CHECK(d.ids() == std::vector<std::string>{"x", "y"});
}

TEST_CASE("load_dataset reads a minimal file and rejects bad input")
{
    testing::TempDir dir("domain_load");
    const auto path = dir.path() / "d.json";
    {
        std::ofstream f(path);
        f << R"({"window":{"t_min":0,"t_max":1000},"binaries":[{"id":"a","features":[7],)"
             R"("stamp":{"kind":"value","tick":100},"first_seen":null}]})";
    }
    const auto d = load_dataset(path);
    REQUIRE(d.size() == 1);
    CHECK(d[0].stamp == ObservedStamp::value(100));
    CHECK_FALSE(d[0].first_seen.has_value());

    {
        std::ofstream f(path);
        f << R"({"window":{"t_min":0,"t_max":10},"binaries":[)"
             R"({"id":"a","features":[1],"stamp":{"kind":"empty"},"first_seen":null},)"
             R"({"id":"a","features":[2],"stamp":{"kind":"missing"},"first_seen":3}]})";
    }
    CHECK_THROWS_AS(load_dataset(path), ValidationError);

    {
        std::ofstream f(path);
        f << R"({"window":{"t_min":0,"t_max":10},"binaries":[{"id":"a"}]})";
    }
    CHECK_THROWS_AS(load_dataset(path), ParseError);

    {
        std::ofstream f(path);
        f << "{not json";
    }
    CHECK_THROWS_AS(load_dataset(path), ParseError);
    CHECK_THROWS_AS(load_dataset(dir.path() / "absent.json"), IoError);
}

TEST_CASE("stamp JSON covers all three kinds")
{
    for (const auto& s : {ObservedStamp::value(-4), ObservedStamp::empty(), ObservedStamp::missing()}) {
        CHECK(stamp_from_json(stamp_to_json(s)) == s);
    }
    CHECK(stamp_to_json(ObservedStamp::value(12)) == json{{"kind", "value"}, {"tick", 12}});
    CHECK_THROWS_AS(stamp_from_json(json{{"kind", "value"}}), ParseError);
    CHECK_THROWS_AS(stamp_from_json(json{{"kind", "blank"}}), ParseError);
}

TEST_CASE("dataset save/load round-trips on random instances")
{
    testing::TempDir dir("domain_rt");
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        const auto d = testing::random_dataset(rng, 1 + uniform_below(rng, 15));
        const auto path = dir.path() / "d.json";
        save_dataset(d, path);
        CHECK(load_dataset(path) == d);
    }
}

TEST_CASE("lineage save/load round-trips on random instances")
{
    testing::TempDir dir("lineage_rt");
    Rng rng(12);
    for (int k = 0; k < 100; ++k) {
        const auto g = testing::random_lineage(rng, 1 + uniform_below(rng, 15));
        REQUIRE(structural_violations(g).empty());
        const auto path = dir.path() / "g.json";
        save_lineage(g, path);
        const auto doc = load_lineage(path);
        CHECK(doc.graph == g);
        CHECK_FALSE(doc.times.has_value());
        CHECK_FALSE(doc.log_score.has_value());
    }
}

TEST_CASE("lineage file layout")
{
    testing::TempDir dir("lineage_layout");
    const auto path = dir.path() / "g.json";

    save_lineage(LineageGraph::from_parents({"a"}, {{}}), path);
    auto j = read_json_file(path);
    CHECK(j["edges"] == json::array());
    CHECK(j["roots"] == json{"a"});

    LineageDocument doc{chain_abc(), TimesMap{{"a", 1}, {"b", 2}, {"c", 3}}, -4.5};
    save_lineage(doc, path);
    j = read_json_file(path);
    CHECK(j["edges"].size() == 2);
    CHECK(j["edges"][0] == json{"a", "b"});
    CHECK(j["roots"] == json{"a"});
    CHECK(load_lineage(path) == doc);
}

TEST_CASE("save_lineage refuses structurally invalid graphs")
{
    testing::TempDir dir("lineage_bad");
    LineageGraph g{{"a", "b"}, {{"a", "b"}, {"b", "a"}}, {}};
    CHECK_THROWS_AS(save_lineage(g, dir.path() / "g.json"), InvalidLineage);
}

TEST_CASE("validate_lineage examples")
{
    const auto ab = LineageGraph::from_parents({"a", "b"}, {{}, {0}});
    CHECK(validate_lineage(ab, {{"a", 1}, {"b", 2}}).empty());

    const auto v = validate_lineage(ab, {{"a", 5}, {"b", 2}});
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Violation{ViolationKind::Temporal, "a", "b"});

    CHECK(has_violation(validate_lineage(ab, {{"a", 3}, {"b", 3}}), ViolationKind::Temporal));

    LineageGraph cyc{{"a", "b"}, {{"a", "b"}, {"b", "a"}}, {}};
    CHECK(has_violation(validate_lineage(cyc, {{"a", 1}, {"b", 2}}), ViolationKind::Cycle));

    CHECK_THROWS_AS(validate_lineage(ab, {{"a", 1}}), UnknownId);
}

TEST_CASE("structural violations")
{
    CHECK(has_violation(structural_violations({{"a", "a"}, {}, {"a"}}), ViolationKind::DuplicateNode));
    CHECK(has_violation(structural_violations({{"a"}, {{"a", "z"}}, {"a"}}), ViolationKind::UnknownEndpoint));
    CHECK(has_violation(structural_violations({{"a"}, {{"a", "a"}}, {}}), ViolationKind::SelfLoop));
    CHECK(has_violation(structural_violations({{"a", "b"}, {{"a", "b"}, {"a", "b"}}, {"a"}}),
                        ViolationKind::DuplicateEdge));
    CHECK(has_violation(structural_violations({{"a"}, {}, {"a", "q"}}), ViolationKind::UnknownRoot));
    CHECK(has_violation(structural_violations({{"a", "b"}, {{"a", "b"}}, {"a", "b"}}), ViolationKind::RootHasParent));
    CHECK(has_violation(structural_violations({{"a", "b"}, {}, {"a"}}), ViolationKind::OrphanNonRoot));
    CHECK(structural_violations(chain_abc()).empty());
}

TEST_CASE("topological order agrees with time order on valid lineages")
{
    Rng rng(13);
    for (int k = 0; k < 50; ++k) {
        const auto n = 1 + uniform_below(rng, 12);
        const auto g = testing::random_lineage(rng, n);
        TimesMap times;
        for (std::size_t i = 0; i < n; ++i) {
            times[testing::node_id(i)] = static_cast<TimeTick>(10 * i) + uniform_int(rng, 0, 9);
        }
        REQUIRE(validate_lineage(g, times).empty());
        const auto order = topological_order(g);
        REQUIRE(order.has_value());
        std::vector<std::size_t> pos(n);
        for (std::size_t r = 0; r < n; ++r) {
            pos[(*order)[r]] = r;
        }
        const auto parents = g.parent_indices();
        for (std::size_t c = 0; c < n; ++c) {
            for (auto p : parents[c]) {
                CHECK(pos[p] < pos[c]);
                CHECK(times[g.nodes[p]] < times[g.nodes[c]]);
            }
        }
    }
    LineageGraph cyc{{"a", "b"}, {{"a", "b"}, {"b", "a"}}, {}};
    CHECK_FALSE(topological_order(cyc).has_value());
}

TEST_CASE("export_dot")
{
    const auto single = LineageGraph::from_parents({"a"}, {{}});
    const auto dot = export_dot(single);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("\"a\"") != std::string::npos);
    CHECK(dot.find("->") == std::string::npos);

    const auto ab = LineageGraph::from_parents({"b", "a"}, {{1}, {}});
    const auto with_times = export_dot(ab, TimesMap{{"a", 3}, {"b", 8}});
    CHECK(with_times.find("\"a\" -> \"b\";") != std::string::npos);
    CHECK(with_times.find("t=3") != std::string::npos);
    CHECK(with_times.find("\"a\" [") < with_times.find("\"b\" ["));
    CHECK(export_dot(ab, TimesMap{{"a", 3}, {"b", 8}}) == with_times);

    const auto quoted = LineageGraph::from_parents({"x\"y"}, {{}});
    CHECK(export_dot(quoted).find("\"x\\\"y\"") != std::string::npos);
}
