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

#include "mallineage/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mallineage/errors.hpp"

namespace mallineage {

namespace {

const json& require(const json& j, const char* key)
{
    if (!j.is_object()) {
        throw ParseError(std::string("expected an object holding \"") + key + "\"");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ParseError(std::string("missing field \"") + key + "\"");
    }
    return *it;
}

template <typename T>
T get_as(const json& j, const char* what)
{
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field \"") + what + "\": " + e.what());
    }
}

TimeTick get_tick(const json& j, const char* what)
{
    if (!j.is_number_integer()) {
        throw ParseError(std::string("field \"") + what + "\" must be an integer");
    }
    return j.get<TimeTick>();
}

std::string dot_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

std::string dot_quote(const std::string& s)
{
    return '"' + dot_escape(s) + '"';
}

} // namespace

json stamp_to_json(const ObservedStamp& stamp)
{
    json j = {{"kind", std::string(to_string(stamp.kind()))}};
    if (stamp.has_value()) {
        j["tick"] = stamp.tick();
    }
    return j;
}

ObservedStamp stamp_from_json(const json& j)
{
    const auto kind = get_as<std::string>(require(j, "kind"), "kind");
    if (kind == "value") {
        return ObservedStamp::value(get_tick(require(j, "tick"), "tick"));
    }
    if (kind == "empty") {
        return ObservedStamp::empty();
    }
    if (kind == "missing") {
        return ObservedStamp::missing();
    }
    throw ParseError("unknown stamp kind \"" + kind + "\"");
}

json dataset_to_json(const Dataset& dataset)
{
    json binaries = json::array();
    for (const auto& b : dataset.binaries()) {
        binaries.push_back({
            {"id", b.id},
            {"features", b.features},
            {"stamp", stamp_to_json(b.stamp)},
            {"first_seen", b.first_seen ? json(*b.first_seen) : json(nullptr)},
        });
    }
    return {
        {"window", {{"t_min", dataset.window().t_min}, {"t_max", dataset.window().t_max}}},
        {"binaries", std::move(binaries)},
    };
}

Dataset dataset_from_json(const json& j)
{
    const auto& w = require(j, "window");
    const Window window{get_tick(require(w, "t_min"), "t_min"), get_tick(require(w, "t_max"), "t_max")};

    const auto& list = require(j, "binaries");
    if (!list.is_array()) {
        throw ParseError("\"binaries\" must be an array");
    }
    std::vector<BinaryRecord> binaries;
    binaries.reserve(list.size());
    for (const auto& item : list) {
        BinaryRecord b;
        b.id = get_as<std::string>(require(item, "id"), "id");
        const auto& features = require(item, "features");
        if (!features.is_array()) {
            throw ParseError("\"features\" must be an array");
        }
        for (const auto& f : features) {
            if (!f.is_number_unsigned() && !(f.is_number_integer() && f.get<std::int64_t>() >= 0)) {
                throw ParseError("feature tokens must be unsigned 64-bit integers");
            }
            b.features.push_back(f.get<FeatureToken>());
        }
        b.stamp = stamp_from_json(require(item, "stamp"));
        if (const auto it = item.find("first_seen"); it != item.end() && !it->is_null()) {
            b.first_seen = get_tick(*it, "first_seen");
        }
        binaries.push_back(std::move(b));
    }
    return Dataset(std::move(binaries), window);
}

json lineage_to_json(const LineageDocument& doc)
{
    auto g = doc.graph;
    g.canonicalize();
    json edges = json::array();
    for (const auto& e : g.edges) {
        edges.push_back(json::array({e.parent, e.child}));
    }
    json j = {
        {"nodes", g.nodes},
        {"roots", g.roots},
        {"edges", std::move(edges)},
    };
    if (doc.times) {
        json t = json::object();
        for (const auto& [id, tick] : *doc.times) {
            t[id] = tick;
        }
        j["times"] = std::move(t);
    }
    if (doc.log_score) {
        j["log_score"] = *doc.log_score;
    }
    return j;
}

LineageDocument lineage_from_json(const json& j)
{
    LineageDocument doc;
    doc.graph.nodes = get_as<std::vector<std::string>>(require(j, "nodes"), "nodes");
    doc.graph.roots = get_as<std::vector<std::string>>(require(j, "roots"), "roots");
    const auto& edges = require(j, "edges");
    if (!edges.is_array()) {
        throw ParseError("\"edges\" must be an array");
    }
    for (const auto& e : edges) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
            throw ParseError("each edge must be a [parent, child] pair of ids");
        }
        doc.graph.edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    doc.graph.canonicalize();
    if (const auto it = j.find("times"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) {
            throw ParseError("\"times\" must be an object");
        }
        TimesMap times;
        for (const auto& [id, tick] : it->items()) {
            times.emplace(id, get_tick(tick, "times"));
        }
        doc.times = std::move(times);
    }
    if (const auto it = j.find("log_score"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) {
            throw ParseError("\"log_score\" must be a number");
        }
        doc.log_score = it->get<double>();
    }
    return doc;
}

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::string& text, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out.flush()) {
        throw IoError("write failed for " + path.string());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path)
{
    write_text_file(j.dump(2) + "\n", path);
}

Dataset load_dataset(const std::filesystem::path& path)
{
    return dataset_from_json(read_json_file(path));
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path)
{
    write_json_file(dataset_to_json(dataset), path);
}

LineageDocument load_lineage(const std::filesystem::path& path)
{
    return lineage_from_json(read_json_file(path));
}

void save_lineage(const LineageDocument& doc, const std::filesystem::path& path)
{
    if (auto v = structural_violations(doc.graph); !v.empty()) {
        throw InvalidLineage("refusing to save lineage: " + std::string(to_string(v.front().kind)) + " " +
                             v.front().first);
    }
    write_json_file(lineage_to_json(doc), path);
}

void save_lineage(const LineageGraph& lineage, const std::filesystem::path& path)
{
    save_lineage(LineageDocument{lineage, std::nullopt, std::nullopt}, path);
}

std::string export_dot(const LineageGraph& lineage, const std::optional<TimesMap>& times)
{
    auto nodes = lineage.nodes;
    std::sort(nodes.begin(), nodes.end());
    auto edges = lineage.edges;
    std::sort(edges.begin(), edges.end());

    std::ostringstream out;
    out << "digraph lineage {\n";
    out << "  rankdir=\"TB\";\n";
    out << "  node [shape=box];\n";
    for (const auto& n : nodes) {
        out << "  " << dot_quote(n) << " [label=\"" << dot_escape(n);
        if (times) {
            if (const auto it = times->find(n); it != times->end()) {
                out << "\\nt=" << it->second;
            }
        }
        out << "\"];\n";
    }
    for (const auto& e : edges) {
        out << "  " << dot_quote(e.parent) << " -> " << dot_quote(e.child) << ";\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace mallineage
