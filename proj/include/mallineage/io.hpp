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

#ifndef MALLINEAGE_IO_HPP
#define MALLINEAGE_IO_HPP

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mallineage/domain.hpp"

namespace mallineage {

using json = nlohmann::json;

/// Lineage file contents: the graph plus the optional annotations written by
/// inference.
struct LineageDocument {
    LineageGraph graph;
    std::optional<TimesMap> times;
    std::optional<double> log_score;

    friend bool operator==(const LineageDocument&, const LineageDocument&) = default;
};

json dataset_to_json(const Dataset& dataset);
/// Throws ParseError on schema problems, ValidationError on invariant violations.
Dataset dataset_from_json(const json& j);

json stamp_to_json(const ObservedStamp& stamp);
ObservedStamp stamp_from_json(const json& j);

json lineage_to_json(const LineageDocument& doc);
LineageDocument lineage_from_json(const json& j);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

LineageDocument load_lineage(const std::filesystem::path& path);
void save_lineage(const LineageGraph& lineage, const std::filesystem::path& path);
void save_lineage(const LineageDocument& doc, const std::filesystem::path& path);

/// Graphviz digraph. Nodes are emitted in lexicographic id order, labelled
/// with the id and, when given, the tick; edges follow in sorted order.
std::string export_dot(const LineageGraph& lineage, const std::optional<TimesMap>& times = std::nullopt);

/// Reads and parses a JSON file. Throws IoError / ParseError.
json read_json_file(const std::filesystem::path& path);
/// Writes `j` pretty-printed with a trailing newline. Throws IoError.
void write_json_file(const json& j, const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

} // namespace mallineage

#endif
