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

#ifndef MALLINEAGE_SYNTHGEN_HPP
#define MALLINEAGE_SYNTHGEN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "mallineage/domain.hpp"
#include "mallineage/random.hpp"
#include "mallineage/timemodel.hpp"

namespace mallineage {

/// Knobs of the synthetic family generator.
struct GenConfig {
    std::size_t n_binaries = 30;
    Window window{0, 1000};
    double p_multi_root = 0.1;
    double p_second_parent = 0.2;
    std::size_t feature_pool = 5000;
    /// Size of the feature set a fresh root draws from the pool.
    std::size_t features_per_root = 100;
    double mutation_rate = 0.1;
    double obf_fraction = 0.0;
    double p_empty = 0.5;
    double p_lag = 0.25;
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;
};

nlohmann::json gen_config_to_json(const GenConfig& config);
/// Missing keys keep their defaults.
GenConfig gen_config_from_json(const nlohmann::json& j);

struct SyntheticFamily {
    Dataset dataset;
    LineageGraph truth;
    TimesMap times;
    std::vector<LabeledTimeExample> labels; // dataset order
};

/// Builds a family with known lineage, times and obfuscation labels.
///
/// Ticks are sorted uniform draws nudged apart to be distinct. Binary 0 is a
/// root; each later binary starts a new root with probability p_multi_root,
/// otherwise it copies the features of a uniformly chosen earlier binary (and
/// of a second one with probability p_second_parent) and replaces a
/// mutation_rate fraction of them with fresh pool features. Stamps are then
/// obfuscated at obf_fraction and first sightings trail creation by a
/// Geometric(p_lag) lag, clipped to the window. Ids are assigned in a
/// shuffled order so that they carry no time information.
SyntheticFamily generate_family(const GenConfig& config);

struct ObfuscationRecord {
    std::size_t index;
    ObfuscationKind kind;
};

/// Replaces the stamps of exactly round(fraction · N) uniformly chosen
/// binaries: Empty with probability p_empty, otherwise a uniform tick from the
/// window. `record`, when given, receives the touched indices.
Dataset apply_obfuscation(const Dataset& dataset, double fraction, double p_empty, Rng& rng,
                          std::vector<ObfuscationRecord>* record = nullptr);

} // namespace mallineage

#endif
