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

#ifndef MALLINEAGE_INFER_HPP
#define MALLINEAGE_INFER_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "mallineage/domain.hpp"
#include "mallineage/lineage.hpp"
#include "mallineage/similarity.hpp"
#include "mallineage/timemodel.hpp"

namespace mallineage {

enum class TimeInference { Exact, Mh };

struct InferConfig {
    std::size_t restarts = 16;
    std::size_t max_rounds = 20;
    double epsilon = 1e-6;
    AnnealSchedule anneal;
    TimeInference time_inference = TimeInference::Exact;
    std::size_t mh_samples = 50000;
    std::uint64_t seed = 0;
    /// Worker cap for restarts; 0 uses every hardware thread. Not serialized.
    std::size_t threads = 0;

    void validate() const;
};

nlohmann::json infer_config_to_json(const InferConfig& config);
/// Missing keys keep their defaults. Throws ParseError / ConfigError.
InferConfig infer_config_from_json(const nlohmann::json& j);

struct RestartSummary {
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    double final_score = 0.0;
    /// Joint score after each round; non-decreasing.
    std::vector<double> round_scores;
};

struct LineageResult {
    LineageGraph lineage;
    TimesMap times;
    double joint_log_score = 0.0;
    std::vector<RestartSummary> restarts;
};

/// Lineage-free creation-time posteriors for every binary, exact or MCMC per
/// the config. MCMC uses mh_samples / 10 burn-in steps and a per-binary seed.
std::vector<TimePosterior> time_posteriors(const Dataset& dataset, const TimeModelParams& params,
                                           const InferConfig& config);

/// Joint MAP search over lineage and creation times.
///
/// Each restart samples creation times from the posteriors, then alternates
/// lineage annealing at fixed times with time annealing over the fixed
/// skeleton until a round improves the joint score by less than epsilon or
/// max_rounds is reached. Every half-step starts from the incumbent, so the
/// score never decreases within a restart. The best restart wins, ties going
/// to the lowest index. Restart r draws from its own derived stream
/// regardless of how many restarts run.
LineageResult infer_lineage(const Dataset& dataset, const TimeModelParams& time_params,
                            const LineageModelParams& lineage_params, const InferConfig& config);

/// Same, with posteriors and similarities supplied by the caller.
LineageResult infer_lineage(const Dataset& dataset, const SimilarityMatrix& sim,
                            const std::vector<TimePosterior>& posteriors, const TimeModelParams& time_params,
                            const LineageModelParams& lineage_params, const InferConfig& config);

} // namespace mallineage

#endif
