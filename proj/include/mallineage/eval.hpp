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

#ifndef MALLINEAGE_EVAL_HPP
#define MALLINEAGE_EVAL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mallineage/domain.hpp"
#include "mallineage/infer.hpp"
#include "mallineage/lineage.hpp"
#include "mallineage/similarity.hpp"
#include "mallineage/synthgen.hpp"
#include "mallineage/timemodel.hpp"

namespace mallineage {

/// Accuracy of a predicted lineage against ground truth.
///
/// Edge precision with an empty prediction is defined as 1, so the metric is
/// total; recall with an empty truth is likewise 1. root_accuracy is the
/// fraction of true roots predicted as roots. ancestor_accuracy is the
/// fraction of ordered pairs (a, b), a != b, whose "a is an ancestor of b"
/// status agrees.
struct Metrics {
    double edge_precision = 0.0;
    double edge_recall = 0.0;
    double edge_f1 = 0.0;
    double root_accuracy = 0.0;
    double ancestor_accuracy = 0.0;
    std::optional<double> mean_abs_time_error;
};

nlohmann::json metrics_to_json(const Metrics& m);

/// Harmonic mean, 0 when both inputs are 0.
double f1_score(double precision, double recall) noexcept;

/// Graph metrics. Throws NodeSetMismatch unless both graphs have the same nodes.
Metrics score_lineage(const LineageGraph& pred, const LineageGraph& truth);

/// Mean |estimate - truth| over binaries. Throws IdMismatch.
double time_error(const TimesMap& pred, const TimesMap& truth);
/// Posterior-mean form; posteriors are in dataset order.
double time_error(const Dataset& dataset, std::span<const TimePosterior> posteriors, const TimesMap& truth);

/// Reference non-joint method: every binary takes its single most similar
/// strictly earlier binary (by posterior-mean time) as parent; binaries with
/// nothing earlier are roots. Similarity ties go to the lowest index.
LineageGraph greedy_baseline(const Dataset& dataset, const SimilarityMatrix& sim,
                             std::span<const TimePosterior> posteriors);

struct SweepRow {
    double level = 0.0;
    std::size_t rep = 0;
    double pre_time_err = 0.0;
    double post_time_err = 0.0;
    double delta = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double root_acc = 0.0;
    double ancestor_acc = 0.0;
    double joint_log_score = 0.0;
    double seconds = 0.0;
    /// Greedy baseline edge F1 on the same family; summary only.
    double baseline_f1 = 0.0;
    /// Error of the joint MAP times; summary only.
    double map_time_err = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows; // sorted by (level, rep)
};

struct SweepOptions {
    /// Worker cap across sweep cells; 0 uses every hardware thread.
    std::size_t threads = 0;
    /// Fill the seconds column with wall time. Off by default so that
    /// repeated runs produce identical files.
    bool record_timing = false;
    /// Sweeps of the lineage-conditioned time sampler per cell.
    std::size_t conditional_sweeps = 10000;
};

/// Obfuscation sweep: for each level and rep, generate a family with
/// obf_fraction = level and seed derive_seed(base.seed, level index, rep),
/// then compare lineage-free posterior-mean time error (pre) against the error
/// of the expected creation times given the inferred lineage (post, from
/// conditional_time_means started at the joint MAP times). The error of the
/// MAP times themselves is kept in map_time_err. Cells run in parallel;
/// restarts inside a cell run sequentially.
SweepReport obfuscation_sweep(const GenConfig& base, std::span<const double> levels,
                              const TimeModelParams& time_params, const LineageModelParams& lineage_params,
                              const InferConfig& infer_config, std::size_t reps, const SweepOptions& options = {});

std::string sweep_csv(const SweepReport& report);
/// Per-level mean and standard deviation of every numeric column, plus the
/// number of levels whose mean delta is >= 0.
nlohmann::json sweep_summary(const SweepReport& report);

} // namespace mallineage

#endif
