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

#ifndef MALLINEAGE_LINEAGE_HPP
#define MALLINEAGE_LINEAGE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mallineage/domain.hpp"
#include "mallineage/similarity.hpp"
#include "mallineage/timemodel.hpp"

namespace mallineage {

/// Parameters of the lineage model.
///
/// A binary with no earlier binaries is a root with probability 1. Otherwise
/// it is a root with probability p_root; if not, it draws k parents with
/// P(k) ∝ p_k (1 - p_k)^(k-1) on {1..min(k_max, |C|)}, then a k-subset S of
/// its candidates C with probability ∝ Π_{j∈S} exp(lambda · sim(child, j)).
struct LineageModelParams {
    double p_root = 0.1;
    double p_k = 0.5;
    std::size_t k_max = 3;
    double lambda = 10.0;

    /// Throws ConfigError.
    void validate() const;
};

nlohmann::json lineage_params_to_json(const LineageModelParams& params);
LineageModelParams lineage_params_from_json(const nlohmann::json& j);

/// Geometric cooling: temperature at iteration k is t0 · alpha^k.
struct AnnealSchedule {
    double t0 = 5.0;
    double alpha = 0.995;
    std::size_t iters = 10000;

    void validate() const;
};

/// Per-node parent index lists, each sorted ascending. Node order is dataset order.
using ParentSets = std::vector<std::vector<std::size_t>>;

/// Creation ticks in dataset order. Throws UnknownId when a binary is missing.
std::vector<TimeTick> times_vector(const Dataset& dataset, const TimesMap& times);
TimesMap times_map(const Dataset& dataset, std::span<const TimeTick> times);

/// log e_0 .. log e_{k_max} of the elementary symmetric polynomials of
/// exp(log_weights). Entries beyond the number of weights are -inf.
std::vector<double> log_elementary_symmetric(std::span<const double> log_weights, std::size_t k_max);

/// Binaries strictly earlier than `child`, ascending index.
std::vector<std::size_t> candidate_parents(std::span<const TimeTick> times, std::size_t child);
/// Id form. Throws UnknownId.
std::vector<std::string> candidate_parents(const Dataset& dataset, const TimesMap& times, std::string_view child);

/// log P(parents of `child` | times, features). `parents` must be sorted.
/// Throws InvalidParentSet.
double parent_set_log_prob(std::size_t child, std::span<const std::size_t> parents, std::span<const TimeTick> times,
                           const SimilarityMatrix& sim, const LineageModelParams& params);
double parent_set_log_prob(const Dataset& dataset, std::string_view child, const std::vector<std::string>& parents,
                           const TimesMap& times, const SimilarityMatrix& sim, const LineageModelParams& params);

/// Scores every parent set of one child at fixed times. Construction is
/// O(|C| · k_max); each score() call is O(k).
class ChildScorer {
public:
    ChildScorer(std::size_t child, std::span<const TimeTick> times, const SimilarityMatrix& sim,
                const LineageModelParams& params);

    [[nodiscard]] std::size_t child() const noexcept { return child_; }
    [[nodiscard]] const std::vector<std::size_t>& candidates() const noexcept { return candidates_; }
    /// min(k_max, |C|).
    [[nodiscard]] std::size_t max_parents() const noexcept { return max_parents_; }
    /// Assumes `parents` is a valid parent set; no checks.
    [[nodiscard]] double score(std::span<const std::size_t> parents) const noexcept;

private:
    std::size_t child_;
    std::vector<std::size_t> candidates_;
    std::size_t max_parents_ = 0;
    double log_root_ = 0.0;
    double log_not_root_ = 0.0;
    std::vector<double> log_count_prior_;   // index k
    std::vector<double> log_normalizer_;    // index k
    std::vector<double> log_weight_;        // by node index
};

/// Sum of parent_set_log_prob over all nodes. Throws InvalidParentSet.
double lineage_log_score(const ParentSets& parents, std::span<const TimeTick> times, const SimilarityMatrix& sim,
                         const LineageModelParams& params);
/// Throws InvalidLineage when the lineage fails validate_lineage.
double lineage_log_score(const LineageGraph& lineage, const Dataset& dataset, const TimesMap& times,
                         const SimilarityMatrix& sim, const LineageModelParams& params);

/// Time evidence of every binary plus the lineage score. The uniform time
/// prior is a constant and is left out.
double joint_log_score(const ParentSets& parents, std::span<const TimeTick> times, const Dataset& dataset,
                       const SimilarityMatrix& sim, const TimeModelParams& time_params,
                       const LineageModelParams& lineage_params);
double joint_log_score(const LineageGraph& lineage, const TimesMap& times, const Dataset& dataset,
                       const SimilarityMatrix& sim, const TimeModelParams& time_params,
                       const LineageModelParams& lineage_params);

/// Simulated annealing over per-child parent sets at fixed times.
///
/// Each iteration picks a child with at least one candidate uniformly and one
/// of four moves uniformly: toggle root, add a parent, remove a parent, swap a
/// parent for a non-parent candidate. Inapplicable moves are skipped. The
/// Metropolis test uses lineage_log_score at temperature t0 · alpha^k. The
/// best state seen is returned; `initial` defaults to all roots.
ParentSets anneal_lineage(std::span<const TimeTick> times, const SimilarityMatrix& sim,
                          const LineageModelParams& params, const AnnealSchedule& schedule, std::uint64_t seed,
                          const ParentSets* initial = nullptr);
LineageGraph max_lineage_given_times(const TimesMap& times, const Dataset& dataset, const SimilarityMatrix& sim,
                                     const LineageModelParams& params, const AnnealSchedule& schedule,
                                     std::uint64_t seed);

/// Exhaustive argmax of lineage_log_score. Ties go to the lexicographically
/// smallest (parent id, child id) edge list. Throws TooLarge unless N <= 8
/// and k_max <= 2.
ParentSets brute_force_parents(std::span<const TimeTick> times, const Dataset& dataset, const SimilarityMatrix& sim,
                               const LineageModelParams& params);
LineageGraph brute_force_lineage(const TimesMap& times, const Dataset& dataset, const SimilarityMatrix& sim,
                                 const LineageModelParams& params);

/// Directs every skeleton edge from its earlier to its later endpoint.
/// Returns nullopt when an edge joins two equal ticks or a node ends up with
/// more than k_max parents.
std::optional<ParentSets> direct_skeleton(std::span<const std::pair<std::size_t, std::size_t>> skeleton,
                                          std::span<const TimeTick> times, std::size_t k_max);

struct SkeletonResult {
    std::vector<TimeTick> times;
    ParentSets parents;
    double joint_log_score = 0.0;
};

/// Simulated annealing over creation times with the undirected edge set of
/// `parents` held fixed. A move shifts one binary by a uniform step in
/// {-14..14}, clipped to the window; edges are re-directed by the new times
/// and infeasible re-directions score -inf. Starts from `initial_times` and
/// returns the best state seen. Throws InfeasibleSkeleton when the starting
/// state itself has zero probability.
SkeletonResult anneal_times(const ParentSets& parents, std::span<const TimeTick> initial_times, const Dataset& dataset,
                            const SimilarityMatrix& sim, const TimeModelParams& time_params,
                            const LineageModelParams& lineage_params, const AnnealSchedule& schedule,
                            std::uint64_t seed);
std::pair<TimesMap, LineageGraph> max_times_given_skeleton(const LineageGraph& lineage, const TimesMap& initial_times,
                                                           const Dataset& dataset, const SimilarityMatrix& sim,
                                                           const TimeModelParams& time_params,
                                                           const LineageModelParams& lineage_params,
                                                           const AnnealSchedule& schedule, std::uint64_t seed);

/// Metropolis estimate of each binary's expected creation time given the
/// directed lineage `parents` and the time evidence. Every edge keeps its
/// direction; single-site moves use the same reflected {-7..-1, 1..7} walk as
/// mh_posterior. Runs sweeps / 10 burn-in sweeps of N moves each, then
/// averages the state after each of `sweeps` sweeps. `start` must be feasible.
std::vector<double> conditional_time_means(const ParentSets& parents, std::span<const TimeTick> start,
                                           const Dataset& dataset, const SimilarityMatrix& sim,
                                           const TimeModelParams& time_params,
                                           const LineageModelParams& lineage_params, std::size_t sweeps,
                                           std::uint64_t seed);

} // namespace mallineage

#endif
