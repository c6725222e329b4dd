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

#include <algorithm>
#include <cmath>
#include <limits>

#include "mallineage/errors.hpp"
#include "mallineage/lineage.hpp"
#include "mallineage/random.hpp"

namespace mallineage {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency skeleton_adjacency(const ParentSets& parents)
{
    Adjacency adj(parents.size());
    for (std::size_t c = 0; c < parents.size(); ++c) {
        for (auto p : parents[c]) {
            adj[c].push_back(p);
            adj[p].push_back(c);
        }
    }
    return adj;
}

// Lineage term of node i with its skeleton edges directed by `times`.
// Directing by strict time order never creates a cycle, so only ties and
// the parent cap can make a state infeasible.
double directed_term(std::size_t i, std::span<const TimeTick> times, const Adjacency& adj, const SimilarityMatrix& sim,
                     const LineageModelParams& params, std::vector<std::size_t>& scratch)
{
    scratch.clear();
    for (auto j : adj[i]) {
        if (times[j] == times[i]) {
            return kNegInf;
        }
        if (times[j] < times[i]) {
            scratch.push_back(j);
        }
    }
    if (scratch.size() > params.k_max) {
        return kNegInf;
    }
    std::sort(scratch.begin(), scratch.end());
    return ChildScorer(i, times, sim, params).score(scratch);
}

} // namespace

std::optional<ParentSets> direct_skeleton(std::span<const std::pair<std::size_t, std::size_t>> skeleton,
                                          std::span<const TimeTick> times, std::size_t k_max)
{
    ParentSets parents(times.size());
    for (auto [a, b] : skeleton) {
        if (times[a] == times[b]) {
            return std::nullopt;
        }
        if (times[a] < times[b]) {
            parents[b].push_back(a);
        } else {
            parents[a].push_back(b);
        }
    }
    for (auto& p : parents) {
        if (p.size() > k_max) {
            return std::nullopt;
        }
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
    return parents;
}

SkeletonResult anneal_times(const ParentSets& parents, std::span<const TimeTick> initial_times, const Dataset& dataset,
                            const SimilarityMatrix& sim, const TimeModelParams& time_params,
                            const LineageModelParams& lineage_params, const AnnealSchedule& schedule,
                            std::uint64_t seed)
{
    const auto n = dataset.size();
    if (parents.size() != n || initial_times.size() != n) {
        throw InfeasibleSkeleton("skeleton and times must cover every binary");
    }
    const auto adj = skeleton_adjacency(parents);
    const auto& window = time_params.window;
    std::vector<TimeTick> times(initial_times.begin(), initial_times.end());
    for (auto t : times) {
        if (!window.contains(t)) {
            throw InfeasibleSkeleton("initial time " + std::to_string(t) + " lies outside the window");
        }
    }

    std::vector<std::size_t> scratch;
    std::vector<double> evidence(n);
    std::vector<double> structure(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        evidence[i] = evidence_log_likelihood(times[i], dataset[i], time_params);
        structure[i] = directed_term(i, times, adj, sim, lineage_params, scratch);
        total += evidence[i] + structure[i];
    }
    if (total == kNegInf || std::isnan(total)) {
        throw InfeasibleSkeleton("starting times give the skeleton zero probability");
    }

    std::vector<TimeTick> best_times = times;
    double best_score = total;

    Rng rng(seed);
    std::vector<std::size_t> affected;
    std::vector<double> new_structure;
    double temperature = schedule.t0;
    for (std::size_t it = 0; it < schedule.iters; ++it, temperature *= schedule.alpha) {
        const auto i = static_cast<std::size_t>(uniform_below(rng, n));
        const TimeTick old_t = times[i];
        const TimeTick new_t = window.clamp(old_t + uniform_int(rng, -14, 14));
        if (new_t == old_t) {
            continue;
        }
        const TimeTick lo = std::min(old_t, new_t);
        const TimeTick hi = std::max(old_t, new_t);

        affected.clear();
        affected.push_back(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && times[j] >= lo && times[j] <= hi) {
                affected.push_back(j);
            }
        }

        const double new_evidence = evidence_log_likelihood(new_t, dataset[i], time_params);
        double delta = new_evidence - evidence[i];
        if (new_evidence == kNegInf) {
            continue;
        }
        times[i] = new_t;
        new_structure.clear();
        for (auto j : affected) {
            const double s = directed_term(j, times, adj, sim, lineage_params, scratch);
            new_structure.push_back(s);
            delta += s - structure[j];
        }
        if (delta == kNegInf || std::isnan(delta)) {
            times[i] = old_t;
            continue;
        }
        if (delta >= 0.0 || uniform01(rng) < std::exp(delta / temperature)) {
            evidence[i] = new_evidence;
            for (std::size_t k = 0; k < affected.size(); ++k) {
                structure[affected[k]] = new_structure[k];
            }
            total += delta;
            if (total > best_score + 1e-12) {
                best_times = times;
                best_score = total;
            }
        } else {
            times[i] = old_t;
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> skeleton;
    for (std::size_t c = 0; c < n; ++c) {
        for (auto p : parents[c]) {
            skeleton.emplace_back(p, c);
        }
    }
    auto directed = direct_skeleton(skeleton, best_times, lineage_params.k_max);
    SkeletonResult result;
    result.parents = std::move(*directed);
    result.joint_log_score = joint_log_score(result.parents, best_times, dataset, sim, time_params, lineage_params);
    result.times = std::move(best_times);
    return result;
}

std::pair<TimesMap, LineageGraph> max_times_given_skeleton(const LineageGraph& lineage, const TimesMap& initial_times,
                                                           const Dataset& dataset, const SimilarityMatrix& sim,
                                                           const TimeModelParams& time_params,
                                                           const LineageModelParams& lineage_params,
                                                           const AnnealSchedule& schedule, std::uint64_t seed)
{
    const auto t = times_vector(dataset, initial_times);
    ParentSets parents(dataset.size());
    for (const auto& e : lineage.edges) {
        parents[dataset.require_index(e.child)].push_back(dataset.require_index(e.parent));
    }
    for (auto& p : parents) {
        std::sort(p.begin(), p.end());
    }
    auto result = anneal_times(parents, t, dataset, sim, time_params, lineage_params, schedule, seed);
    return {times_map(dataset, result.times), LineageGraph::from_parents(dataset.ids(), result.parents)};
}

std::vector<double> conditional_time_means(const ParentSets& parents, std::span<const TimeTick> start,
                                           const Dataset& dataset, const SimilarityMatrix& sim,
                                           const TimeModelParams& time_params,
                                           const LineageModelParams& lineage_params, std::size_t sweeps,
                                           std::uint64_t seed)
{
    const auto n = dataset.size();
    const auto& window = time_params.window;
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (auto p : parents[c]) {
            children[p].push_back(c);
        }
    }
    std::vector<TimeTick> times(start.begin(), start.end());
    std::vector<double> evidence(n);
    std::vector<double> structure(n);
    for (std::size_t i = 0; i < n; ++i) {
        evidence[i] = evidence_log_likelihood(times[i], dataset[i], time_params);
        structure[i] = ChildScorer(i, times, sim, lineage_params).score(parents[i]);
        if (evidence[i] == kNegInf || structure[i] == kNegInf) {
            throw InfeasibleSkeleton("starting times are not feasible for the lineage");
        }
    }
    auto reflect = [&](TimeTick t) {
        while (!window.contains(t)) {
            t = t < window.t_min ? 2 * window.t_min - 1 - t : 2 * window.t_max + 1 - t;
        }
        return t;
    };

    Rng rng(seed);
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> affected;
    std::vector<double> new_structure;
    const std::size_t burn = sweeps / 10;
    std::size_t kept = 0;
    for (std::size_t sweep = 0; sweep < burn + sweeps; ++sweep) {
        for (std::size_t step = 0; step < n; ++step) {
            const auto i = static_cast<std::size_t>(uniform_below(rng, n));
            auto delta_t = uniform_int(rng, -7, 6);
            if (delta_t >= 0) {
                ++delta_t;
            }
            const TimeTick old_t = times[i];
            const TimeTick new_t = reflect(old_t + delta_t);
            bool ordered = true;
            for (auto p : parents[i]) {
                ordered = ordered && times[p] < new_t;
            }
            for (auto c : children[i]) {
                ordered = ordered && new_t < times[c];
            }
            if (!ordered) {
                continue;
            }
            const double new_evidence = evidence_log_likelihood(new_t, dataset[i], time_params);
            if (new_evidence == kNegInf) {
                continue;
            }
            const TimeTick lo = std::min(old_t, new_t);
            const TimeTick hi = std::max(old_t, new_t);
            affected.clear();
            affected.push_back(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i && times[j] >= lo && times[j] <= hi) {
                    affected.push_back(j);
                }
            }
            times[i] = new_t;
            double delta = new_evidence - evidence[i];
            new_structure.clear();
            for (auto j : affected) {
                const double s = ChildScorer(j, times, sim, lineage_params).score(parents[j]);
                new_structure.push_back(s);
                delta += s - structure[j];
            }
            if (delta >= 0.0 || std::log(uniform01(rng)) < delta) {
                evidence[i] = new_evidence;
                for (std::size_t k = 0; k < affected.size(); ++k) {
                    structure[affected[k]] = new_structure[k];
                }
            } else {
                times[i] = old_t;
            }
        }
        if (sweep >= burn) {
            ++kept;
            for (std::size_t i = 0; i < n; ++i) {
                sums[i] += static_cast<double>(times[i]);
            }
        }
    }
    for (auto& s : sums) {
        s /= static_cast<double>(kept);
    }
    return sums;
}

} // namespace mallineage
