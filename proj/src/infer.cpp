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

#include "mallineage/infer.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "mallineage/errors.hpp"
#include "mallineage/parallel.hpp"
#include "mallineage/random.hpp"

namespace mallineage {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Stream tags keep posterior sampling and restarts on unrelated seeds.
constexpr std::uint64_t kPosteriorStream = 0x706f7374;
constexpr std::uint64_t kRestartStream = 0x72737472;

RestartSummary run_restart(std::size_t r, const Dataset& dataset, const SimilarityMatrix& sim,
                           const std::vector<TimePosterior>& posteriors, const TimeModelParams& time_params,
                           const LineageModelParams& lineage_params, const InferConfig& config,
                           std::vector<TimeTick>& times, ParentSets& parents)
{
    RestartSummary summary;
    summary.seed = derive_seed(config.seed, kRestartStream, r);
    Rng rng(summary.seed);

    const auto n = dataset.size();
    times.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        TimeTick t = sample_time(posteriors[i], rng);
        for (int attempt = 1; attempt < 100 && evidence_log_likelihood(t, dataset[i], time_params) == kNegInf;
             ++attempt) {
            t = sample_time(posteriors[i], rng);
        }
        if (evidence_log_likelihood(t, dataset[i], time_params) == kNegInf) {
            t = posteriors[i].mode();
        }
        times[i] = t;
    }

    parents.assign(n, {});
    double score = joint_log_score(parents, times, dataset, sim, time_params, lineage_params);
    if (score == kNegInf) {
        throw InfeasibleSkeleton("sampled creation times have zero probability");
    }

    for (std::size_t round = 0; round < config.max_rounds; ++round) {
        const auto lineage_seed = derive_seed(summary.seed, 2 * round + 1);
        const auto times_seed = derive_seed(summary.seed, 2 * round + 2);

        parents = anneal_lineage(times, sim, lineage_params, config.anneal, lineage_seed, &parents);
        auto step = anneal_times(parents, times, dataset, sim, time_params, lineage_params, config.anneal, times_seed);

        const double improvement = step.joint_log_score - score;
        times = std::move(step.times);
        parents = std::move(step.parents);
        score = step.joint_log_score;
        summary.round_scores.push_back(score);
        summary.iterations = round + 1;
        if (improvement < config.epsilon) {
            break;
        }
    }
    summary.final_score = score;
    return summary;
}

} // namespace

void InferConfig::validate() const
{
    if (restarts < 1) {
        throw ConfigError("restarts must be at least 1");
    }
    if (max_rounds < 1) {
        throw ConfigError("max_rounds must be at least 1");
    }
    if (!(epsilon >= 0.0)) {
        throw ConfigError("epsilon must be non-negative");
    }
    if (time_inference == TimeInference::Mh && mh_samples < 1) {
        throw ConfigError("mh_samples must be positive");
    }
    anneal.validate();
}

nlohmann::json infer_config_to_json(const InferConfig& config)
{
    return {
        {"restarts", config.restarts},
        {"max_rounds", config.max_rounds},
        {"epsilon", config.epsilon},
        {"anneal", {{"t0", config.anneal.t0}, {"alpha", config.anneal.alpha}, {"iters", config.anneal.iters}}},
        {"time_inference", config.time_inference == TimeInference::Exact ? "exact" : "mh"},
        {"mh_samples", config.mh_samples},
        {"seed", config.seed},
    };
}

InferConfig infer_config_from_json(const nlohmann::json& j)
{
    InferConfig c;
    if (!j.is_object()) {
        throw ParseError("infer config must be a JSON object");
    }
    try {
        c.restarts = j.value("restarts", c.restarts);
        c.max_rounds = j.value("max_rounds", c.max_rounds);
        c.epsilon = j.value("epsilon", c.epsilon);
        if (const auto it = j.find("anneal"); it != j.end()) {
            c.anneal.t0 = it->value("t0", c.anneal.t0);
            c.anneal.alpha = it->value("alpha", c.anneal.alpha);
            c.anneal.iters = it->value("iters", c.anneal.iters);
        }
        const auto mode = j.value("time_inference", std::string("exact"));
        if (mode == "exact") {
            c.time_inference = TimeInference::Exact;
        } else if (mode == "mh") {
            c.time_inference = TimeInference::Mh;
        } else {
            throw ConfigError("time_inference must be \"exact\" or \"mh\"");
        }
        c.mh_samples = j.value("mh_samples", c.mh_samples);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("infer config: ") + e.what());
    }
    c.validate();
    return c;
}

std::vector<TimePosterior> time_posteriors(const Dataset& dataset, const TimeModelParams& params,
                                           const InferConfig& config)
{
    std::vector<std::optional<TimePosterior>> slots(dataset.size());
    parallel_for(dataset.size(), config.threads, [&](std::size_t i) {
        if (config.time_inference == TimeInference::Mh) {
            slots[i] = mh_posterior(dataset[i], params, config.mh_samples, config.mh_samples / 10,
                                    derive_seed(config.seed, kPosteriorStream, i));
        } else {
            slots[i] = exact_posterior(dataset[i], params);
        }
    });
    std::vector<TimePosterior> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

LineageResult infer_lineage(const Dataset& dataset, const SimilarityMatrix& sim,
                            const std::vector<TimePosterior>& posteriors, const TimeModelParams& time_params,
                            const LineageModelParams& lineage_params, const InferConfig& config)
{
    config.validate();
    time_params.validate();
    lineage_params.validate();

    struct Outcome {
        RestartSummary summary;
        std::vector<TimeTick> times;
        ParentSets parents;
    };
    std::vector<Outcome> outcomes(config.restarts);
    parallel_for(config.restarts, config.threads, [&](std::size_t r) {
        auto& o = outcomes[r];
        o.summary = run_restart(r, dataset, sim, posteriors, time_params, lineage_params, config, o.times, o.parents);
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r) {
        if (outcomes[r].summary.final_score > outcomes[best].summary.final_score) {
            best = r;
        }
    }

    LineageResult result;
    result.lineage = LineageGraph::from_parents(dataset.ids(), outcomes[best].parents);
    result.times = times_map(dataset, outcomes[best].times);
    result.joint_log_score = outcomes[best].summary.final_score;
    for (auto& o : outcomes) {
        result.restarts.push_back(std::move(o.summary));
    }
    return result;
}

LineageResult infer_lineage(const Dataset& dataset, const TimeModelParams& time_params,
                            const LineageModelParams& lineage_params, const InferConfig& config)
{
    const auto sim = similarity_matrix(dataset);
    const auto posteriors = time_posteriors(dataset, time_params, config);
    return infer_lineage(dataset, sim, posteriors, time_params, lineage_params, config);
}

} // namespace mallineage
