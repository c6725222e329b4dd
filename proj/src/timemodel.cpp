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

#include "mallineage/timemodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mallineage/errors.hpp"
#include "mallineage/io.hpp"

namespace mallineage {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x)
{
    return x > 0.0 ? std::log(x) : kNegInf;
}

void require_in_window(TimeTick t, const Window& w)
{
    if (!w.contains(t)) {
        throw OutOfWindow("tick " + std::to_string(t) + " outside window [" + std::to_string(w.t_min) + ", " +
                          std::to_string(w.t_max) + "]");
    }
}

bool is_probability(double p)
{
    return p >= 0.0 && p <= 1.0;
}

} // namespace

void TimeModelParams::validate() const
{
    if (!is_probability(p_obf) || !is_probability(p_empty)) {
        throw ConfigError("p_obf and p_empty must lie in [0, 1]");
    }
    if (!(p_lag > 0.0 && p_lag <= 1.0)) {
        throw ConfigError("p_lag must lie in (0, 1]");
    }
    if (window.t_min >= window.t_max) {
        throw ConfigError("time model window requires t_min < t_max");
    }
}

nlohmann::json params_to_json(const TimeModelParams& params)
{
    return {{"p_obf", params.p_obf}, {"p_empty", params.p_empty}, {"p_lag", params.p_lag}};
}

TimeModelParams params_from_json(const nlohmann::json& j, Window window)
{
    TimeModelParams p;
    try {
        p.p_obf = j.at("p_obf").get<double>();
        p.p_empty = j.at("p_empty").get<double>();
        p.p_lag = j.at("p_lag").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("time model params: ") + e.what());
    }
    p.window = window;
    p.validate();
    return p;
}

double stamp_log_likelihood(TimeTick t, const ObservedStamp& stamp, const TimeModelParams& params)
{
    require_in_window(t, params.window);
    switch (stamp.kind()) {
    case StampKind::Missing:
        return 0.0;
    case StampKind::Empty:
        return safe_log(params.p_obf * params.p_empty);
    case StampKind::Value: {
        const double random_branch =
            params.p_obf * (1.0 - params.p_empty) / static_cast<double>(params.window.size());
        if (stamp.tick() == t) {
            return safe_log((1.0 - params.p_obf) + random_branch);
        }
        return safe_log(random_branch);
    }
    }
    return kNegInf;
}

double seen_log_likelihood(TimeTick t, std::optional<TimeTick> seen, const TimeModelParams& params)
{
    require_in_window(t, params.window);
    if (!seen) {
        return 0.0;
    }
    if (*seen < t) {
        return kNegInf;
    }
    const auto lag = static_cast<double>(*seen - t);
    if (lag == 0.0) {
        return std::log(params.p_lag);
    }
    return std::log(params.p_lag) + lag * safe_log(1.0 - params.p_lag);
}

double evidence_log_likelihood(TimeTick t, const BinaryRecord& binary, const TimeModelParams& params)
{
    return stamp_log_likelihood(t, binary.stamp, params) + seen_log_likelihood(t, binary.first_seen, params);
}

TimePosterior::TimePosterior(Window window, std::vector<double> probs)
    : window_(window)
    , probs_(std::move(probs))
{
    if (static_cast<std::int64_t>(probs_.size()) != window_.size()) {
        throw ValidationError("posterior length does not match its window");
    }
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError("posterior entries must be finite and non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("posterior mass sums to " + std::to_string(total));
    }
}

double TimePosterior::probability(TimeTick t) const noexcept
{
    if (!window_.contains(t)) {
        return 0.0;
    }
    return probs_[static_cast<std::size_t>(t - window_.t_min)];
}

double TimePosterior::mean() const noexcept
{
    double m = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        m += probs_[k] * static_cast<double>(window_.t_min + static_cast<TimeTick>(k));
    }
    return m;
}

TimeTick TimePosterior::mode() const noexcept
{
    const auto it = std::max_element(probs_.begin(), probs_.end());
    return window_.t_min + static_cast<TimeTick>(it - probs_.begin());
}

double total_variation(const TimePosterior& a, const TimePosterior& b)
{
    if (!(a.window() == b.window())) {
        throw ValidationError("total variation needs posteriors over the same window");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < a.probs().size(); ++k) {
        d += std::abs(a.probs()[k] - b.probs()[k]);
    }
    return 0.5 * d;
}

TimePosterior exact_posterior(const BinaryRecord& binary, const TimeModelParams& params)
{
    const auto& w = params.window;
    std::vector<double> logp(static_cast<std::size_t>(w.size()));
    double best = kNegInf;
    for (TimeTick t = w.t_min; t <= w.t_max; ++t) {
        const double v = evidence_log_likelihood(t, binary, params);
        logp[static_cast<std::size_t>(t - w.t_min)] = v;
        best = std::max(best, v);
    }
    if (best == kNegInf) {
        throw DegenerateEvidence("binary \"" + binary.id + "\": evidence is impossible at every tick");
    }
    double total = 0.0;
    for (auto& v : logp) {
        v = std::exp(v - best);
        total += v;
    }
    for (auto& v : logp) {
        v /= total;
    }
    return TimePosterior(w, std::move(logp));
}

TimePosterior mh_posterior(const BinaryRecord& binary, const TimeModelParams& params, std::size_t n_samples,
                           std::size_t burn_in, std::uint64_t seed)
{
    if (n_samples == 0) {
        throw ConfigError("mh_posterior needs at least one sample");
    }
    const auto& w = params.window;
    auto log_target = [&](TimeTick t) { return evidence_log_likelihood(t, binary, params); };

    TimeTick current = w.t_min;
    double current_lp = kNegInf;
    for (TimeTick t = w.t_min; t <= w.t_max; ++t) {
        const double v = log_target(t);
        if (v > current_lp) {
            current = t;
            current_lp = v;
        }
    }
    if (current_lp == kNegInf) {
        throw DegenerateEvidence("binary \"" + binary.id + "\": evidence is impossible at every tick");
    }

    // Mirror about the half-tick just outside each bound so the proposal
    // stays symmetric next to the edges.
    auto reflect = [&](TimeTick t) {
        while (!w.contains(t)) {
            t = t < w.t_min ? 2 * w.t_min - 1 - t : 2 * w.t_max + 1 - t;
        }
        return t;
    };

    Rng rng(seed);
    std::vector<std::size_t> counts(static_cast<std::size_t>(w.size()), 0);
    const std::size_t total = burn_in + n_samples;
    for (std::size_t it = 0; it < total; ++it) {
        auto step = uniform_int(rng, -7, 6);
        if (step >= 0) {
            ++step; // {-7..-1} ∪ {1..7}
        }
        const TimeTick proposal = reflect(current + step);
        const double proposal_lp = log_target(proposal);
        const double log_ratio = proposal_lp - current_lp;
        if (log_ratio >= 0.0 || std::log(uniform01(rng)) < log_ratio) {
            current = proposal;
            current_lp = proposal_lp;
        }
        if (it >= burn_in) {
            ++counts[static_cast<std::size_t>(current - w.t_min)];
        }
    }

    std::vector<double> probs(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        probs[k] = static_cast<double>(counts[k]) / static_cast<double>(n_samples);
    }
    return TimePosterior(w, std::move(probs));
}

TimeTick sample_time(const TimePosterior& posterior, Rng& rng)
{
    const auto probs = posterior.probs();
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0) {
            continue;
        }
        last_positive = k;
        cumulative += probs[k];
        if (u < cumulative) {
            return posterior.window().t_min + static_cast<TimeTick>(k);
        }
    }
    // Rounding left u above the accumulated mass.
    return posterior.window().t_min + static_cast<TimeTick>(last_positive);
}

nlohmann::json training_to_json(std::span<const LabeledTimeExample> examples)
{
    auto out = nlohmann::json::array();
    for (const auto& e : examples) {
        nlohmann::json kind = nullptr;
        if (e.obfuscation_kind) {
            kind = *e.obfuscation_kind == ObfuscationKind::Empty ? "empty" : "random";
        }
        out.push_back({
            {"true_creation", e.true_creation},
            {"stamp", stamp_to_json(e.stamp)},
            {"first_seen", e.first_seen ? nlohmann::json(*e.first_seen) : nlohmann::json(nullptr)},
            {"was_obfuscated", e.was_obfuscated},
            {"obfuscation_kind", kind},
        });
    }
    return out;
}

std::vector<LabeledTimeExample> training_from_json(const nlohmann::json& j)
{
    if (!j.is_array()) {
        throw ParseError("training set must be a JSON array");
    }
    std::vector<LabeledTimeExample> out;
    out.reserve(j.size());
    try {
        for (const auto& item : j) {
            LabeledTimeExample e;
            e.true_creation = item.at("true_creation").get<TimeTick>();
            e.stamp = stamp_from_json(item.at("stamp"));
            if (const auto it = item.find("first_seen"); it != item.end() && !it->is_null()) {
                e.first_seen = it->get<TimeTick>();
            }
            e.was_obfuscated = item.at("was_obfuscated").get<bool>();
            if (const auto it = item.find("obfuscation_kind"); it != item.end() && !it->is_null()) {
                const auto kind = it->get<std::string>();
                if (kind == "empty") {
                    e.obfuscation_kind = ObfuscationKind::Empty;
                } else if (kind == "random") {
                    e.obfuscation_kind = ObfuscationKind::Random;
                } else {
                    throw ParseError("unknown obfuscation_kind \"" + kind + "\"");
                }
            }
            out.push_back(e);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("training set: ") + e.what());
    }
    return out;
}

TimeModelParams learn_params(std::span<const LabeledTimeExample> examples, Window window)
{
    if (examples.empty()) {
        throw EmptyTrainingSet("learn_params needs at least one labeled example");
    }
    std::size_t obfuscated = 0;
    std::size_t empty = 0;
    std::size_t random = 0;
    std::size_t sightings = 0;
    double lag_sum = 0.0;
    for (const auto& e : examples) {
        if (e.was_obfuscated) {
            ++obfuscated;
            auto kind = e.obfuscation_kind;
            if (!kind && e.stamp.kind() == StampKind::Empty) {
                kind = ObfuscationKind::Empty;
            } else if (!kind && e.stamp.has_value()) {
                kind = ObfuscationKind::Random;
            }
            if (kind == ObfuscationKind::Empty) {
                ++empty;
            } else if (kind == ObfuscationKind::Random) {
                ++random;
            }
        } else if (!(e.stamp == ObservedStamp::value(e.true_creation))) {
            throw ValidationError("clean example at tick " + std::to_string(e.true_creation) +
                                  " does not carry its creation tick as stamp");
        }
        if (e.first_seen) {
            if (*e.first_seen < e.true_creation) {
                throw ValidationError("example seen at " + std::to_string(*e.first_seen) + " before creation at " +
                                      std::to_string(e.true_creation));
            }
            ++sightings;
            lag_sum += static_cast<double>(*e.first_seen - e.true_creation);
        }
    }
    TimeModelParams p;
    p.window = window;
    p.p_obf = (1.0 + static_cast<double>(obfuscated)) / (2.0 + static_cast<double>(examples.size()));
    p.p_empty = (1.0 + static_cast<double>(empty)) / (2.0 + static_cast<double>(empty + random));
    p.p_lag = (1.0 + static_cast<double>(sightings)) / (2.0 + static_cast<double>(sightings) + lag_sum);
    return p;
}

} // namespace mallineage
