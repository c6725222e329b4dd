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

#ifndef MALLINEAGE_TIMEMODEL_HPP
#define MALLINEAGE_TIMEMODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "mallineage/domain.hpp"
#include "mallineage/random.hpp"

namespace mallineage {

/// Parameters of the per-binary creation-time model.
///
/// Generative story for one binary with creation tick t:
///  - with probability 1 - p_obf the stamp is Value(t);
///  - with probability p_obf * p_empty the stamp is Empty;
///  - otherwise the stamp is Value(u) with u uniform over the window;
///  - the first sighting happens lag >= 0 ticks after t, lag ~ Geometric(p_lag).
/// The creation tick itself is uniform over the window.
struct TimeModelParams {
    double p_obf = 0.1;
    double p_empty = 0.5;
    double p_lag = 0.25;
    Window window;

    /// Throws ConfigError when a probability is out of range.
    void validate() const;
};

/// Serializes p_obf, p_empty and p_lag; the window is supplied by the dataset.
nlohmann::json params_to_json(const TimeModelParams& params);
TimeModelParams params_from_json(const nlohmann::json& j, Window window);

/// log P(stamp | creation = t), both obfuscation variables marginalized.
/// Missing stamps carry no evidence and return 0. A Value stamp outside the
/// window can only come from the random branch. Throws OutOfWindow.
double stamp_log_likelihood(TimeTick t, const ObservedStamp& stamp, const TimeModelParams& params);

/// log P(first seen | creation = t). Absent sightings return 0, sightings
/// before t are impossible. Throws OutOfWindow.
double seen_log_likelihood(TimeTick t, std::optional<TimeTick> seen, const TimeModelParams& params);

/// Sum of the stamp and sighting terms for one binary.
double evidence_log_likelihood(TimeTick t, const BinaryRecord& binary, const TimeModelParams& params);

/// Discrete distribution over the ticks of a window.
class TimePosterior {
public:
    /// `probs[k]` is the mass of tick window.t_min + k. Throws ValidationError
    /// on size mismatch, negative entries or a total not within 1e-9 of 1.
    TimePosterior(Window window, std::vector<double> probs);

    [[nodiscard]] const Window& window() const noexcept { return window_; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
    /// Zero outside the window.
    [[nodiscard]] double probability(TimeTick t) const noexcept;
    [[nodiscard]] double mean() const noexcept;
    /// Highest-mass tick, earliest on ties.
    [[nodiscard]] TimeTick mode() const noexcept;

private:
    Window window_;
    std::vector<double> probs_;
};

/// Total variation distance. Both posteriors must share a window.
double total_variation(const TimePosterior& a, const TimePosterior& b);

/// Posterior under a uniform prior, computed by enumerating every tick.
/// Throws DegenerateEvidence when no tick has non-zero likelihood.
TimePosterior exact_posterior(const BinaryRecord& binary, const TimeModelParams& params);

/// Metropolis–Hastings estimate of the same posterior.
///
/// Proposal: symmetric integer random walk, step uniform on {-7..7} \ {0},
/// reflected at the window bounds. The chain starts at the highest-likelihood
/// tick; `burn_in` steps are discarded and the next `n_samples` states are
/// histogrammed. Deterministic given `seed`.
TimePosterior mh_posterior(const BinaryRecord& binary, const TimeModelParams& params, std::size_t n_samples,
                           std::size_t burn_in, std::uint64_t seed);

/// Inverse-CDF draw; never returns a zero-mass tick.
TimeTick sample_time(const TimePosterior& posterior, Rng& rng);

enum class ObfuscationKind { Empty, Random };

/// A training example with known creation time and obfuscation labels.
struct LabeledTimeExample {
    TimeTick true_creation = 0;
    ObservedStamp stamp;
    std::optional<TimeTick> first_seen;
    bool was_obfuscated = false;
    std::optional<ObfuscationKind> obfuscation_kind;

    friend bool operator==(const LabeledTimeExample&, const LabeledTimeExample&) = default;
};

nlohmann::json training_to_json(std::span<const LabeledTimeExample> examples);
/// Throws ParseError / ValidationError.
std::vector<LabeledTimeExample> training_from_json(const nlohmann::json& j);

/// Posterior means under uniform Beta(1,1) priors:
///   p_obf   = (1 + #obfuscated) / (2 + #examples)
///   p_empty = (1 + #empty) / (2 + #empty + #random)
///   p_lag   = (1 + #sightings) / (2 + #sightings + sum of lags)
/// Throws EmptyTrainingSet, ValidationError (clean example whose stamp is not
/// its creation tick, or a sighting before creation).
TimeModelParams learn_params(std::span<const LabeledTimeExample> examples, Window window);

} // namespace mallineage

#endif
