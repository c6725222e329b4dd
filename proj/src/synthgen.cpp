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

#include "mallineage/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "mallineage/errors.hpp"
#include "mallineage/lineage.hpp"

namespace mallineage {

namespace {

bool unit(double x)
{
    return x >= 0.0 && x <= 1.0;
}

FeatureToken draw_feature(Rng& rng, std::size_t pool)
{
    return uniform_below(rng, pool);
}

std::vector<TimeTick> creation_ticks(std::size_t n, const Window& w, Rng& rng)
{
    std::vector<TimeTick> ticks(n);
    for (auto& t : ticks) {
        t = uniform_int(rng, w.t_min, w.t_max);
    }
    std::sort(ticks.begin(), ticks.end());
    for (std::size_t i = 1; i < n; ++i) {
        if (ticks[i] <= ticks[i - 1]) {
            ticks[i] = ticks[i - 1] + 1;
        }
    }
    // Nudging may run past t_max; pull the tail back in.
    for (std::size_t i = n; i-- > 0;) {
        const TimeTick cap = i + 1 < n ? ticks[i + 1] - 1 : w.t_max;
        ticks[i] = std::min(ticks[i], cap);
    }
    return ticks;
}

} // namespace

void GenConfig::validate() const
{
    if (n_binaries < 1) {
        throw ConfigError("n_binaries must be at least 1");
    }
    if (window.t_min >= window.t_max) {
        throw ConfigError("window requires t_min < t_max");
    }
    if (static_cast<std::int64_t>(n_binaries) > window.size()) {
        throw ConfigError("window is too small for distinct creation ticks");
    }
    if (!unit(p_multi_root) || !unit(p_second_parent) || !unit(obf_fraction) || !unit(p_empty)) {
        throw ConfigError("rates and fractions must lie in [0, 1]");
    }
    if (!(mutation_rate >= 0.0 && mutation_rate < 1.0)) {
        throw ConfigError("mutation_rate must lie in [0, 1)");
    }
    if (!(p_lag > 0.0 && p_lag <= 1.0)) {
        throw ConfigError("p_lag must lie in (0, 1]");
    }
    if (features_per_root < 1 || feature_pool < 2 * features_per_root) {
        throw ConfigError("feature_pool must hold at least twice features_per_root");
    }
}

nlohmann::json gen_config_to_json(const GenConfig& c)
{
    return {
        {"n_binaries", c.n_binaries},
        {"window", {{"t_min", c.window.t_min}, {"t_max", c.window.t_max}}},
        {"p_multi_root", c.p_multi_root},
        {"p_second_parent", c.p_second_parent},
        {"feature_pool", c.feature_pool},
        {"features_per_root", c.features_per_root},
        {"mutation_rate", c.mutation_rate},
        {"obf_fraction", c.obf_fraction},
        {"p_empty", c.p_empty},
        {"p_lag", c.p_lag},
        {"seed", c.seed},
    };
}

GenConfig gen_config_from_json(const nlohmann::json& j)
{
    GenConfig c;
    if (!j.is_object()) {
        throw ParseError("generator config must be a JSON object");
    }
    try {
        c.n_binaries = j.value("n_binaries", c.n_binaries);
        if (const auto it = j.find("window"); it != j.end()) {
            c.window.t_min = it->at("t_min").get<TimeTick>();
            c.window.t_max = it->at("t_max").get<TimeTick>();
        }
        c.p_multi_root = j.value("p_multi_root", c.p_multi_root);
        c.p_second_parent = j.value("p_second_parent", c.p_second_parent);
        c.feature_pool = j.value("feature_pool", c.feature_pool);
        c.features_per_root = j.value("features_per_root", c.features_per_root);
        c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
        c.obf_fraction = j.value("obf_fraction", c.obf_fraction);
        c.p_empty = j.value("p_empty", c.p_empty);
        c.p_lag = j.value("p_lag", c.p_lag);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generator config: ") + e.what());
    }
    c.validate();
    return c;
}

Dataset apply_obfuscation(const Dataset& dataset, double fraction, double p_empty, Rng& rng,
                          std::vector<ObfuscationRecord>* record)
{
    const auto n = dataset.size();
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(order[i], order[i + uniform_below(rng, n - i)]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));

    auto binaries = dataset.binaries();
    const auto& w = dataset.window();
    for (std::size_t k = 0; k < count; ++k) {
        const auto i = order[k];
        if (bernoulli(rng, p_empty)) {
            binaries[i].stamp = ObservedStamp::empty();
            if (record) {
                record->push_back({i, ObfuscationKind::Empty});
            }
        } else {
            binaries[i].stamp = ObservedStamp::value(uniform_int(rng, w.t_min, w.t_max));
            if (record) {
                record->push_back({i, ObfuscationKind::Random});
            }
        }
    }
    return Dataset(std::move(binaries), w);
}

SyntheticFamily generate_family(const GenConfig& config)
{
    config.validate();
    Rng rng(config.seed);
    const auto n = config.n_binaries;
    const auto& w = config.window;

    const auto ticks = creation_ticks(n, w, rng);

    // Shuffled id assignment: creation index k gets label[k].
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(label[i - 1], label[uniform_below(rng, i)]);
    }
    const int width = static_cast<int>(std::to_string(n - 1).size());
    auto id_of = [&](std::size_t k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "bin%0*zu", width, label[k]);
        return std::string(buf);
    };

    auto fresh_root = [&] {
        std::unordered_set<FeatureToken> set;
        while (set.size() < config.features_per_root) {
            set.insert(draw_feature(rng, config.feature_pool));
        }
        return make_feature_set(std::vector<FeatureToken>(set.begin(), set.end()));
    };

    std::vector<FeatureSet> features(n);
    std::vector<std::vector<std::size_t>> parents(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || bernoulli(rng, config.p_multi_root)) {
            features[k] = fresh_root();
            continue;
        }
        parents[k].push_back(uniform_below(rng, k));
        if (k >= 2 && bernoulli(rng, config.p_second_parent)) {
            std::size_t second;
            do {
                second = uniform_below(rng, k);
            } while (second == parents[k][0]);
            parents[k].push_back(second);
            std::sort(parents[k].begin(), parents[k].end());
        }
        std::vector<FeatureToken> merged;
        for (auto p : parents[k]) {
            merged.insert(merged.end(), features[p].begin(), features[p].end());
        }
        auto inherited = make_feature_set(std::move(merged));

        // Drop a mutation_rate fraction, then refill from the pool with
        // features the child does not already carry.
        const auto replace = static_cast<std::size_t>(std::llround(config.mutation_rate * inherited.size()));
        for (std::size_t r = 0; r < replace; ++r) {
            const auto victim = uniform_below(rng, inherited.size() - r);
            std::swap(inherited[victim], inherited[inherited.size() - 1 - r]);
        }
        std::vector<FeatureToken> kept(inherited.begin(), inherited.end() - static_cast<std::ptrdiff_t>(replace));
        std::unordered_set<FeatureToken> present(inherited.begin(), inherited.end());
        for (std::size_t r = 0; r < replace; ++r) {
            FeatureToken f;
            do {
                f = draw_feature(rng, config.feature_pool);
            } while (present.contains(f));
            present.insert(f);
            kept.push_back(f);
        }
        features[k] = make_feature_set(std::move(kept));
    }

    // Dataset order follows the shuffled labels.
    std::vector<std::size_t> by_label(n);
    for (std::size_t k = 0; k < n; ++k) {
        by_label[label[k]] = k;
    }
    std::vector<BinaryRecord> records;
    records.reserve(n);
    for (std::size_t l = 0; l < n; ++l) {
        const auto k = by_label[l];
        records.push_back({id_of(k), features[k], ObservedStamp::value(ticks[k]), std::nullopt});
    }
    const Dataset clean(std::move(records), w);

    std::vector<ObfuscationRecord> obfuscated;
    auto binaries = apply_obfuscation(clean, config.obf_fraction, config.p_empty, rng, &obfuscated).binaries();

    std::vector<LabeledTimeExample> labels(n);
    for (std::size_t l = 0; l < n; ++l) {
        const auto k = by_label[l];
        const auto seen = std::min(w.t_max, ticks[k] + geometric(rng, config.p_lag));
        binaries[l].first_seen = seen;
        labels[l] = {ticks[k], binaries[l].stamp, seen, false, std::nullopt};
    }
    for (const auto& o : obfuscated) {
        labels[o.index].was_obfuscated = true;
        labels[o.index].obfuscation_kind = o.kind;
    }

    SyntheticFamily family{Dataset(std::move(binaries), w), {}, {}, std::move(labels)};
    std::vector<std::string> ids;
    ParentSets truth_parents(n);
    for (std::size_t l = 0; l < n; ++l) {
        ids.push_back(family.dataset[l].id);
        const auto k = by_label[l];
        for (auto p : parents[k]) {
            truth_parents[l].push_back(label[p]);
        }
        std::sort(truth_parents[l].begin(), truth_parents[l].end());
        family.times.emplace(family.dataset[l].id, ticks[k]);
    }
    family.truth = LineageGraph::from_parents(ids, truth_parents);
    return family;
}

} // namespace mallineage
