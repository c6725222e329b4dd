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

#include "mallineage/similarity.hpp"

#include "mallineage/errors.hpp"

namespace mallineage {

double jaccard(std::span<const FeatureToken> a, std::span<const FeatureToken> b)
{
    if (a.empty() || b.empty()) {
        throw EmptyFeatureSet("jaccard needs two non-empty feature sets");
    }
    std::size_t shared = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++shared;
            ++i;
            ++j;
        }
    }
    const auto united = a.size() + b.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(united);
}

SimilarityMatrix::SimilarityMatrix(std::size_t n)
    : n_(n)
    , values_(n * n, 0.0)
{
    for (std::size_t i = 0; i < n; ++i) {
        values_[i * n + i] = 1.0;
    }
}

void SimilarityMatrix::set(std::size_t i, std::size_t j, double value) noexcept
{
    values_[i * n_ + j] = value;
    values_[j * n_ + i] = value;
}

SimilarityMatrix similarity_matrix(const Dataset& dataset)
{
    const auto n = dataset.size();
    SimilarityMatrix sim(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sim.set(i, j, jaccard(dataset[i].features, dataset[j].features));
        }
    }
    return sim;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

FeatureSet extract_ngrams(std::span<const std::uint8_t> bytes, std::size_t n)
{
    if (n == 0) {
        throw InputTooShort("n-gram length must be at least 1");
    }
    if (bytes.size() < n) {
        throw InputTooShort("input of " + std::to_string(bytes.size()) + " bytes is shorter than n=" +
                            std::to_string(n));
    }
    std::vector<FeatureToken> tokens;
    tokens.reserve(bytes.size() - n + 1);
    for (std::size_t i = 0; i + n <= bytes.size(); ++i) {
        tokens.push_back(fnv1a64(bytes.subspan(i, n)));
    }
    return make_feature_set(std::move(tokens));
}

} // namespace mallineage
