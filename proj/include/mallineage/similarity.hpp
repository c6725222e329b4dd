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

#ifndef MALLINEAGE_SIMILARITY_HPP
#define MALLINEAGE_SIMILARITY_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mallineage/domain.hpp"

namespace mallineage {

/// |a ∩ b| / |a ∪ b| over sorted, duplicate-free sets. Throws EmptyFeatureSet.
double jaccard(std::span<const FeatureToken> a, std::span<const FeatureToken> b);

/// Dense symmetric matrix of pairwise similarities with unit diagonal.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double value) noexcept;

    friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// Jaccard similarity of every pair of binaries, in dataset order.
SimilarityMatrix similarity_matrix(const Dataset& dataset);

/// 64-bit FNV-1a over a byte range. Offset basis 0xcbf29ce484222325,
/// prime 0x100000001b3; the result is identical on every platform.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

/// FNV-1a hashes of every contiguous n-byte window. Throws InputTooShort when
/// n == 0 or the input is shorter than n.
FeatureSet extract_ngrams(std::span<const std::uint8_t> bytes, std::size_t n);

} // namespace mallineage

#endif
