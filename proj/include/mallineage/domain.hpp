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

#ifndef MALLINEAGE_DOMAIN_HPP
#define MALLINEAGE_DOMAIN_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mallineage {

/// Discrete time in days since a dataset-local epoch.
using TimeTick = std::int64_t;

/// Opaque 64-bit feature token.
using FeatureToken = std::uint64_t;

/// Sorted, duplicate-free list of feature tokens.
using FeatureSet = std::vector<FeatureToken>;

/// Sort and deduplicate in place.
FeatureSet make_feature_set(std::vector<FeatureToken> tokens);

/// Closed tick interval [t_min, t_max].
struct Window {
    TimeTick t_min = 0;
    TimeTick t_max = 0;

    [[nodiscard]] constexpr bool contains(TimeTick t) const noexcept { return t >= t_min && t <= t_max; }
    [[nodiscard]] constexpr std::int64_t size() const noexcept { return t_max - t_min + 1; }
    [[nodiscard]] constexpr TimeTick clamp(TimeTick t) const noexcept
    {
        return t < t_min ? t_min : (t > t_max ? t_max : t);
    }

    friend constexpr bool operator==(const Window&, const Window&) = default;
};

enum class StampKind { Value, Empty, Missing };

/// Compiler time stamp as read from a binary.
/// Empty is a zeroed/blank field; Missing means the header was unreadable.
class ObservedStamp {
public:
    constexpr ObservedStamp() = default;

    static constexpr ObservedStamp value(TimeTick tick) noexcept { return ObservedStamp(StampKind::Value, tick); }
    static constexpr ObservedStamp empty() noexcept { return ObservedStamp(StampKind::Empty, 0); }
    static constexpr ObservedStamp missing() noexcept { return ObservedStamp(StampKind::Missing, 0); }

    [[nodiscard]] constexpr StampKind kind() const noexcept { return kind_; }
    [[nodiscard]] constexpr bool has_value() const noexcept { return kind_ == StampKind::Value; }
    /// Only meaningful when has_value().
    [[nodiscard]] constexpr TimeTick tick() const noexcept { return tick_; }

    friend constexpr bool operator==(const ObservedStamp& a, const ObservedStamp& b) noexcept
    {
        return a.kind_ == b.kind_ && (a.kind_ != StampKind::Value || a.tick_ == b.tick_);
    }

private:
    constexpr ObservedStamp(StampKind kind, TimeTick tick) noexcept : kind_(kind), tick_(tick) {}

    StampKind kind_ = StampKind::Missing;
    TimeTick tick_ = 0;
};

std::string_view to_string(StampKind kind) noexcept;

struct BinaryRecord {
    std::string id;
    FeatureSet features;
    ObservedStamp stamp;
    std::optional<TimeTick> first_seen;

    friend bool operator==(const BinaryRecord&, const BinaryRecord&) = default;
};

/// Validated, immutable set of binaries observed inside a time window.
class Dataset {
public:
    /// Normalizes feature lists and checks every invariant.
    /// Throws ValidationError.
    Dataset(std::vector<BinaryRecord> binaries, Window window);

    [[nodiscard]] const std::vector<BinaryRecord>& binaries() const noexcept { return binaries_; }
    [[nodiscard]] const BinaryRecord& operator[](std::size_t i) const { return binaries_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return binaries_.size(); }
    [[nodiscard]] const Window& window() const noexcept { return window_; }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const;
    /// Throws UnknownId.
    [[nodiscard]] std::size_t require_index(std::string_view id) const;
    [[nodiscard]] std::vector<std::string> ids() const;

    friend bool operator==(const Dataset& a, const Dataset& b)
    {
        return a.window_ == b.window_ && a.binaries_ == b.binaries_;
    }

private:
    std::vector<BinaryRecord> binaries_;
    Window window_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Creation times keyed by binary id.
using TimesMap = std::map<std::string, TimeTick>;

struct Edge {
    std::string parent;
    std::string child;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed acyclic lineage over binaries. An edge parent -> child means the
/// child evolved partly from the parent. Edges and roots are kept sorted, so
/// two graphs over the same nodes compare equal iff they have the same
/// structure.
struct LineageGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> roots;

    /// Builds a graph from per-node parent index lists. Roots are the nodes
    /// with no parents.
    static LineageGraph from_parents(const std::vector<std::string>& nodes,
                                     const std::vector<std::vector<std::size_t>>& parents);

    /// Sorts edges and roots.
    void canonicalize();

    /// Parent index lists in node order. Unknown endpoints throw UnknownId.
    [[nodiscard]] std::vector<std::vector<std::size_t>> parent_indices() const;

    friend bool operator==(const LineageGraph&, const LineageGraph&) = default;
};

enum class ViolationKind {
    DuplicateNode,
    UnknownEndpoint,
    SelfLoop,
    DuplicateEdge,
    UnknownRoot,
    RootHasParent,
    OrphanNonRoot,
    Cycle,
    Temporal,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string first;
    std::string second;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Structural checks only: unique nodes, known endpoints, root bookkeeping
/// and acyclicity.
std::vector<Violation> structural_violations(const LineageGraph& lineage);

/// Structural checks plus times[parent] < times[child] on every edge.
/// Throws UnknownId when `times` lacks a node.
std::vector<Violation> validate_lineage(const LineageGraph& lineage, const TimesMap& times);

/// Node indices in a topological order, or nullopt when the graph is cyclic
/// or has unknown endpoints. Ties resolve to the lowest node index.
std::optional<std::vector<std::size_t>> topological_order(const LineageGraph& lineage);

} // namespace mallineage

#endif
