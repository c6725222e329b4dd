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

#include "mallineage/domain.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <unordered_set>

#include "mallineage/errors.hpp"

namespace mallineage {

FeatureSet make_feature_set(std::vector<FeatureToken> tokens)
{
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

std::string_view to_string(StampKind kind) noexcept
{
    switch (kind) {
    case StampKind::Value:
        return "value";
    case StampKind::Empty:
        return "empty";
    case StampKind::Missing:
        return "missing";
    }
    return "?";
}

Dataset::Dataset(std::vector<BinaryRecord> binaries, Window window)
    : binaries_(std::move(binaries))
    , window_(window)
{
    if (window_.t_min >= window_.t_max) {
        throw ValidationError("window requires t_min < t_max, got [" + std::to_string(window_.t_min) + ", " +
                              std::to_string(window_.t_max) + "]");
    }
    if (binaries_.empty()) {
        throw ValidationError("dataset has no binaries");
    }
    index_.reserve(binaries_.size());
    for (std::size_t i = 0; i < binaries_.size(); ++i) {
        auto& b = binaries_[i];
        if (b.id.empty()) {
            throw ValidationError("binary #" + std::to_string(i) + " has an empty id");
        }
        if (!index_.emplace(b.id, i).second) {
            throw ValidationError("duplicate id \"" + b.id + "\"");
        }
        b.features = make_feature_set(std::move(b.features));
        if (b.features.empty()) {
            throw ValidationError("binary \"" + b.id + "\" has no features");
        }
        if (b.first_seen && !window_.contains(*b.first_seen)) {
            throw ValidationError("binary \"" + b.id + "\" first_seen " + std::to_string(*b.first_seen) +
                                  " lies outside the window");
        }
    }
}

std::optional<std::size_t> Dataset::index_of(std::string_view id) const
{
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Dataset::require_index(std::string_view id) const
{
    if (auto i = index_of(id)) {
        return *i;
    }
    throw UnknownId("unknown binary id \"" + std::string(id) + "\"");
}

std::vector<std::string> Dataset::ids() const
{
    std::vector<std::string> out;
    out.reserve(binaries_.size());
    for (const auto& b : binaries_) {
        out.push_back(b.id);
    }
    return out;
}

LineageGraph LineageGraph::from_parents(const std::vector<std::string>& nodes,
                                        const std::vector<std::vector<std::size_t>>& parents)
{
    LineageGraph g;
    g.nodes = nodes;
    for (std::size_t c = 0; c < nodes.size(); ++c) {
        if (parents[c].empty()) {
            g.roots.push_back(nodes[c]);
        }
        for (std::size_t p : parents[c]) {
            g.edges.push_back({nodes[p], nodes[c]});
        }
    }
    g.canonicalize();
    return g;
}

void LineageGraph::canonicalize()
{
    std::sort(edges.begin(), edges.end());
    std::sort(roots.begin(), roots.end());
}

std::vector<std::vector<std::size_t>> LineageGraph::parent_indices() const
{
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        index.emplace(nodes[i], i);
    }
    auto lookup = [&](const std::string& id) {
        const auto it = index.find(id);
        if (it == index.end()) {
            throw UnknownId("edge endpoint \"" + id + "\" is not a node");
        }
        return it->second;
    };
    std::vector<std::vector<std::size_t>> parents(nodes.size());
    for (const auto& e : edges) {
        parents[lookup(e.child)].push_back(lookup(e.parent));
    }
    for (auto& p : parents) {
        std::sort(p.begin(), p.end());
    }
    return parents;
}

std::string_view to_string(ViolationKind kind) noexcept
{
    switch (kind) {
    case ViolationKind::DuplicateNode:
        return "duplicate-node";
    case ViolationKind::UnknownEndpoint:
        return "unknown-endpoint";
    case ViolationKind::SelfLoop:
        return "self-loop";
    case ViolationKind::DuplicateEdge:
        return "duplicate-edge";
    case ViolationKind::UnknownRoot:
        return "unknown-root";
    case ViolationKind::RootHasParent:
        return "root-has-parent";
    case ViolationKind::OrphanNonRoot:
        return "orphan-non-root";
    case ViolationKind::Cycle:
        return "cycle";
    case ViolationKind::Temporal:
        return "temporal";
    }
    return "?";
}

namespace {

// Kahn's algorithm over the edges whose endpoints are known nodes.
std::optional<std::vector<std::size_t>> kahn(const std::vector<std::string>& nodes, const std::vector<Edge>& edges,
                                             std::vector<std::size_t>* leftover)
{
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        index.emplace(nodes[i], i);
    }
    std::vector<std::vector<std::size_t>> children(nodes.size());
    std::vector<std::size_t> indegree(nodes.size(), 0);
    for (const auto& e : edges) {
        const auto p = index.find(e.parent);
        const auto c = index.find(e.child);
        if (p == index.end() || c == index.end()) {
            continue;
        }
        children[p->second].push_back(c->second);
        ++indegree[c->second];
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (indegree[i] == 0) {
            ready.push(i);
        }
    }
    std::vector<std::size_t> order;
    order.reserve(nodes.size());
    while (!ready.empty()) {
        const auto n = ready.top();
        ready.pop();
        order.push_back(n);
        for (auto c : children[n]) {
            if (--indegree[c] == 0) {
                ready.push(c);
            }
        }
    }
    if (order.size() != nodes.size()) {
        if (leftover) {
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (indegree[i] > 0) {
                    leftover->push_back(i);
                }
            }
        }
        return std::nullopt;
    }
    return order;
}

} // namespace

std::optional<std::vector<std::size_t>> topological_order(const LineageGraph& lineage)
{
    std::unordered_set<std::string_view> known(lineage.nodes.begin(), lineage.nodes.end());
    for (const auto& e : lineage.edges) {
        if (!known.contains(e.parent) || !known.contains(e.child)) {
            return std::nullopt;
        }
    }
    return kahn(lineage.nodes, lineage.edges, nullptr);
}

std::vector<Violation> structural_violations(const LineageGraph& lineage)
{
    std::vector<Violation> out;
    std::set<std::string_view> nodes;
    for (const auto& n : lineage.nodes) {
        if (!nodes.insert(n).second) {
            out.push_back({ViolationKind::DuplicateNode, n, {}});
        }
    }

    std::set<std::string_view> has_parent;
    std::set<std::pair<std::string_view, std::string_view>> seen_edges;
    for (const auto& e : lineage.edges) {
        if (!nodes.contains(e.parent) || !nodes.contains(e.child)) {
            out.push_back({ViolationKind::UnknownEndpoint, e.parent, e.child});
            continue;
        }
        if (e.parent == e.child) {
            out.push_back({ViolationKind::SelfLoop, e.parent, e.child});
        }
        if (!seen_edges.emplace(e.parent, e.child).second) {
            out.push_back({ViolationKind::DuplicateEdge, e.parent, e.child});
        }
        has_parent.insert(e.child);
    }

    std::set<std::string_view> roots;
    for (const auto& r : lineage.roots) {
        if (!nodes.contains(r)) {
            out.push_back({ViolationKind::UnknownRoot, r, {}});
            continue;
        }
        roots.insert(r);
        if (has_parent.contains(r)) {
            out.push_back({ViolationKind::RootHasParent, r, {}});
        }
    }
    for (const auto& n : nodes) {
        if (!roots.contains(n) && !has_parent.contains(n)) {
            out.push_back({ViolationKind::OrphanNonRoot, std::string(n), {}});
        }
    }

    std::vector<std::size_t> stuck;
    if (!kahn(lineage.nodes, lineage.edges, &stuck)) {
        // Report one cycle edge among the nodes Kahn could not release.
        std::set<std::string_view> in_cycle;
        for (auto i : stuck) {
            in_cycle.insert(lineage.nodes[i]);
        }
        for (const auto& e : lineage.edges) {
            if (in_cycle.contains(e.parent) && in_cycle.contains(e.child)) {
                out.push_back({ViolationKind::Cycle, e.parent, e.child});
                break;
            }
        }
    }
    return out;
}

std::vector<Violation> validate_lineage(const LineageGraph& lineage, const TimesMap& times)
{
    for (const auto& n : lineage.nodes) {
        if (!times.contains(n)) {
            throw UnknownId("no time given for node \"" + n + "\"");
        }
    }
    auto out = structural_violations(lineage);
    for (const auto& e : lineage.edges) {
        const auto p = times.find(e.parent);
        const auto c = times.find(e.child);
        if (p == times.end() || c == times.end()) {
            continue; // already reported as an unknown endpoint
        }
        if (!(p->second < c->second)) {
            out.push_back({ViolationKind::Temporal, e.parent, e.child});
        }
    }
    return out;
}

} // namespace mallineage
