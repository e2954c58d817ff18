#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairsynth/common.hpp"

namespace fairsynth {

struct DagNode {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
};

/// Causal DAG over named nodes. Immutable after construction; construction
/// validates acyclicity, edge endpoints, and rejects self-loops and
/// duplicate edges (a cycle is reported with the offending node sequence).
class CausalDag {
public:
    CausalDag(std::vector<DagNode> nodes, std::vector<Edge> edges);

    /// Parses {"nodes": [{"name", "kind"}...], "edges": [[from, to]...]}.
    /// Schema is strict: unknown keys are rejected (an optional top-level
    /// "source" string is allowed for provenance notes).
    static CausalDag from_json(const std::string& text);
    static CausalDag load_file(const std::string& path);
    std::string to_json() const;
    void save_file(const std::string& path) const;

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<DagNode>& nodes() const { return nodes_; }
    /// Edges in canonical (lexicographic) order.
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_node(const std::string& name) const;
    bool has_edge(const std::string& from, const std::string& to) const;
    std::size_t node_index(const std::string& name) const;  // throws ValidationError
    const DagNode& node(std::size_t i) const { return nodes_[i]; }

    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
    std::vector<std::string> parent_names(const std::string& name) const;

    CausalDag with_edges_removed(const std::vector<Edge>& removed) const;
    CausalDag with_node_removed(const std::string& name) const;

    bool operator==(const CausalDag& other) const;

private:
    std::vector<DagNode> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
};

/// Parent-before-child order, lexicographic tie-break among ready nodes.
std::vector<std::string> topological_order(const CausalDag& dag);

/// True iff every path between xs and ys is blocked given zs. Nodes of the
/// conditioning set are treated as separated from everything, so members of
/// xs/ys that also appear in zs contribute "separated" rather than an error;
/// xs and ys themselves must not overlap.
bool d_separated(const CausalDag& dag, const std::set<std::string>& xs,
                 const std::set<std::string>& ys, const std::set<std::string>& zs);

/// Parents, children and co-parents of children, excluding the node itself.
std::set<std::string> markov_boundary(const CausalDag& dag, const std::string& name);

/// All simple directed paths from -> to, each as an ordered node list.
std::vector<std::vector<std::string>> directed_paths(const CausalDag& dag,
                                                     const std::string& from,
                                                     const std::string& to);

std::set<std::string> ancestors(const CausalDag& dag, const std::string& name);
std::set<std::string> descendants(const CausalDag& dag, const std::string& name);

}  // namespace fairsynth
