#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saug/matrix.hpp"

namespace saug {

using NodeId = std::int64_t;
using EdgePair = std::pair<NodeId, NodeId>;

constexpr int kUnlabeled = -1;

/// Immutable undirected graph snapshot: symmetric CSR adjacency with sorted
/// neighbor lists, dense node features, integer labels (-1 = unlabeled) and
/// per-node real/pseudo flags (true = real node). No self loops, no
/// duplicate edges. Edits go through apply_delta, which returns a new graph.
class Graph {
 public:
  Graph() = default;
  /// edges: undirected pairs, any orientation, no duplicates, no self loops.
  Graph(NodeId num_nodes, std::vector<EdgePair> edges, Matrix features,
        std::vector<int> labels, std::vector<std::uint8_t> pseudo_flags,
        int num_classes);

  NodeId num_nodes() const { return num_nodes_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(col_idx_.size()) / 2; }
  int num_classes() const { return num_classes_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {col_idx_.data() + row_ptr_[v], col_idx_.data() + row_ptr_[v + 1]};
  }
  std::int64_t degree(NodeId v) const { return row_ptr_[v + 1] - row_ptr_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<NodeId>& col_idx() const { return col_idx_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  /// true = real node; false = generated pseudo node.
  const std::vector<std::uint8_t>& pseudo_flags() const { return pseudo_flags_; }
  std::int64_t num_real_nodes() const;

  /// Canonical edge list, u < v, lexicographically sorted.
  std::vector<EdgePair> edge_list() const;

  bool operator==(const Graph& o) const = default;

  /// Throws if any structural invariant is violated (symmetry, sorted rows,
  /// no self loops, no duplicates, flag/label/feature lengths).
  void check_invariants() const;

 private:
  NodeId num_nodes_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<NodeId> col_idx_;
  Matrix features_;
  std::vector<int> labels_;
  std::vector<std::uint8_t> pseudo_flags_;
  int num_classes_ = 0;
};

/// A reversible edit batch against a base graph.
struct GraphDelta {
  struct NewNode {
    std::vector<double> features;
    int label = kUnlabeled;
    bool pseudo_flag = false;  // false = generated node
  };

  std::vector<EdgePair> removed_edges;  // must exist in the base graph
  std::vector<EdgePair> added_edges;    // must not exist; may reference new nodes
  std::vector<NewNode> added_nodes;     // appended after existing nodes
  // Inverse deltas strip this many trailing nodes (which must end up
  // edge-free after the edge removals above).
  std::int64_t removed_trailing_nodes = 0;

  bool empty() const {
    return removed_edges.empty() && added_edges.empty() && added_nodes.empty() &&
           removed_trailing_nodes == 0;
  }

  /// The delta that undoes this one when applied to apply_delta(g, *this).
  GraphDelta inverse(const Graph& base) const;
};

/// Applies the delta symmetrically and returns a new snapshot; the base graph
/// is unchanged. Throws on: removing a non-existent edge, adding an existing
/// edge, feature width mismatch, or stripping nodes that still have edges.
Graph apply_delta(const Graph& g, const GraphDelta& delta);

struct DegreeStats {
  std::int64_t min = 0;
  std::int64_t max = 0;
  double mean = 0.0;
  std::vector<std::int64_t> histogram;  // histogram[d] = #nodes of degree d
};

DegreeStats degree_stats(const Graph& g);

/// Canonical (u < v) form of an undirected pair.
inline EdgePair canonical_edge(NodeId u, NodeId v) {
  return u < v ? EdgePair{u, v} : EdgePair{v, u};
}

}  // namespace saug
