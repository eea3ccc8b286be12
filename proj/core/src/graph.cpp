#include "saug/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace saug {

Graph::Graph(NodeId num_nodes, std::vector<EdgePair> edges, Matrix features,
             std::vector<int> labels, std::vector<std::uint8_t> pseudo_flags,
             int num_classes)
    : num_nodes_(num_nodes),
      features_(std::move(features)),
      labels_(std::move(labels)),
      pseudo_flags_(std::move(pseudo_flags)),
      num_classes_(num_classes) {
  row_ptr_.assign(num_nodes_ + 1, 0);
  for (auto& [u, v] : edges) {
    if (u < 0 || u >= num_nodes_ || v < 0 || v >= num_nodes_)
      throw std::out_of_range("Graph: edge endpoint " + std::to_string(std::max(u, v)) +
                              " out of range for " + std::to_string(num_nodes_) + " nodes");
    if (u == v) throw std::invalid_argument("Graph: self loop " + std::to_string(u));
    row_ptr_[u + 1]++;
    row_ptr_[v + 1]++;
  }
  for (NodeId i = 0; i < num_nodes_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  col_idx_.resize(edges.size() * 2);
  std::vector<std::int64_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
  for (auto& [u, v] : edges) {
    col_idx_[cursor[u]++] = v;
    col_idx_[cursor[v]++] = u;
  }
  for (NodeId i = 0; i < num_nodes_; ++i) {
    std::sort(col_idx_.begin() + row_ptr_[i], col_idx_.begin() + row_ptr_[i + 1]);
    for (std::int64_t k = row_ptr_[i] + 1; k < row_ptr_[i + 1]; ++k)
      if (col_idx_[k] == col_idx_[k - 1])
        throw std::invalid_argument("Graph: duplicate edge (" + std::to_string(i) + "," +
                                    std::to_string(col_idx_[k]) + ")");
  }
  check_invariants();
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::int64_t Graph::num_real_nodes() const {
  std::int64_t n = 0;
  for (auto f : pseudo_flags_) n += (f != 0);
  return n;
}

std::vector<EdgePair> Graph::edge_list() const {
  std::vector<EdgePair> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes_; ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

void Graph::check_invariants() const {
  if (features_.rows() != num_nodes_)
    throw std::invalid_argument("Graph: feature row count != node count");
  if (static_cast<NodeId>(labels_.size()) != num_nodes_)
    throw std::invalid_argument("Graph: label count != node count");
  if (static_cast<NodeId>(pseudo_flags_.size()) != num_nodes_)
    throw std::invalid_argument("Graph: flag count != node count");
  for (int y : labels_)
    if (y != kUnlabeled && (y < 0 || y >= num_classes_))
      throw std::invalid_argument("Graph: label out of class range");
  for (NodeId u = 0; u < num_nodes_; ++u) {
    auto nb = neighbors(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] == u) throw std::logic_error("Graph: stored self loop");
      if (k > 0 && nb[k] <= nb[k - 1]) throw std::logic_error("Graph: row not sorted/unique");
      if (!has_edge(nb[k], u)) throw std::logic_error("Graph: asymmetric adjacency");
    }
  }
}

GraphDelta GraphDelta::inverse(const Graph& base) const {
  GraphDelta inv;
  inv.removed_edges = added_edges;
  inv.added_edges = removed_edges;
  inv.removed_trailing_nodes = static_cast<std::int64_t>(added_nodes.size());
  if (removed_trailing_nodes > 0) {
    // reconstruct the stripped nodes from the base snapshot
    for (NodeId v = base.num_nodes() - removed_trailing_nodes; v < base.num_nodes(); ++v) {
      NewNode n;
      n.features.assign(base.features().row(v), base.features().row(v) + base.features().cols());
      n.label = base.labels()[v];
      n.pseudo_flag = base.pseudo_flags()[v] != 0;
      inv.added_nodes.push_back(std::move(n));
    }
  }
  return inv;
}

Graph apply_delta(const Graph& g, const GraphDelta& delta) {
  const NodeId old_n = g.num_nodes();
  const NodeId grown_n = old_n + static_cast<NodeId>(delta.added_nodes.size());
  const NodeId new_n = grown_n - delta.removed_trailing_nodes;
  if (new_n < 0) throw std::invalid_argument("apply_delta: stripping more nodes than exist");

  std::set<EdgePair> edges;
  for (auto [u, v] : g.edge_list()) edges.insert({u, v});
  for (auto [u, v] : delta.removed_edges) {
    auto e = canonical_edge(u, v);
    if (edges.erase(e) == 0)
      throw std::invalid_argument("apply_delta: removal of non-existent edge (" +
                                  std::to_string(e.first) + "," + std::to_string(e.second) + ")");
  }
  for (auto [u, v] : delta.added_edges) {
    if (u == v) throw std::invalid_argument("apply_delta: self loop addition");
    auto e = canonical_edge(u, v);
    if (e.first < 0 || e.second >= grown_n)
      throw std::out_of_range("apply_delta: added edge endpoint out of range");
    if (!edges.insert(e).second)
      throw std::invalid_argument("apply_delta: addition of existing edge (" +
                                  std::to_string(e.first) + "," + std::to_string(e.second) + ")");
  }

  const std::int64_t d = g.features().cols();
  Matrix features(new_n, d);
  std::vector<int> labels(new_n);
  std::vector<std::uint8_t> flags(new_n);
  for (NodeId v = 0; v < std::min(old_n, new_n); ++v) {
    std::copy(g.features().row(v), g.features().row(v) + d, features.row(v));
    labels[v] = g.labels()[v];
    flags[v] = g.pseudo_flags()[v];
  }
  for (std::size_t k = 0; k < delta.added_nodes.size(); ++k) {
    const NodeId v = old_n + static_cast<NodeId>(k);
    if (v >= new_n) break;  // added then stripped in the same delta: pointless but legal
    const auto& n = delta.added_nodes[k];
    if (static_cast<std::int64_t>(n.features.size()) != d)
      throw std::invalid_argument("apply_delta: added node feature width mismatch");
    std::copy(n.features.begin(), n.features.end(), features.row(v));
    labels[v] = n.label;
    flags[v] = n.pseudo_flag ? 1 : 0;
  }

  std::vector<EdgePair> edge_vec;
  edge_vec.reserve(edges.size());
  for (auto e : edges) {
    if (e.second >= new_n)
      throw std::invalid_argument("apply_delta: stripped node still has edges");
    edge_vec.push_back(e);
  }
  return Graph(new_n, std::move(edge_vec), std::move(features), std::move(labels),
               std::move(flags), g.num_classes());
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  if (g.num_nodes() == 0) return s;
  s.min = g.degree(0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto d = g.degree(v);
    s.min = std::min(s.min, d);
    s.max = std::max(s.max, d);
    if (static_cast<std::int64_t>(s.histogram.size()) <= d) s.histogram.resize(d + 1, 0);
    s.histogram[d]++;
  }
  s.mean = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
  return s;
}

}  // namespace saug
