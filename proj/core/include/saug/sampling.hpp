#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "saug/graph.hpp"

namespace saug {

inline std::uint64_t edge_key(NodeId u, NodeId v) {
  auto [a, b] = canonical_edge(u, v);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

using EdgeKeySet = std::unordered_set<std::uint64_t>;

inline EdgeKeySet edge_key_set(const std::vector<EdgePair>& edges) {
  EdgeKeySet s;
  s.reserve(edges.size() * 2);
  for (auto [u, v] : edges) s.insert(edge_key(u, v));
  return s;
}

/// Uniform draws of node pairs that are not self loops and not in `exclude`
/// (callers put every known positive edge there). Draws are independent, so
/// repeats are possible, matching plain uniform negative sampling.
inline std::vector<EdgePair> sample_non_edges(NodeId num_nodes, std::int64_t count,
                                              const EdgeKeySet& exclude,
                                              std::mt19937_64& rng) {
  if (num_nodes < 2) throw std::invalid_argument("sample_non_edges: need at least 2 nodes");
  std::uniform_int_distribution<NodeId> pick(0, num_nodes - 1);
  std::vector<EdgePair> out;
  out.reserve(count);
  while (static_cast<std::int64_t>(out.size()) < count) {
    NodeId u = pick(rng);
    NodeId v = pick(rng);
    if (u == v) continue;
    if (exclude.contains(edge_key(u, v))) continue;
    out.push_back(canonical_edge(u, v));
  }
  return out;
}

}  // namespace saug
