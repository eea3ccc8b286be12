#pragma once

#include <cstdint>
#include <vector>

#include "saug/graph.hpp"

namespace saug {

struct PageRankVector {
  std::vector<double> values;  // strictly positive, sums to 1
  double damping = 0.85;
  std::int64_t iterations_used = 0;
  double residual = 0.0;  // final L1 change
  bool converged = true;

  double mean() const { return values.empty() ? 0.0 : 1.0 / static_cast<double>(values.size()); }
};

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;
  std::int64_t max_iter = 200;
};

/// Power iteration on the column-stochastic transition matrix of the
/// undirected graph (each undirected edge acts as two directed edges).
/// Dangling nodes redistribute their mass uniformly, which keeps the sum
/// exactly 1. Non-convergence within max_iter is recorded, not fatal.
/// Throws on an empty graph or damping outside (0,1).
PageRankVector pagerank(const Graph& g, const PageRankOptions& opts = {});

struct NodePartition {
  std::vector<NodeId> hubs;   // sorted ascending
  std::vector<NodeId> tails;  // sorted ascending
  double hub_factor = 2.0;    // K
  double tail_fraction = 0.3; // M/100
  PageRankVector pagerank;

  bool is_hub(NodeId v) const;
  bool is_tail(NodeId v) const;
};

struct PartitionOptions {
  double hub_factor = 2.0;     // K: hub iff PR >= K * mean(PR)
  double tail_percent = 30.0;  // M: floor(M% of non-hubs) lowest-PR nodes
  /// Deterministic policy (lowest-PR selection, id tie break) by default; the
  /// seeded variant samples tails with probability proportional to 1/PR.
  bool weighted_sampling = false;
  std::uint64_t sample_seed = 0;
};

/// Hubs: all nodes with PR >= K * mean(PR). Tails: the floor(M% * |non-hubs|)
/// lowest-PageRank non-hub nodes, ties broken by ascending node id.
/// Throws if every node qualifies as a hub or if M selects zero tails.
NodePartition partition_nodes(const PageRankVector& pr, const PartitionOptions& opts = {});

/// Recomputes PageRank on g_prime and partitions with the same options.
NodePartition resample_tails(const Graph& g_prime, const PageRankOptions& pr_opts,
                             const PartitionOptions& part_opts);

}  // namespace saug
