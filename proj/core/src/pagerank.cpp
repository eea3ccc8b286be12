#include "saug/pagerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace saug {

PageRankVector pagerank(const Graph& g, const PageRankOptions& opts) {
  const NodeId n = g.num_nodes();
  if (n == 0) throw std::invalid_argument("pagerank: empty graph");
  if (!(opts.damping > 0.0 && opts.damping < 1.0))
    throw std::invalid_argument("pagerank: damping must lie in (0,1)");
  if (opts.max_iter < 1) throw std::invalid_argument("pagerank: max_iter must be >= 1");

  const double xi = opts.damping;
  std::vector<double> pr(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);

  PageRankVector out;
  out.damping = xi;
  for (std::int64_t it = 1; it <= opts.max_iter; ++it) {
    double dangling_mass = 0.0;
    for (NodeId v = 0; v < n; ++v)
      if (g.degree(v) == 0) dangling_mass += pr[v];
    const double base = (1.0 - xi) / static_cast<double>(n) +
                        xi * dangling_mass / static_cast<double>(n);
    for (NodeId v = 0; v < n; ++v) {
      double acc = 0.0;
      for (NodeId u : g.neighbors(v)) acc += pr[u] / static_cast<double>(g.degree(u));
      next[v] = base + xi * acc;
    }
    double delta = 0.0;
    for (NodeId v = 0; v < n; ++v) delta += std::fabs(next[v] - pr[v]);
    pr.swap(next);
    out.iterations_used = it;
    out.residual = delta;
    if (delta < opts.tol) break;
  }
  out.converged = out.residual < opts.tol;
  out.values = std::move(pr);
  return out;
}

bool NodePartition::is_hub(NodeId v) const {
  return std::binary_search(hubs.begin(), hubs.end(), v);
}

bool NodePartition::is_tail(NodeId v) const {
  return std::binary_search(tails.begin(), tails.end(), v);
}

NodePartition partition_nodes(const PageRankVector& pr, const PartitionOptions& opts) {
  if (opts.hub_factor < 1.0) throw std::invalid_argument("partition_nodes: K must be >= 1");
  if (!(opts.tail_percent > 0.0 && opts.tail_percent <= 100.0))
    throw std::invalid_argument("partition_nodes: M must lie in (0,100]");
  const auto n = static_cast<NodeId>(pr.values.size());
  if (n == 0) throw std::invalid_argument("partition_nodes: empty PageRank vector");

  NodePartition part;
  part.hub_factor = opts.hub_factor;
  part.tail_fraction = opts.tail_percent / 100.0;
  part.pagerank = pr;

  const double threshold = opts.hub_factor * pr.mean();
  std::vector<NodeId> non_hubs;
  for (NodeId v = 0; v < n; ++v) {
    if (pr.values[v] >= threshold)
      part.hubs.push_back(v);
    else
      non_hubs.push_back(v);
  }
  if (non_hubs.empty())
    throw std::invalid_argument("partition_nodes: degenerate K, every node is a hub");

  const auto num_tails = static_cast<std::int64_t>(
      std::floor(part.tail_fraction * static_cast<double>(non_hubs.size())));
  if (num_tails == 0)
    throw std::invalid_argument("partition_nodes: M selects zero tail nodes");

  if (!opts.weighted_sampling) {
    // lowest PR first, ties by ascending node id
    std::stable_sort(non_hubs.begin(), non_hubs.end(), [&](NodeId a, NodeId b) {
      if (pr.values[a] != pr.values[b]) return pr.values[a] < pr.values[b];
      return a < b;
    });
    part.tails.assign(non_hubs.begin(), non_hubs.begin() + num_tails);
  } else {
    // seeded sampling without replacement, probability proportional to 1/PR
    std::mt19937_64 rng(opts.sample_seed);
    std::vector<double> weight(non_hubs.size());
    for (std::size_t i = 0; i < non_hubs.size(); ++i) weight[i] = 1.0 / pr.values[non_hubs[i]];
    std::vector<char> chosen(non_hubs.size(), 0);
    for (std::int64_t k = 0; k < num_tails; ++k) {
      double total = 0.0;
      for (std::size_t i = 0; i < non_hubs.size(); ++i)
        if (!chosen[i]) total += weight[i];
      double roll = std::uniform_real_distribution<double>(0.0, total)(rng);
      std::size_t pick = 0;
      for (std::size_t i = 0; i < non_hubs.size(); ++i) {
        if (chosen[i]) continue;
        roll -= weight[i];
        pick = i;
        if (roll <= 0.0) break;
      }
      chosen[pick] = 1;
      part.tails.push_back(non_hubs[pick]);
    }
  }
  std::sort(part.tails.begin(), part.tails.end());
  return part;
}

NodePartition resample_tails(const Graph& g_prime, const PageRankOptions& pr_opts,
                             const PartitionOptions& part_opts) {
  return partition_nodes(pagerank(g_prime, pr_opts), part_opts);
}

}  // namespace saug
