#include "saug/synthetic.hpp"

#include <random>
#include <stdexcept>

namespace saug {

Graph generate_powerlaw(NodeId n, std::int64_t m, std::int64_t d_x, int num_classes,
                        std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("generate_powerlaw: m must be >= 1");
  // the seed clique already takes m+1 nodes; at least one attachment step
  if (n <= m + 1) throw std::invalid_argument("generate_powerlaw: need n > m + 1");
  if (d_x < 1) throw std::invalid_argument("generate_powerlaw: d_x must be >= 1");
  if (num_classes < 1) throw std::invalid_argument("generate_powerlaw: num_classes must be >= 1");

  std::mt19937_64 rng(seed);
  constexpr double kHomophily = 4.0;  // same-label attachment weight multiplier

  std::vector<int> labels(n);
  for (NodeId v = 0; v < n; ++v) labels[v] = static_cast<int>(v % num_classes);

  std::vector<EdgePair> edges;
  std::vector<std::int64_t> degree(n, 0);
  auto add_edge = [&](NodeId u, NodeId v) {
    edges.push_back(canonical_edge(u, v));
    degree[u]++;
    degree[v]++;
  };

  // seed clique on m+1 nodes
  for (NodeId u = 0; u <= m; ++u)
    for (NodeId v = u + 1; v <= m; ++v) add_edge(u, v);

  std::vector<char> taken(n, 0);
  for (NodeId v = m + 1; v < n; ++v) {
    std::vector<NodeId> targets;
    targets.reserve(m);
    for (std::int64_t pick = 0; pick < m; ++pick) {
      double total = 0.0;
      for (NodeId u = 0; u < v; ++u)
        if (!taken[u])
          total += static_cast<double>(degree[u]) *
                   (labels[u] == labels[v] ? kHomophily : 1.0);
      double roll = std::uniform_real_distribution<double>(0.0, total)(rng);
      NodeId chosen = -1;
      for (NodeId u = 0; u < v; ++u) {
        if (taken[u]) continue;
        roll -= static_cast<double>(degree[u]) * (labels[u] == labels[v] ? kHomophily : 1.0);
        if (roll <= 0.0) {
          chosen = u;
          break;
        }
      }
      if (chosen < 0) {  // numeric edge case: fall back to last free node
        for (NodeId u = v - 1; u >= 0; --u)
          if (!taken[u]) {
            chosen = u;
            break;
          }
      }
      taken[chosen] = 1;
      targets.push_back(chosen);
    }
    for (NodeId u : targets) {
      taken[u] = 0;
      add_edge(u, v);
    }
  }

  // class-conditional sparse binary features: each class owns a band of
  // dimensions; in-band bits fire with p=0.5, out-of-band with p=0.02
  Matrix features(n, d_x);
  const std::int64_t band = std::max<std::int64_t>(1, d_x / num_classes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (NodeId v = 0; v < n; ++v) {
    const std::int64_t lo = (labels[v] * band) % d_x;
    const std::int64_t hi = std::min<std::int64_t>(lo + band, d_x);
    bool any = false;
    for (std::int64_t j = 0; j < d_x; ++j) {
      const double p = (j >= lo && j < hi) ? 0.5 : 0.02;
      if (unit(rng) < p) {
        features(v, j) = 1.0;
        any = true;
      }
    }
    if (!any) features(v, lo) = 1.0;  // no zero-feature nodes
  }
  // unit L1 rows, matching the loader's preprocessing
  for (NodeId v = 0; v < n; ++v) {
    double s = 0.0;
    for (std::int64_t j = 0; j < d_x; ++j) s += features(v, j);
    for (std::int64_t j = 0; j < d_x; ++j) features(v, j) /= s;
  }

  return Graph(n, std::move(edges), std::move(features), std::move(labels),
               std::vector<std::uint8_t>(n, 1), num_classes);
}

}  // namespace saug
