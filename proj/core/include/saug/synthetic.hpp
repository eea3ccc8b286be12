#pragma once

#include <cstdint>

#include "saug/graph.hpp"

namespace saug {

/// Preferential-attachment graph with planted class labels and
/// class-conditional sparse binary features. The seed clique has m+1 nodes,
/// every later node attaches to exactly m distinct existing nodes, so
/// |E| = m(m+1)/2 + (n-m-1)m. Attachment weight is degree, biased toward
/// same-label targets, giving the homophily a GNN can exploit.
/// Deterministic for a fixed seed. Throws if n <= m or m < 1 or d_x < 1.
Graph generate_powerlaw(NodeId n, std::int64_t m, std::int64_t d_x, int num_classes,
                        std::uint64_t seed);

}  // namespace saug
