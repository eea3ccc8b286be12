#pragma once

#include <cstdint>
#include <vector>

#include "saug/graph.hpp"
#include "saug/pagerank.hpp"
#include "saug/sampling.hpp"

namespace saug {

/// Tail-classification protocol: the sampled tails shuffle into
/// validation:test = 2:1, everything else is the training pool, and within it
/// exactly labels_per_class nodes per class stay labeled (fewer if a class
/// runs short, with a warning count).
struct TailSplit {
  std::vector<NodeId> train_nodes;    // non-tail nodes
  std::vector<NodeId> val_nodes;      // tails, 2/3
  std::vector<NodeId> test_nodes;     // tails, 1/3
  std::vector<std::int64_t> labeled_train;  // semi-supervised mask, sorted
  int short_classes = 0;              // classes with < labels_per_class train nodes
};

TailSplit make_tail_split(const Graph& g, const NodePartition& part, int labels_per_class,
                          std::uint64_t seed);

/// Plain semi-supervised split over all nodes: labels_per_class labeled
/// training nodes per class, then val_size validation and test_size test
/// nodes from the rest (seeded), the overall-classification protocol.
struct StandardSplit {
  std::vector<std::int64_t> labeled_train;
  std::vector<NodeId> val_nodes;
  std::vector<NodeId> test_nodes;
};

StandardSplit make_standard_split(const Graph& g, int labels_per_class, std::int64_t val_size,
                                  std::int64_t test_size, std::uint64_t seed);

/// Link-prediction protocol: positive edges shuffle 7:1:2; the training
/// message-passing graph keeps only train edges; val/test negatives are fixed
/// (seeded) and never intersect any positive edge; train negatives resample
/// each epoch through fresh_train_negatives.
struct LinkSplit {
  std::vector<EdgePair> train_pos, val_pos, test_pos;
  std::vector<EdgePair> val_neg, test_neg;
  Graph train_graph;      // same nodes, train edges only
  EdgeKeySet all_pos_keys;

  std::vector<EdgePair> fresh_train_negatives(std::mt19937_64& rng) const;
};

LinkSplit make_link_split(const Graph& g, std::uint64_t seed);

}  // namespace saug
