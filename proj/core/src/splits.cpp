#include "saug/splits.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace saug {

namespace {

/// Picks up to `per_class` labeled nodes per class from `pool`, seeded.
std::pair<std::vector<std::int64_t>, int> pick_labeled(const Graph& g,
                                                       std::vector<NodeId> pool,
                                                       int per_class, std::mt19937_64& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::vector<NodeId>> by_class(g.num_classes());
  for (NodeId v : pool) {
    const int y = g.labels()[v];
    if (y != kUnlabeled) by_class[y].push_back(v);
  }
  std::vector<std::int64_t> labeled;
  int short_classes = 0;
  for (auto& nodes : by_class) {
    if (static_cast<int>(nodes.size()) < per_class) short_classes++;
    const auto take = std::min<std::size_t>(per_class, nodes.size());
    labeled.insert(labeled.end(), nodes.begin(), nodes.begin() + take);
  }
  std::sort(labeled.begin(), labeled.end());
  return {std::move(labeled), short_classes};
}

}  // namespace

TailSplit make_tail_split(const Graph& g, const NodePartition& part, int labels_per_class,
                          std::uint64_t seed) {
  if (part.tails.empty()) throw std::invalid_argument("make_tail_split: empty tail set");
  std::mt19937_64 rng(seed);

  std::vector<NodeId> tails = part.tails;
  std::shuffle(tails.begin(), tails.end(), rng);
  const auto n_val = static_cast<std::int64_t>(2 * tails.size() / 3);

  TailSplit split;
  split.val_nodes.assign(tails.begin(), tails.begin() + n_val);
  split.test_nodes.assign(tails.begin() + n_val, tails.end());
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (!part.is_tail(v)) split.train_nodes.push_back(v);

  auto [labeled, short_classes] = pick_labeled(g, split.train_nodes, labels_per_class, rng);
  split.labeled_train = std::move(labeled);
  split.short_classes = short_classes;
  std::sort(split.val_nodes.begin(), split.val_nodes.end());
  std::sort(split.test_nodes.begin(), split.test_nodes.end());
  for (std::int64_t v : split.labeled_train)
    if (part.is_tail(v)) throw std::logic_error("make_tail_split: labeled mask hit a tail node");
  return split;
}

StandardSplit make_standard_split(const Graph& g, int labels_per_class, std::int64_t val_size,
                                  std::int64_t test_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> all(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) all[v] = v;

  StandardSplit split;
  auto [labeled, short_classes] = pick_labeled(g, all, labels_per_class, rng);
  (void)short_classes;
  split.labeled_train = std::move(labeled);

  std::vector<NodeId> rest;
  for (NodeId v : all)
    if (!std::binary_search(split.labeled_train.begin(), split.labeled_train.end(),
                            static_cast<std::int64_t>(v)) &&
        g.labels()[v] != kUnlabeled)
      rest.push_back(v);
  std::shuffle(rest.begin(), rest.end(), rng);
  if (static_cast<std::int64_t>(rest.size()) < val_size + test_size)
    throw std::invalid_argument("make_standard_split: not enough labeled nodes for val+test");
  split.val_nodes.assign(rest.begin(), rest.begin() + val_size);
  split.test_nodes.assign(rest.begin() + val_size, rest.begin() + val_size + test_size);
  std::sort(split.val_nodes.begin(), split.val_nodes.end());
  std::sort(split.test_nodes.begin(), split.test_nodes.end());
  for (NodeId v : split.val_nodes)
    if (std::binary_search(split.labeled_train.begin(), split.labeled_train.end(),
                           static_cast<std::int64_t>(v)))
      throw std::logic_error("make_standard_split: labeled mask overlaps validation");
  return split;
}

std::vector<EdgePair> LinkSplit::fresh_train_negatives(std::mt19937_64& rng) const {
  return sample_non_edges(train_graph.num_nodes(),
                          static_cast<std::int64_t>(train_pos.size()), all_pos_keys, rng);
}

LinkSplit make_link_split(const Graph& g, std::uint64_t seed) {
  auto edges = g.edge_list();
  if (edges.size() < 10) throw std::invalid_argument("make_link_split: need at least 10 edges");
  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);

  const auto n = static_cast<std::int64_t>(edges.size());
  const std::int64_t n_train = n * 7 / 10;
  const std::int64_t n_val = n / 10;

  LinkSplit split;
  split.train_pos.assign(edges.begin(), edges.begin() + n_train);
  split.val_pos.assign(edges.begin() + n_train, edges.begin() + n_train + n_val);
  split.test_pos.assign(edges.begin() + n_train + n_val, edges.end());
  split.all_pos_keys = edge_key_set(edges);

  split.train_graph = Graph(g.num_nodes(), split.train_pos, g.features(), g.labels(),
                            g.pseudo_flags(), g.num_classes());

  split.val_neg = sample_non_edges(g.num_nodes(), static_cast<std::int64_t>(split.val_pos.size()),
                                   split.all_pos_keys, rng);
  split.test_neg = sample_non_edges(g.num_nodes(),
                                    static_cast<std::int64_t>(split.test_pos.size()),
                                    split.all_pos_keys, rng);
  return split;
}

}  // namespace saug
