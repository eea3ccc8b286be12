#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "saug/metrics.hpp"
#include "saug/pagerank.hpp"
#include "saug/splits.hpp"
#include "saug/synthetic.hpp"

using namespace saug;

TEST_CASE("f1_scores: perfect, hand-computed and degenerate cases") {
  auto perfect = f1_scores({0, 1, 2, 0}, {0, 1, 2, 0}, 3);
  CHECK(perfect.macro == doctest::Approx(1.0));
  CHECK(perfect.micro == doctest::Approx(1.0));

  // truth [0,0,1,1], pred [0,1,1,1]: F1(0)=2/3, F1(1)=4/5
  auto r = f1_scores({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
  CHECK(r.per_class[0] == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[1] == doctest::Approx(4.0 / 5.0));
  CHECK(r.macro == doctest::Approx(11.0 / 15.0));
  CHECK(r.micro == doctest::Approx(0.75));

  // all-one-class predictions on balanced truth
  auto c = f1_scores({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
  CHECK(c.macro == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(f1_scores({}, {}, 2), std::invalid_argument);
  CHECK_THROWS_AS(f1_scores({0}, {0, 1}, 2), std::invalid_argument);
}

TEST_CASE("micro-F1 equals accuracy on random multiclass vectors") {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 50 + rng() % 951;
    const int classes = 2 + static_cast<int>(rng() % 6);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = cls(rng);
      truth[i] = cls(rng);
    }
    auto r = f1_scores(pred, truth, classes);
    double correct = 0.0;
    for (std::size_t i = 0; i < n; ++i) correct += pred[i] == truth[i];
    CHECK(r.micro == doctest::Approx(correct / static_cast<double>(n)).epsilon(1e-12));
  }
}

TEST_CASE("auc_score: separations, ties and the enumerated example") {
  CHECK(auc_score({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(auc_score({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
  CHECK(auc_score({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(auc_score({0.1, 0.2}, {1, 1}), std::invalid_argument);
}

TEST_CASE("rank AUC equals the trapezoidal ROC integral on random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng() % 200;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_both = false;
    for (std::size_t i = 0; i < n; ++i) {
      // quantized scores force tie handling
      scores[i] = std::round(unit(rng) * 10.0) / 10.0;
      labels[i] = unit(rng) < 0.4 ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;
    has_both = true;
    REQUIRE(has_both);
    CHECK(std::fabs(auc_score(scores, labels) - oracle::trapezoid_auc(scores, labels)) < 1e-9);
  }
}

TEST_CASE("mean_std: single value and identical values have zero std") {
  CHECK(mean_std({0.5}).std == 0.0);
  auto ms = mean_std({0.7, 0.7, 0.7, 0.7, 0.7});
  CHECK(ms.mean == doctest::Approx(0.7));
  CHECK(ms.std == doctest::Approx(0.0));
  ms = mean_std({1.0, 2.0, 3.0});
  CHECK(ms.mean == doctest::Approx(2.0));
  CHECK(ms.std == doctest::Approx(1.0));  // sample std
}

TEST_CASE("make_tail_split: 2:1 ratio, label budget, disjointness") {
  Graph g = generate_powerlaw(120, 2, 8, 4, 19);
  auto part = partition_nodes(pagerank(g), {});
  auto split = make_tail_split(g, part, 10, 5);

  const auto n_tails = static_cast<std::int64_t>(part.tails.size());
  CHECK(static_cast<std::int64_t>(split.val_nodes.size()) == 2 * n_tails / 3);
  CHECK(split.val_nodes.size() + split.test_nodes.size() == part.tails.size());

  // disjoint and covering
  std::set<NodeId> seen;
  for (NodeId v : split.train_nodes) CHECK(seen.insert(v).second);
  for (NodeId v : split.val_nodes) CHECK(seen.insert(v).second);
  for (NodeId v : split.test_nodes) CHECK(seen.insert(v).second);
  CHECK(seen.size() == static_cast<std::size_t>(g.num_nodes()));

  // at most 10 labeled per class, all from the train pool
  std::vector<int> per_class(g.num_classes(), 0);
  for (auto v : split.labeled_train) {
    per_class[g.labels()[v]]++;
    CHECK_FALSE(part.is_tail(static_cast<NodeId>(v)));
  }
  for (int c : per_class) CHECK(c <= 10);

  // no val/test node in the labeled mask
  for (NodeId v : split.val_nodes)
    CHECK_FALSE(std::binary_search(split.labeled_train.begin(), split.labeled_train.end(),
                                   static_cast<std::int64_t>(v)));

  // seeds change the shuffle, not the sizes
  auto split2 = make_tail_split(g, part, 10, 6);
  CHECK(split2.val_nodes.size() == split.val_nodes.size());
  CHECK(split2.test_nodes.size() == split.test_nodes.size());
  CHECK(split2.val_nodes != split.val_nodes);
  // same seed reproduces
  auto split3 = make_tail_split(g, part, 10, 5);
  CHECK(split3.val_nodes == split.val_nodes);
  CHECK(split3.labeled_train == split.labeled_train);

  // 30 tails -> 20 val / 10 test arithmetic
  REQUIRE(part.tails.size() >= 30);
  auto s30 = make_tail_split(g, [&] {
    NodePartition p = part;
    p.tails.assign(part.tails.begin(), part.tails.begin() + 30);
    return p;
  }(), 10, 1);
  CHECK(s30.val_nodes.size() == 20);
  CHECK(s30.test_nodes.size() == 10);
}

TEST_CASE("make_tail_split warns on classes short of the label budget") {
  Graph g = generate_powerlaw(30, 2, 6, 5, 3);  // 6 nodes/class, tails removed
  auto part = partition_nodes(pagerank(g), {});
  auto split = make_tail_split(g, part, 10, 2);
  CHECK(split.short_classes > 0);
}

TEST_CASE("make_standard_split: exact budgets and disjointness") {
  Graph g = generate_powerlaw(400, 2, 8, 4, 23);
  auto split = make_standard_split(g, 20, 100, 150, 9);
  CHECK(split.labeled_train.size() == 80);  // 20 x 4
  CHECK(split.val_nodes.size() == 100);
  CHECK(split.test_nodes.size() == 150);
  std::set<std::int64_t> seen(split.labeled_train.begin(), split.labeled_train.end());
  for (NodeId v : split.val_nodes) CHECK(seen.insert(v).second);
  for (NodeId v : split.test_nodes) CHECK(seen.insert(v).second);

  CHECK_THROWS(make_standard_split(g, 20, 300, 300, 9));  // budget overflow
}

TEST_CASE("make_link_split: 7:1:2 ratios and clean negatives") {
  Graph g = generate_powerlaw(60, 2, 6, 3, 29);
  const auto m = g.num_edges();
  auto split = make_link_split(g, 4);
  CHECK(static_cast<std::int64_t>(split.train_pos.size()) == m * 7 / 10);
  CHECK(static_cast<std::int64_t>(split.val_pos.size()) == m / 10);
  CHECK(split.train_pos.size() + split.val_pos.size() + split.test_pos.size() ==
        static_cast<std::size_t>(m));
  CHECK(split.val_neg.size() == split.val_pos.size());
  CHECK(split.test_neg.size() == split.test_pos.size());

  // the training message-passing graph holds exactly the train edges
  CHECK(split.train_graph.num_edges() == static_cast<std::int64_t>(split.train_pos.size()));
  for (auto [u, v] : split.train_pos) CHECK(split.train_graph.has_edge(u, v));

  // negatives never intersect any positive edge
  for (const auto& e : split.val_neg) CHECK_FALSE(g.has_edge(e.first, e.second));
  for (const auto& e : split.test_neg) CHECK_FALSE(g.has_edge(e.first, e.second));

  // val/test negatives are fixed for a seed; train negatives resample
  auto split2 = make_link_split(g, 4);
  CHECK(split2.val_neg == split.val_neg);
  CHECK(split2.test_neg == split.test_neg);
  std::mt19937_64 rng1(1), rng2(1), rng3(2);
  CHECK(split.fresh_train_negatives(rng1) == split.fresh_train_negatives(rng2));
  CHECK(split.fresh_train_negatives(std::ref(rng1)) != split.fresh_train_negatives(rng3));

  // "100 edges -> 70/10/20"
  Graph g100 = generate_powerlaw(101, 1, 4, 2, 77);
  REQUIRE(g100.num_edges() == 100);
  auto s100 = make_link_split(g100, 1);
  CHECK(s100.train_pos.size() == 70);
  CHECK(s100.val_pos.size() == 10);
  CHECK(s100.test_pos.size() == 20);
}
