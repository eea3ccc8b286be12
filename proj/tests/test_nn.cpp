#include <omp.h>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "saug/encoders.hpp"
#include "saug/nn.hpp"
#include "saug/sampling.hpp"
#include "saug/synthetic.hpp"

using namespace saug;
using ad::Tensor;

namespace {

Graph make_graph(NodeId n, std::vector<EdgePair> edges, Matrix x, std::vector<int> labels,
                 int classes) {
  return Graph(n, std::move(edges), std::move(x), std::move(labels),
               std::vector<std::uint8_t>(n, 1), classes);
}

void set_weight(GnnModel& m, std::int64_t layer, const Matrix& w) {
  m.weight(layer).mutable_value() = w;
}

Matrix identity(std::int64_t n) {
  Matrix m(n, n);
  for (std::int64_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("gcn layer: isolated node with identity weight passes through") {
  Matrix x(1, 2);
  x(0, 0) = 3.0;
  x(0, 1) = -2.0;
  Graph g = make_graph(1, {}, x, {0}, 1);
  GnnModel model({{2, 2, Aggregator::kGcn}}, 0.0, 1);
  set_weight(model, 0, identity(2));
  model.bias(0).mutable_value() = Matrix(1, 2);
  GraphOps ops = GraphOps::build(g, false);
  Matrix out = gnn_infer(model, ops);
  CHECK(out(0, 0) == doctest::Approx(3.0));
  CHECK(out(0, 1) == doctest::Approx(-2.0));
}

TEST_CASE("gcn layer: two connected nodes average under symmetric normalization") {
  Matrix x = identity(2);  // features [1,0] and [0,1]
  Graph g = make_graph(2, {{0, 1}}, x, {0, 1}, 2);
  GnnModel model({{2, 2, Aggregator::kGcn}}, 0.0, 1);
  set_weight(model, 0, identity(2));
  model.bias(0).mutable_value() = Matrix(1, 2);
  Matrix out = gnn_infer(model, GraphOps::build(g, false));
  // D_hat = 2I; A_hat = (A+I)/2 -> each row 0.5*own + 0.5*other
  for (std::int64_t i = 0; i < 2; ++i)
    for (std::int64_t j = 0; j < 2; ++j) CHECK(out(i, j) == doctest::Approx(0.5));
}

TEST_CASE("sage-mean layer with stacked identity weights adds the neighbor mean") {
  Matrix x(3, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 1.0;
  x(2, 0) = x(2, 1) = 1.0;
  Graph g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, x, {0, 1, 0}, 2);
  GnnModel model({{2, 2, Aggregator::kSageMean}}, 0.0, 1);
  Matrix w(4, 2);  // [I; I]
  w(0, 0) = w(1, 1) = w(2, 0) = w(3, 1) = 1.0;
  set_weight(model, 0, w);
  model.bias(0).mutable_value() = Matrix(1, 2);
  Matrix out = gnn_infer(model, GraphOps::build(g, true));
  for (NodeId v = 0; v < 3; ++v) {
    for (std::int64_t j = 0; j < 2; ++j) {
      double mean = 0.0;
      for (NodeId u : g.neighbors(v)) mean += x(u, j);
      mean /= 2.0;
      CHECK(out(v, j) == doctest::Approx(x(v, j) + mean));
    }
  }
}

TEST_CASE("gcn forward is permutation-equivariant") {
  Graph g = generate_powerlaw(20, 2, 6, 3, 3);
  GnnModel model({{6, 4, Aggregator::kGcn}, {4, 3, Aggregator::kGcn}}, 0.0, 99);
  Matrix out = gnn_infer(model, GraphOps::build(g, false));

  const NodeId n = g.num_nodes();
  auto perm = [n](NodeId v) { return (v + 11) % n; };
  std::vector<EdgePair> edges;
  for (auto [u, v] : g.edge_list()) edges.push_back(canonical_edge(perm(u), perm(v)));
  Matrix x(n, 6);
  std::vector<int> labels(n);
  for (NodeId v = 0; v < n; ++v) {
    labels[perm(v)] = g.labels()[v];
    for (std::int64_t j = 0; j < 6; ++j) x(perm(v), j) = g.features()(v, j);
  }
  Graph gp = make_graph(n, std::move(edges), std::move(x), std::move(labels), 3);
  Matrix outp = gnn_infer(model, GraphOps::build(gp, false));
  for (NodeId v = 0; v < n; ++v)
    for (std::int64_t j = 0; j < 3; ++j)
      CHECK(outp(perm(v), j) == doctest::Approx(out(v, j)).epsilon(1e-12));
}

TEST_CASE("forward rejects mismatched widths and minimum-one-layer holds") {
  CHECK_THROWS_AS(GnnModel({}, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(GnnModel({{4, 8, Aggregator::kGcn}, {9, 2, Aggregator::kGcn}}, 0.5, 1),
                  std::invalid_argument);

  Graph g = generate_powerlaw(10, 2, 6, 2, 1);
  GnnModel model({{5, 4, Aggregator::kGcn}}, 0.0, 1);  // 5 != 6
  CHECK_THROWS(gnn_infer(model, GraphOps::build(g, false)));
}

TEST_CASE("forward fails fast on a non-finite activation, naming the layer") {
  Graph g = generate_powerlaw(8, 2, 4, 2, 1);
  GnnModel model({{4, 4, Aggregator::kGcn}, {4, 2, Aggregator::kGcn}}, 0.0, 1);
  Matrix w = model.weight(1).value();
  w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  set_weight(model, 1, w);
  try {
    gnn_infer(model, GraphOps::build(g, false));
    FAIL("expected a throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("parameter_count is a pure function of the specs") {
  CHECK(parameter_count({{6, 4, Aggregator::kGcn}, {4, 3, Aggregator::kGcn}}) ==
        6 * 4 + 4 + 4 * 3 + 3);
  CHECK(parameter_count({{6, 4, Aggregator::kSageMean}}) == 12 * 4 + 4);
  GnnModel m({{6, 4, Aggregator::kSageMean}}, 0.0, 1);
  std::int64_t total = 0;
  for (const auto& p : m.parameters()) total += p.value().size();
  CHECK(total == parameter_count(m.specs()));
}

TEST_CASE("link predictor loss: fixed-value examples") {
  Matrix z(4, 2);  // all-zero rows: every dot is 0
  Tensor zt = Tensor::parameter(z);
  Tensor loss = link_predictor_loss(zt, {{0, 1}}, {{2, 3}}, {}, 0.0);
  CHECK(loss.item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // one positive at +20, one negative at -20
  Matrix z2(4, 1);
  z2(0, 0) = 4.0;
  z2(1, 0) = 5.0;   // dot(0,1) = 20
  z2(2, 0) = 4.0;
  z2(3, 0) = -5.0;  // dot(2,3) = -20
  Tensor zt2 = Tensor::parameter(z2);
  Tensor loss2 = link_predictor_loss(zt2, {{0, 1}}, {{2, 3}}, {}, 0.0);
  CHECK(loss2.item() == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-6));
  CHECK(loss2.item() < 3e-9);

  CHECK_THROWS_AS(link_predictor_loss(zt, {}, {}, {}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(link_predictor_loss(zt, {{0, 1}}, {}, {}, 0.0), std::invalid_argument);

  // the regularizer adds lambda * ||params||^2
  Tensor w = Tensor::parameter(identity(2));
  Tensor reg_loss = link_predictor_loss(zt, {{0, 1}}, {{2, 3}}, {w}, 1e-4);
  CHECK(reg_loss.item() == doctest::Approx(std::log(2.0) + 1e-4 * 2.0).epsilon(1e-10));
}

TEST_CASE("classifier loss: fixed-value examples") {
  Matrix z(2, 7);  // uniform logits
  Tensor zt = Tensor::parameter(z);
  std::vector<int> labels{3, 5};
  Tensor loss = classifier_loss(zt, labels, {0, 1}, {}, 0.0);
  CHECK(loss.item() == doctest::Approx(std::log(7.0)).epsilon(1e-12));

  Matrix sat(1, 7);
  for (std::int64_t j = 0; j < 7; ++j) sat(0, j) = j == 2 ? 30.0 : 0.0;
  Tensor satt = Tensor::parameter(sat);
  Tensor loss2 = classifier_loss(satt, {2}, {0}, {}, 0.0);
  CHECK(loss2.item() < 1e-12);

  Matrix two(2, 2);
  two(0, 0) = 1.0;
  two(1, 1) = 1.0;
  Tensor twot = Tensor::parameter(two);
  Tensor loss3 = classifier_loss(twot, {0, 1}, {0, 1}, {}, 0.0);
  CHECK(loss3.item() == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-12));

  CHECK_THROWS_AS(classifier_loss(zt, labels, {}, {}, 0.0), std::invalid_argument);
}

TEST_CASE("losses with zero regularization are non-negative") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix z(6, 3);
    for (std::int64_t i = 0; i < z.size(); ++i) z.data()[i] = gauss(rng);
    Tensor zt = Tensor::parameter(z);
    CHECK(link_predictor_loss(zt, {{0, 1}, {2, 3}}, {{0, 5}, {1, 4}}, {}, 0.0).item() >= 0.0);
    std::vector<int> labels{0, 1, 2, 0, 1, 2};
    CHECK(classifier_loss(zt, labels, {0, 1, 2, 3, 4, 5}, {}, 0.0).item() >= 0.0);
  }
}

TEST_CASE("gradient check: both layer types composed with both losses") {
  // both aggregators against both losses, finite-difference checked
  Graph g = oracle::random_test_graph(8, 0.3, 5, 3, 1234);
  auto pos = g.edge_list();
  std::vector<EdgePair> neg{{0, 7}, {1, 6}, {2, 5}};
  while (neg.size() < pos.size()) neg.push_back(neg[neg.size() % 3]);
  neg.resize(pos.size());

  for (Aggregator agg : {Aggregator::kGcn, Aggregator::kSageMean}) {
    CAPTURE(to_string(agg));
    GraphOps ops = GraphOps::build(g, agg == Aggregator::kSageMean);

    GnnModel lp({{5, 4, agg}, {4, 3, agg}}, 0.0, 777);
    auto lp_params = lp.parameters();
    std::mt19937_64 rng(0);
    auto lp_loss = [&] {
      Tensor z = gnn_forward(lp, ops, std::monostate{}, false, rng);
      return link_predictor_loss(z, pos, neg, lp_params, 1e-4);
    };
    Tensor l1 = lp_loss();
    ad::backward(l1);
    CHECK(oracle::max_gradient_error(lp_params, [&] { return lp_loss().item(); }) < 1e-4);

    GnnModel nc({{5, 4, agg}, {4, 3, agg}}, 0.0, 778);
    auto nc_params = nc.parameters();
    auto nc_loss = [&] {
      Tensor z = gnn_forward(nc, ops, std::monostate{}, false, rng);
      return classifier_loss(z, g.labels(), {0, 1, 2, 3, 4, 5, 6, 7}, nc_params, 1e-4);
    };
    Tensor l2 = nc_loss();
    ad::backward(l2);
    CHECK(oracle::max_gradient_error(nc_params, [&] { return nc_loss().item(); }) < 1e-4);
  }
}

TEST_CASE("Adam with lr=0 leaves parameters unchanged") {
  GnnModel model({{3, 2, Aggregator::kGcn}}, 0.0, 10);
  auto before = model.snapshot_parameters();
  AdamOptimizer adam(model.parameters(), 0.0, 0.0);
  Tensor loss = ad::add(ad::sum_squares(model.weight(0)), ad::sum_squares(model.bias(0)));
  ad::backward(loss);
  adam.step();
  auto after = model.snapshot_parameters();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("train: epochs >= 1 enforced, determinism, non-finite abort") {
  Graph g = generate_powerlaw(20, 2, 6, 2, 4);
  GraphOps ops = GraphOps::build(g, false);
  auto run_once = [&](std::int64_t epochs) {
    GnnModel model({{6, 4, Aggregator::kGcn}, {4, 2, Aggregator::kGcn}}, 0.5, 42);
    std::mt19937_64 rng(42);
    auto params = model.parameters();
    std::vector<std::int64_t> mask;
    for (NodeId v = 0; v < g.num_nodes(); ++v) mask.push_back(v);
    TrainOptions opts;
    opts.epochs = epochs;
    train(
        model,
        [&](std::int64_t) {
          Tensor z = gnn_forward(model, ops, std::monostate{}, true, rng);
          return classifier_loss(z, g.labels(), mask, params, 1e-4);
        },
        std::nullopt, opts);
    return model.snapshot_parameters();
  };
  CHECK_THROWS_AS(run_once(0), std::invalid_argument);
  auto p1 = run_once(15);
  auto p2 = run_once(15);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);  // bit-identical

  GnnModel model({{6, 2, Aggregator::kGcn}}, 0.0, 1);
  TrainOptions opts;
  opts.epochs = 3;
  CHECK_THROWS_WITH_AS(
      train(
          model, [&](std::int64_t) { return Tensor::parameter(Matrix(1, 1, 1.0 / 0.0)); },
          std::nullopt, opts),
      doctest::Contains("epoch 0"), std::runtime_error);
}

TEST_CASE("training is bitwise identical across OpenMP thread counts") {
  Graph g = generate_powerlaw(40, 2, 12, 3, 77);
  GraphOps ops = GraphOps::build(g, true);
  std::vector<std::int64_t> mask;
  for (NodeId v = 0; v < g.num_nodes(); ++v) mask.push_back(v);

  auto run_with_threads = [&](int nt) {
    omp_set_num_threads(nt);
    GnnModel model({{12, 8, Aggregator::kSageMean}, {8, 3, Aggregator::kGcn}}, 0.5, 9);
    std::mt19937_64 rng(9);
    auto params = model.parameters();
    TrainOptions opts;
    opts.epochs = 8;
    train(
        model,
        [&](std::int64_t) {
          ad::Tensor z = gnn_forward(model, ops, std::monostate{}, true, rng);
          return classifier_loss(z, g.labels(), mask, params, 1e-4);
        },
        std::nullopt, opts);
    return model.snapshot_parameters();
  };
  const int old = omp_get_max_threads();
  auto p1 = run_with_threads(1);
  auto p2 = run_with_threads(2);
  omp_set_num_threads(old);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("train restores the best-validation parameters and early-stops") {
  Graph g = generate_powerlaw(24, 2, 6, 2, 8);
  GraphOps ops = GraphOps::build(g, false);
  GnnModel model({{6, 2, Aggregator::kGcn}}, 0.0, 5);
  auto params = model.parameters();
  std::vector<std::int64_t> mask{0, 1, 2, 3, 4, 5};

  // synthetic validation schedule with its minimum at epoch 4
  std::vector<Matrix> snap_at_best;
  TrainOptions opts;
  opts.epochs = 50;
  opts.patience = 5;
  auto trace = train(
      model,
      [&](std::int64_t) {
        std::mt19937_64 rng(0);
        Tensor z = gnn_forward(model, ops, std::monostate{}, true, rng);
        return classifier_loss(z, g.labels(), mask, params, 0.0);
      },
      ValidationFn([&](std::int64_t epoch) {
        const double val = std::abs(static_cast<double>(epoch) - 4.0);
        if (epoch == 4) snap_at_best = model.snapshot_parameters();
        return val;
      }),
      opts);
  CHECK(trace.best_epoch == 4);
  CHECK(trace.epochs_run == 10);  // 4 + patience 5 + 1
  auto now = model.snapshot_parameters();
  for (std::size_t i = 0; i < now.size(); ++i) CHECK(now[i] == snap_at_best[i]);
}

TEST_CASE("pretrain_encoders: shapes, determinism, degenerate labels") {
  Graph g = generate_powerlaw(30, 2, 8, 3, 6);
  std::vector<std::int64_t> mask;
  for (NodeId v = 0; v < g.num_nodes(); ++v) mask.push_back(v);
  EncoderConfig lp = default_link_config();
  EncoderConfig nc = default_label_config(g.num_classes());
  lp.epochs = 30;
  nc.epochs = 30;

  auto r1 = pretrain_encoders(g, mask, lp, nc, 11);
  CHECK(r1.embeddings.z_link.rows() == g.num_nodes());
  CHECK(r1.embeddings.z_link.cols() == 16);
  CHECK(r1.embeddings.z_label.rows() == g.num_nodes());
  CHECK(r1.embeddings.z_label.cols() == g.num_classes());

  auto r2 = pretrain_encoders(g, mask, lp, nc, 11);
  CHECK(r1.embeddings.z_link == r2.embeddings.z_link);
  CHECK(r1.embeddings.z_label == r2.embeddings.z_label);

  // a single labeled class collapses the classifier onto it
  Graph g1(g.num_nodes(), g.edge_list(), g.features(), std::vector<int>(g.num_nodes(), 1),
           g.pseudo_flags(), 3);
  auto r3 = pretrain_encoders(g1, mask, lp, nc, 11);
  auto pred = predict_labels(r3.embeddings.z_label);
  for (int p : pred) CHECK(p == 1);

  CHECK_THROWS_AS(pretrain_encoders(g, {}, lp, nc, 1), std::invalid_argument);
}

TEST_CASE("pretrained link scores separate two feature-distinct cliques") {
  // two disjoint cliques with distinct one-hot features
  std::vector<EdgePair> edges;
  for (NodeId u = 0; u < 6; ++u)
    for (NodeId v = u + 1; v < 6; ++v) edges.push_back({u, v});
  for (NodeId u = 6; u < 12; ++u)
    for (NodeId v = u + 1; v < 12; ++v) edges.push_back({u, v});
  Matrix x(12, 2);
  for (NodeId v = 0; v < 12; ++v) x(v, v < 6 ? 0 : 1) = 1.0;
  std::vector<int> labels(12);
  for (NodeId v = 6; v < 12; ++v) labels[v] = 1;
  Graph g = make_graph(12, std::move(edges), std::move(x), std::move(labels), 2);

  std::vector<std::int64_t> mask;
  for (NodeId v = 0; v < 12; ++v) mask.push_back(v);
  EncoderConfig lp = default_link_config();
  EncoderConfig nc = default_label_config(2);
  lp.epochs = 200;
  nc.epochs = 20;
  auto res = pretrain_encoders(g, mask, lp, nc, 3);

  auto score = [&](NodeId a, NodeId b) {
    double dot = 0.0;
    for (std::int64_t j = 0; j < 16; ++j)
      dot += res.embeddings.z_link(a, j) * res.embeddings.z_link(b, j);
    return 1.0 / (1.0 + std::exp(-dot));
  };
  double intra = 0.0, inter = 0.0;
  int intra_n = 0, inter_n = 0;
  for (NodeId a = 0; a < 6; ++a)
    for (NodeId b = a + 1; b < 6; ++b) {
      intra += score(a, b);
      intra_n++;
    }
  for (NodeId a = 0; a < 6; ++a)
    for (NodeId b = 6; b < 12; ++b) {
      inter += score(a, b);
      inter_n++;
    }
  CHECK(intra / intra_n > inter / inter_n);
}
