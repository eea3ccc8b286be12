#include "saug/pseudo_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace saug {

void GenConfig::validate() const {
  if (noise_dim < 1 || gen_hidden < 1 || gen_layers < 1 || d_steps_per_g < 1 || epochs < 1 ||
      dis_hidden < 1)
    throw std::invalid_argument("GenConfig: all counts must be >= 1");
  if (alpha < 0.0 || beta < 0.0)
    throw std::invalid_argument("GenConfig: alpha and beta must be >= 0");
}

SimilarTargets select_similar_neighbors(const Graph& g_prime, const std::vector<NodeId>& tails) {
  const Matrix& x = g_prime.features();
  const std::int64_t d = x.cols();
  std::vector<double> norms(g_prime.num_nodes());
  for (NodeId v = 0; v < g_prime.num_nodes(); ++v) {
    double s = 0.0;
    for (std::int64_t j = 0; j < d; ++j) s += x(v, j) * x(v, j);
    norms[v] = std::sqrt(s);
  }
  auto cosine = [&](NodeId a, NodeId b) {
    if (norms[a] == 0.0 || norms[b] == 0.0) return 0.0;
    double s = 0.0;
    for (std::int64_t j = 0; j < d; ++j) s += x(a, j) * x(b, j);
    return s / (norms[a] * norms[b]);
  };

  SimilarTargets out;
  std::vector<std::vector<double>> rows;
  for (NodeId tail : tails) {
    auto nb = g_prime.neighbors(tail);
    if (nb.empty()) {
      out.skipped_isolated.push_back(tail);
      continue;
    }
    NodeId best = -1;
    double best_cos = -2.0;
    for (NodeId j : nb) {
      const double c = cosine(tail, j);
      if (c > best_cos) {  // neighbors ascend, so ties keep the lowest id
        best_cos = c;
        best = j;
      }
    }
    out.pairs.emplace_back(tail, best);
    out.target_labels.push_back(g_prime.labels()[best]);
    rows.emplace_back(x.row(best), x.row(best) + d);
  }
  out.target_features = Matrix(static_cast<std::int64_t>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(),
              out.target_features.row(static_cast<std::int64_t>(i)));
  return out;
}

Generator::Generator(const GenConfig& cfg, std::int64_t feature_dim, std::uint64_t init_seed)
    : noise_dim_(cfg.noise_dim), feature_dim_(feature_dim) {
  cfg.validate();
  dims_.push_back(cfg.noise_dim);
  for (std::int64_t l = 0; l + 1 < cfg.gen_layers; ++l) dims_.push_back(cfg.gen_hidden);
  dims_.push_back(feature_dim);
  std::mt19937_64 rng(init_seed);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(dims_[l] + dims_[l + 1]));
    std::uniform_real_distribution<double> glorot(-bound, bound);
    Matrix w(dims_[l], dims_[l + 1]);
    for (std::int64_t i = 0; i < w.size(); ++i) w.data()[i] = glorot(rng);
    weights_.push_back(ad::Tensor::parameter(std::move(w)));
    biases_.push_back(ad::Tensor::parameter(Matrix(1, dims_[l + 1])));
  }
}

void Generator::set_feature_bounds(std::vector<double> lo, std::vector<double> hi) {
  lo_ = std::move(lo);
  hi_ = std::move(hi);
}

ad::Tensor Generator::forward(const Matrix& noise) const {
  if (noise.cols() != noise_dim_) throw std::invalid_argument("Generator: noise width mismatch");
  ad::Tensor h = ad::Tensor::constant(noise);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ad::add_rowvec(ad::matmul(h, weights_[l]), biases_[l]);
    if (l + 1 < weights_.size()) h = ad::relu(h);
  }
  if (!lo_.empty()) h = ad::clamp_cols(h, lo_, hi_);
  return h;
}

Matrix Generator::generate(const Matrix& noise) const { return forward(noise).value(); }

Matrix Generator::sample_noise(std::int64_t rows, std::mt19937_64& rng) const {
  Matrix z(rows, noise_dim_);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::int64_t i = 0; i < z.size(); ++i) z.data()[i] = gauss(rng);
  return z;
}

std::vector<ad::Tensor> Generator::parameters() const {
  std::vector<ad::Tensor> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

std::vector<Matrix> Generator::snapshot_parameters() const {
  std::vector<Matrix> snap;
  for (const auto& p : parameters()) snap.push_back(p.value());
  return snap;
}

void Generator::restore_parameters(const std::vector<Matrix>& snap) {
  auto params = parameters();
  if (snap.size() != params.size())
    throw std::invalid_argument("Generator::restore_parameters: size mismatch");
  for (std::size_t i = 0; i < snap.size(); ++i) {
    if (!snap[i].same_shape(params[i].value()))
      throw std::invalid_argument("Generator::restore_parameters: shape mismatch");
    params[i].mutable_value() = snap[i];
  }
}

namespace {

/// Structure of g_prime plus one zero-featured pseudo node per target pair,
/// carrying the target labels and pseudo flags; features are patched in per
/// epoch.
Graph build_training_structure(const Graph& g_prime, const SimilarTargets& targets) {
  GraphDelta delta;
  const std::int64_t d = g_prime.features().cols();
  for (std::int64_t k = 0; k < targets.count(); ++k) {
    GraphDelta::NewNode node;
    node.features.assign(d, 0.0);
    node.label = targets.target_labels[k];
    node.pseudo_flag = false;
    delta.added_nodes.push_back(std::move(node));
    delta.added_edges.emplace_back(g_prime.num_nodes() + k, targets.pairs[k].first);
  }
  return apply_delta(g_prime, delta);
}

std::pair<std::vector<double>, std::vector<double>> feature_bounds(const Matrix& x) {
  std::vector<double> lo(x.cols(), 0.0), hi(x.cols(), 0.0);
  for (std::int64_t j = 0; j < x.cols(); ++j) {
    lo[j] = hi[j] = x(0, j);
    for (std::int64_t i = 1; i < x.rows(); ++i) {
      lo[j] = std::min(lo[j], x(i, j));
      hi[j] = std::max(hi[j], x(i, j));
    }
  }
  return {lo, hi};
}

std::shared_ptr<const SparseCsr> combined_feature_csr(const Matrix& real, const Matrix& gen) {
  Matrix full(real.rows() + gen.rows(), real.cols());
  std::copy(real.data(), real.data() + real.size(), full.data());
  std::copy(gen.data(), gen.data() + gen.size(), full.data() + real.size());
  return SparseCsr::from_dense(full);
}

ad::Tensor reg_term(ad::Tensor loss, const std::vector<ad::Tensor>& params, double coeff) {
  if (coeff == 0.0) return loss;
  for (const auto& p : params) loss = ad::add(loss, ad::scale(ad::sum_squares(p), coeff));
  return loss;
}

}  // namespace

GanResult train_generative(const Graph& g_prime, const SimilarTargets& targets,
                           const std::vector<std::int64_t>& labeled_rows, const GenConfig& cfg) {
  cfg.validate();
  if (targets.count() == 0) throw std::invalid_argument("train_generative: no targets");
  const std::int64_t n_real = g_prime.num_nodes();
  const std::int64_t n_ps = targets.count();
  const std::int64_t d = g_prime.features().cols();
  const int num_classes = g_prime.num_classes();

  const Graph g_struct = build_training_structure(g_prime, targets);
  GraphOps ops = GraphOps::build_structure(g_struct, /*need_sage=*/false);
  const auto xr_csr = SparseCsr::from_dense(g_prime.features());

  GanResult res;
  res.generator = Generator(cfg, d, cfg.seed * 0x9e3779b97f4a7c15ull + 1);
  auto [lo, hi] = feature_bounds(g_prime.features());
  res.generator.set_feature_bounds(lo, hi);

  res.discriminator = GnnModel(
      {{d, cfg.dis_hidden, Aggregator::kGcn},
       {cfg.dis_hidden, static_cast<std::int64_t>(num_classes) + 1, Aggregator::kGcn}},
      /*dropout=*/0.0, cfg.seed * 0x9e3779b97f4a7c15ull + 2);

  std::mt19937_64 noise_rng(cfg.seed * 0x9e3779b97f4a7c15ull + 3);
  std::mt19937_64 drop_rng(cfg.seed * 0x9e3779b97f4a7c15ull + 4);

  std::vector<std::int64_t> ce_rows = labeled_rows;
  for (std::int64_t k = 0; k < n_ps; ++k)
    if (targets.target_labels[k] != kUnlabeled) ce_rows.push_back(n_real + k);
  const auto& flags = g_struct.pseudo_flags();

  auto d_params = res.discriminator.parameters();
  auto g_params = res.generator.parameters();
  AdamOptimizer adam_d(d_params, cfg.lr, /*weight_decay=*/0.0);
  AdamOptimizer adam_g(g_params, cfg.lr, /*weight_decay=*/0.0);

  const ad::Tensor w1 = res.discriminator.weight(0), b1 = res.discriminator.bias(0);
  const ad::Tensor w2 = res.discriminator.weight(1), b2 = res.discriminator.bias(1);

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix noise = res.generator.sample_noise(n_ps, noise_rng);
    const Matrix gen_feats = res.generator.generate(noise);  // detached for D steps

    GraphOps epoch_ops = ops;
    epoch_ops.x_csr = combined_feature_csr(g_prime.features(), gen_feats);

    double d_loss_val = 0.0;
    for (std::int64_t step = 0; step < cfg.d_steps_per_g; ++step) {
      ad::Tensor out =
          gnn_forward(res.discriminator, epoch_ops, std::monostate{}, /*training=*/true, drop_rng);
      ad::Tensor class_logits = ad::slice_cols(out, 0, num_classes);
      ad::Tensor pseudo_logit = ad::slice_cols(out, num_classes, num_classes + 1);
      ad::Tensor d_loss = ad::add(
          ce_rows.empty()
              ? ad::Tensor::scalar(0.0)
              : ad::masked_softmax_ce(class_logits, g_struct.labels(), ce_rows),
          ad::bce_rows_vs_flags(pseudo_logit, flags));
      d_loss = reg_term(d_loss, d_params, cfg.beta);
      const double lv = d_loss.item();
      if (!std::isfinite(lv))
        throw std::runtime_error("train_generative: non-finite discriminator loss at epoch " +
                                 std::to_string(epoch));
      ad::backward(d_loss);
      adam_d.step();
      d_loss_val = lv;
    }

    // generator step: gradients flow through the discriminator into G
    ad::Tensor x_gen = res.generator.forward(noise);
    ad::Tensor g_loss = ad::sse_rows(x_gen, targets.target_features);
    g_loss = reg_term(g_loss, g_params, cfg.alpha);
    if (cfg.adv_weight != 0.0) {
      ad::Tensor xw = ad::concat_rows(ad::spmm(xr_csr, w1), ad::matmul(x_gen, w1));
      ad::Tensor h1 = ad::relu(ad::add_rowvec(ad::spmm(ops.gcn_norm, xw), b1));
      ad::Tensor out2 = ad::add_rowvec(ad::spmm(ops.gcn_norm, ad::matmul(h1, w2)), b2);
      ad::Tensor pseudo_logit = ad::slice_cols(out2, num_classes, num_classes + 1);
      ad::Tensor adv = ad::mean_log_one_minus_sigmoid(pseudo_logit, n_real, n_real + n_ps);
      g_loss = ad::add(g_loss, ad::scale(adv, cfg.adv_weight));
    }
    const double gv = g_loss.item();
    if (!std::isfinite(gv))
      throw std::runtime_error("train_generative: non-finite generator loss at epoch " +
                               std::to_string(epoch));
    ad::backward(g_loss);
    adam_g.step();

    res.trace.dis_loss.push_back(d_loss_val);
    res.trace.gen_loss.push_back(gv);
  }
  return res;
}

std::pair<Graph, std::vector<PseudoManifestEntry>> inject_pseudo_nodes(
    const Graph& g_prime, const Generator& generator, const SimilarTargets& targets,
    const GenConfig& cfg) {
  const std::int64_t n_ps = targets.count();
  std::vector<PseudoManifestEntry> manifest;
  if (n_ps == 0) return {g_prime, manifest};

  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 7);
  const Matrix noise = generator.sample_noise(n_ps, rng);
  const Matrix feats = generator.generate(noise);

  GraphDelta delta;
  for (std::int64_t k = 0; k < n_ps; ++k) {
    GraphDelta::NewNode node;
    node.features.assign(feats.row(k), feats.row(k) + feats.cols());
    node.label = targets.target_labels[k];
    node.pseudo_flag = false;
    delta.added_nodes.push_back(std::move(node));
    const NodeId pseudo_id = g_prime.num_nodes() + k;
    delta.added_edges.emplace_back(pseudo_id, targets.pairs[k].first);
    manifest.push_back({pseudo_id, targets.pairs[k].first, targets.pairs[k].second,
                        targets.target_labels[k]});
  }
  return {apply_delta(g_prime, delta), std::move(manifest)};
}

void save_manifest(const std::vector<PseudoManifestEntry>& manifest,
                   const std::filesystem::path& file) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  for (const auto& e : manifest) {
    nlohmann::json j{{"pseudo_id", e.pseudo_id},
                     {"tail_id", e.tail_id},
                     {"source_neighbor_id", e.source_neighbor_id},
                     {"label", e.label}};
    f << j.dump() << '\n';
  }
}

double discriminator_balanced_accuracy(const GanResult& gan, const Graph& g_prime,
                                       const SimilarTargets& targets, std::uint64_t noise_seed) {
  const std::int64_t n_real = g_prime.num_nodes();
  const std::int64_t n_ps = targets.count();
  if (n_ps == 0) throw std::invalid_argument("discriminator_balanced_accuracy: no pseudo nodes");

  const Graph g_struct = build_training_structure(g_prime, targets);
  GraphOps ops = GraphOps::build_structure(g_struct, false);
  std::mt19937_64 rng(noise_seed);
  const Matrix noise = gan.generator.sample_noise(n_ps, rng);
  ops.x_csr = combined_feature_csr(g_prime.features(), gan.generator.generate(noise));

  const Matrix out = gnn_infer(gan.discriminator, ops);
  const std::int64_t col = g_prime.num_classes();
  double real_hit = 0.0, pseudo_hit = 0.0;
  for (std::int64_t i = 0; i < n_real; ++i)
    if (out(i, col) > 0.0) real_hit += 1.0;
  for (std::int64_t i = n_real; i < n_real + n_ps; ++i)
    if (out(i, col) <= 0.0) pseudo_hit += 1.0;
  return 0.5 * (real_hit / static_cast<double>(n_real) +
                pseudo_hit / static_cast<double>(n_ps));
}

}  // namespace saug
