#include "saug/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace saug {

Aggregator aggregator_from_string(const std::string& s) {
  if (s == "gcn") return Aggregator::kGcn;
  if (s == "sage-mean") return Aggregator::kSageMean;
  throw std::invalid_argument("unknown aggregator '" + s + "'");
}

std::string to_string(Aggregator a) {
  return a == Aggregator::kGcn ? "gcn" : "sage-mean";
}

std::int64_t parameter_count(const std::vector<LayerSpec>& specs) {
  std::int64_t n = 0;
  for (const auto& s : specs) {
    const std::int64_t win = s.agg == Aggregator::kSageMean ? 2 * s.in_dim : s.in_dim;
    n += win * s.out_dim + s.out_dim;
  }
  return n;
}

GnnModel::GnnModel(std::vector<LayerSpec> specs, double dropout_rate, std::uint64_t init_seed)
    : specs_(std::move(specs)), dropout_rate_(dropout_rate) {
  if (specs_.empty()) throw std::invalid_argument("GnnModel: at least one layer required");
  for (std::size_t l = 1; l < specs_.size(); ++l)
    if (specs_[l].in_dim != specs_[l - 1].out_dim)
      throw std::invalid_argument("GnnModel: layer dimensions do not chain at layer " +
                                  std::to_string(l));
  std::mt19937_64 rng(init_seed);
  for (const auto& s : specs_) {
    const std::int64_t win = s.agg == Aggregator::kSageMean ? 2 * s.in_dim : s.in_dim;
    const double bound = std::sqrt(6.0 / static_cast<double>(win + s.out_dim));
    std::uniform_real_distribution<double> glorot(-bound, bound);
    Matrix w(win, s.out_dim);
    for (std::int64_t i = 0; i < w.size(); ++i) w.data()[i] = glorot(rng);
    weights_.push_back(ad::Tensor::parameter(std::move(w)));
    biases_.push_back(ad::Tensor::parameter(Matrix(1, s.out_dim)));
  }
}

std::vector<ad::Tensor> GnnModel::parameters() const {
  std::vector<ad::Tensor> out;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

std::vector<Matrix> GnnModel::snapshot_parameters() const {
  std::vector<Matrix> snap;
  for (const auto& p : parameters()) snap.push_back(p.value());
  return snap;
}

void GnnModel::restore_parameters(const std::vector<Matrix>& snap) {
  auto params = parameters();
  if (snap.size() != params.size())
    throw std::invalid_argument("restore_parameters: snapshot size mismatch");
  for (std::size_t i = 0; i < snap.size(); ++i) {
    if (!snap[i].same_shape(params[i].value()))
      throw std::invalid_argument("restore_parameters: parameter shape mismatch");
    params[i].mutable_value() = snap[i];
  }
}

GraphOps GraphOps::build_structure(const Graph& g, bool need_sage) {
  GraphOps ops;
  const NodeId n = g.num_nodes();
  {
    std::vector<std::int64_t> r, c;
    std::vector<double> v;
    r.reserve(g.col_idx().size() + n);
    for (NodeId i = 0; i < n; ++i) {
      const double di = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
      r.push_back(i);
      c.push_back(i);
      v.push_back(di * di);
      for (NodeId j : g.neighbors(i)) {
        const double dj = 1.0 / std::sqrt(static_cast<double>(g.degree(j) + 1));
        r.push_back(i);
        c.push_back(j);
        v.push_back(di * dj);
      }
    }
    ops.gcn_norm = SparseCsr::from_triplets(n, n, r, c, v);
  }
  if (need_sage) {
    std::vector<std::int64_t> r, c;
    std::vector<double> v;
    for (NodeId i = 0; i < n; ++i) {
      const auto d = g.degree(i);
      if (d == 0) continue;
      for (NodeId j : g.neighbors(i)) {
        r.push_back(i);
        c.push_back(j);
        v.push_back(1.0 / static_cast<double>(d));
      }
    }
    ops.mean_nbr = SparseCsr::from_triplets(n, n, r, c, v);
  }
  return ops;
}

GraphOps GraphOps::build(const Graph& g, bool need_sage) {
  GraphOps ops = build_structure(g, need_sage);
  ops.x_csr = SparseCsr::from_dense(g.features());
  if (need_sage) ops.mx_csr = spgemm(*ops.mean_nbr, *ops.x_csr);
  return ops;
}

namespace {

void check_finite_or_throw(const Matrix& m, std::int64_t layer) {
  if (!all_finite(m))
    throw std::runtime_error("gnn_forward: non-finite activation at layer " +
                             std::to_string(layer));
}

}  // namespace

ad::Tensor gnn_forward(const GnnModel& model, const GraphOps& ops, const FeatureSource& x,
                       bool training, std::mt19937_64& rng) {
  const bool sparse_input = std::holds_alternative<std::monostate>(x);
  if (sparse_input && !ops.x_csr)
    throw std::invalid_argument("gnn_forward: ops carry no feature CSR");

  ad::Tensor h;
  for (std::int64_t l = 0; l < model.num_layers(); ++l) {
    const auto& spec = model.specs()[l];
    ad::Tensor w = model.weight(l);
    ad::Tensor pre;
    if (l == 0 && sparse_input) {
      if (ops.x_csr->cols != spec.in_dim)
        throw std::invalid_argument("gnn_forward: input width != layer 0 in_dim");
      if (spec.agg == Aggregator::kGcn) {
        pre = ad::spmm(ops.gcn_norm, ad::spmm(ops.x_csr, w));
      } else {
        // concat(X, MX) @ W == X @ W_top + MX @ W_bot
        ad::Tensor w_top = ad::slice_rows(w, 0, spec.in_dim);
        ad::Tensor w_bot = ad::slice_rows(w, spec.in_dim, 2 * spec.in_dim);
        pre = ad::add(ad::spmm(ops.x_csr, w_top), ad::spmm(ops.mx_csr, w_bot));
      }
    } else {
      ad::Tensor hin = (l == 0) ? std::get<ad::Tensor>(x) : h;
      if (hin.cols() != spec.in_dim)
        throw std::invalid_argument("gnn_forward: width mismatch at layer " + std::to_string(l));
      if (spec.agg == Aggregator::kGcn) {
        pre = ad::spmm(ops.gcn_norm, ad::matmul(hin, w));
      } else {
        pre = ad::matmul(ad::concat_cols(hin, ad::spmm(ops.mean_nbr, hin)), w);
      }
    }
    pre = ad::add_rowvec(pre, model.bias(l));
    check_finite_or_throw(pre.value(), l);
    if (l + 1 < model.num_layers()) {
      h = ad::relu(pre);
      h = ad::dropout(h, model.dropout_rate(), rng, training);
    } else {
      h = pre;
    }
  }
  return h;
}

Matrix gnn_infer(const GnnModel& model, const GraphOps& ops) {
  std::mt19937_64 rng(0);  // unused in inference mode
  return gnn_forward(model, ops, std::monostate{}, /*training=*/false, rng).value();
}

ad::Tensor link_predictor_loss(const ad::Tensor& z_link, std::vector<EdgePair> pos,
                               std::vector<EdgePair> neg,
                               const std::vector<ad::Tensor>& params, double lambda) {
  if (pos.empty()) throw std::invalid_argument("link_predictor_loss: empty edge list");
  if (pos.size() != neg.size())
    throw std::invalid_argument("link_predictor_loss: |neg| must equal |pos|");
  ad::Tensor loss = ad::edge_bce(z_link, std::move(pos), std::move(neg));
  if (lambda != 0.0)
    for (const auto& p : params) loss = ad::add(loss, ad::scale(ad::sum_squares(p), lambda));
  return loss;
}

ad::Tensor classifier_loss(const ad::Tensor& z_label, const std::vector<int>& labels,
                           std::vector<std::int64_t> mask_rows,
                           const std::vector<ad::Tensor>& params, double mu) {
  if (mask_rows.empty()) throw std::invalid_argument("classifier_loss: empty mask");
  ad::Tensor loss = ad::masked_softmax_ce(z_label, labels, std::move(mask_rows));
  if (mu != 0.0)
    for (const auto& p : params) loss = ad::add(loss, ad::scale(ad::sum_squares(p), mu));
  return loss;
}

std::vector<int> predict_labels(const Matrix& z_label) {
  std::vector<int> out(z_label.rows());
  for (std::int64_t i = 0; i < z_label.rows(); ++i) {
    const double* row = z_label.row(i);
    int best = 0;
    for (std::int64_t j = 1; j < z_label.cols(); ++j)
      if (row[j] > row[best]) best = static_cast<int>(j);
    out[i] = best;
  }
  return out;
}

AdamOptimizer::AdamOptimizer(std::vector<ad::Tensor> params, double lr, double weight_decay,
                             double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), weight_decay_(weight_decay),
      beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k].node()->value;
    const auto& grad = params_[k].node()->grad;
    if (grad.size() != value.size())
      throw std::logic_error("AdamOptimizer: parameter has no gradient");
    for (std::int64_t i = 0; i < value.size(); ++i) {
      const double g = grad.data()[i] + weight_decay_ * value.data()[i];
      m_[k].data()[i] = beta1_ * m_[k].data()[i] + (1.0 - beta1_) * g;
      v_[k].data()[i] = beta2_ * v_[k].data()[i] + (1.0 - beta2_) * g * g;
      const double mhat = m_[k].data()[i] / bc1;
      const double vhat = v_[k].data()[i] / bc2;
      value.data()[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

TrainTrace train(GnnModel& model, const ObjectiveFn& objective,
                 const std::optional<ValidationFn>& validation, const TrainOptions& opts) {
  if (opts.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  AdamOptimizer adam(model.parameters(), opts.lr, opts.weight_decay);
  TrainTrace trace;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_params;
  std::int64_t since_best = 0;

  for (std::int64_t epoch = 0; epoch < opts.epochs; ++epoch) {
    ad::Tensor loss = objective(epoch);
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value))
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
    ad::backward(loss);
    adam.step();
    trace.train_loss.push_back(loss_value);
    trace.epochs_run = epoch + 1;

    if (validation) {
      const double val = (*validation)(epoch);
      trace.val_metric.push_back(val);
      if (val < best_val) {
        best_val = val;
        best_params = model.snapshot_parameters();
        trace.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= opts.patience && opts.patience > 0) {
        break;
      }
    }
  }
  if (validation && !best_params.empty()) {
    model.restore_parameters(best_params);
  } else {
    trace.best_epoch = trace.epochs_run - 1;
  }
  return trace;
}

}  // namespace saug
