#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "saug/graph.hpp"
#include "saug/tensor.hpp"

namespace saug {

enum class Aggregator { kGcn, kSageMean };

Aggregator aggregator_from_string(const std::string& s);
std::string to_string(Aggregator a);

struct LayerSpec {
  std::int64_t in_dim = 0;
  std::int64_t out_dim = 0;
  Aggregator agg = Aggregator::kGcn;
};

/// Parameter count implied by the specs (weights + biases).
std::int64_t parameter_count(const std::vector<LayerSpec>& specs);

/// Message-passing model: per layer W (in x out for gcn, 2*in x out for
/// sage-mean) and bias (1 x out). ReLU between layers, none after the last;
/// dropout on hidden activations in training mode.
class GnnModel {
 public:
  GnnModel() = default;
  GnnModel(std::vector<LayerSpec> specs, double dropout_rate, std::uint64_t init_seed);

  const std::vector<LayerSpec>& specs() const { return specs_; }
  double dropout_rate() const { return dropout_rate_; }
  std::int64_t num_layers() const { return static_cast<std::int64_t>(specs_.size()); }

  ad::Tensor weight(std::int64_t l) const { return weights_[l]; }
  ad::Tensor bias(std::int64_t l) const { return biases_[l]; }
  std::vector<ad::Tensor> parameters() const;

  /// Detached copies of all parameter values, and their restoration.
  std::vector<Matrix> snapshot_parameters() const;
  void restore_parameters(const std::vector<Matrix>& snap);

 private:
  std::vector<LayerSpec> specs_;
  std::vector<ad::Tensor> weights_;
  std::vector<ad::Tensor> biases_;
  double dropout_rate_ = 0.5;
};

/// Propagation operators precomputed from a graph:
///   gcn_norm = D^-1/2 (A+I) D^-1/2 with self loops
///   mean_nbr = D^-1 A (zero rows for isolated nodes)
///   x_csr    = features as CSR, mx_csr = mean_nbr * x_csr (sage only)
struct GraphOps {
  std::shared_ptr<const SparseCsr> gcn_norm;
  std::shared_ptr<const SparseCsr> mean_nbr;
  std::shared_ptr<const SparseCsr> x_csr;
  std::shared_ptr<const SparseCsr> mx_csr;

  static GraphOps build(const Graph& g, bool need_sage);
  /// Operators only (no feature CSRs); input supplied as a dense tensor.
  static GraphOps build_structure(const Graph& g, bool need_sage);
};

/// Input features: either the graph's own CSR matrices (fast constant path)
/// or a dense tensor (keeps gradients, used by the generative module).
using FeatureSource = std::variant<std::monostate, ad::Tensor>;

/// Full forward pass. Uses ops.x_csr when x holds monostate. Throws on
/// dimension mismatch or on a non-finite activation (message names the
/// offending layer).
ad::Tensor gnn_forward(const GnnModel& model, const GraphOps& ops, const FeatureSource& x,
                       bool training, std::mt19937_64& rng);

/// Inference-mode forward returning plain values.
Matrix gnn_infer(const GnnModel& model, const GraphOps& ops);

// ---- losses ---------------------------------------------------------------

/// mean BCE of sigmoid(z_i . z_j) over pos (target 1) and neg (target 0)
/// pairs, plus lambda * sum of squared parameters. Requires |neg| == |pos|.
ad::Tensor link_predictor_loss(const ad::Tensor& z_link, std::vector<EdgePair> pos,
                               std::vector<EdgePair> neg,
                               const std::vector<ad::Tensor>& params, double lambda);

/// mean softmax cross-entropy over masked rows plus mu * sum of squared
/// parameters. Masked rows must carry valid labels.
ad::Tensor classifier_loss(const ad::Tensor& z_label, const std::vector<int>& labels,
                           std::vector<std::int64_t> mask_rows,
                           const std::vector<ad::Tensor>& params, double mu);

/// argmax over softmax(z_label) rows; softmax is monotone so raw logits work.
std::vector<int> predict_labels(const Matrix& z_label);

// ---- optimizer / training -------------------------------------------------

class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<ad::Tensor> params, double lr, double weight_decay,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  /// One update from the gradients currently stored on the parameters.
  void step();
  double lr() const { return lr_; }

 private:
  std::vector<ad::Tensor> params_;
  std::vector<Matrix> m_, v_;
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

struct TrainOptions {
  std::int64_t epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  /// Early stop after this many epochs without validation improvement;
  /// ignored when no validation closure is given. <= 0 disables.
  std::int64_t patience = 30;
};

struct TrainTrace {
  std::vector<double> train_loss;
  std::vector<double> val_metric;  // empty without validation
  std::int64_t best_epoch = -1;    // epoch whose parameters were kept
  std::int64_t epochs_run = 0;
};

using ObjectiveFn = std::function<ad::Tensor(std::int64_t epoch)>;
using ValidationFn = std::function<double(std::int64_t epoch)>;  // lower is better

/// Adam loop over the model parameters. With a validation closure the
/// parameters with the best validation value are restored at the end;
/// otherwise the final state is kept. Aborts on a non-finite loss, naming
/// the epoch. Deterministic for fixed seeds in the closures.
TrainTrace train(GnnModel& model, const ObjectiveFn& objective,
                 const std::optional<ValidationFn>& validation, const TrainOptions& opts);

}  // namespace saug
