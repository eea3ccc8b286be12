#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "saug/graph.hpp"
#include "saug/matrix.hpp"
#include "saug/sparse.hpp"

namespace saug::ad {

/// One recorded value in the computation tape.
struct Node {
  Matrix value;
  Matrix grad;  // allocated by backward(), same shape as value
  bool requires_grad = false;
  bool backward_done = false;
  std::vector<std::shared_ptr<Node>> parents;
  // accumulates self.grad into the parents' grads
  std::function<void(Node&)> backward_fn;
};

/// Handle to a tape node. Copies share the node. Building expressions from
/// Tensors records the tape; backward() walks it once in reverse
/// topological order.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix m);
  static Tensor parameter(Matrix m);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  std::int64_t rows() const { return node_->value.rows(); }
  std::int64_t cols() const { return node_->value.cols(); }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const { return node_->value(0, 0); }

  std::shared_ptr<Node> node() const { return node_; }
  static Tensor wrap(std::shared_ptr<Node> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
  }

 private:
  std::shared_ptr<Node> node_;
};

/// Reverse pass from a scalar loss. Visits every reachable tape node exactly
/// once. Throws if the loss is not scalar, does not require grad (detached),
/// or was already backpropagated.
void backward(const Tensor& loss);

// ---- ops ----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// s is a constant; gradient flows only into x.
Tensor spmm(std::shared_ptr<const SparseCsr> s, const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);           // same shape
Tensor add_rowvec(const Tensor& h, const Tensor& bias); // bias is 1 x C
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);
/// Inverted dropout: keeps with prob 1-rate and scales by 1/(1-rate).
/// Identity when training is false or rate == 0.
Tensor dropout(const Tensor& a, double rate, std::mt19937_64& rng, bool training);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_rows(const Tensor& a, std::int64_t r0, std::int64_t r1);
Tensor slice_cols(const Tensor& a, std::int64_t c0, std::int64_t c1);
/// Columnwise clamp to [lo[j], hi[j]]; pass-through gradient inside range.
Tensor clamp_cols(const Tensor& a, std::vector<double> lo, std::vector<double> hi);
Tensor sum_squares(const Tensor& a);  // scalar

/// Mean softmax cross-entropy over the given rows; labels indexed per row.
Tensor masked_softmax_ce(const Tensor& logits, std::vector<int> labels,
                         std::vector<std::int64_t> rows);
/// Mean BCE of sigmoid(z_u . z_v) against 1 for pos pairs, 0 for neg pairs.
Tensor edge_bce(const Tensor& z, std::vector<EdgePair> pos, std::vector<EdgePair> neg);
/// Mean BCE of sigmoid(logits(i,0)) against flags[i] over all rows.
Tensor bce_rows_vs_flags(const Tensor& logits_col, std::vector<std::uint8_t> flags);
/// Mean of log(1 - sigmoid(logits(i,0))) over rows [r0, r1). The classic
/// minimax generator term; minimizing it pushes the logits up.
Tensor mean_log_one_minus_sigmoid(const Tensor& logits_col, std::int64_t r0, std::int64_t r1);
/// Sum of squared row distances to fixed targets (same shape).
Tensor sse_rows(const Tensor& x, Matrix targets);

// log/σ inputs are clamped to [kProbEps, 1-kProbEps] before taking logs
constexpr double kProbEps = 1e-12;

double sigmoid(double x);

}  // namespace saug::ad
