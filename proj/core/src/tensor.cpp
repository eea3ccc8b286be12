#include "saug/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace saug::ad {

namespace {

std::shared_ptr<Node> make_node(Matrix value, std::vector<std::shared_ptr<Node>> parents,
                                std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backward_fn = std::move(fn);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

// C += A * B, row-parallel, fixed accumulation order per element
void gemm_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::int64_t n = a.rows(), k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double* dst = c.row(i);
    const double* arow = a.row(i);
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (std::int64_t j = 0; j < m; ++j) dst[j] += av * brow[j];
    }
  }
}

// dA += dC * B^T
void gemm_abt_acc(const Matrix& dc, const Matrix& b, Matrix& da) {
  const std::int64_t n = dc.rows(), m = dc.cols(), k = b.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* dcrow = dc.row(i);
    double* darow = da.row(i);
    for (std::int64_t p = 0; p < k; ++p) {
      const double* brow = b.row(p);
      double acc = 0.0;
      for (std::int64_t j = 0; j < m; ++j) acc += dcrow[j] * brow[j];
      darow[p] += acc;
    }
  }
}

// dB += A^T * dC. Columns of A are partitioned across threads so each
// thread owns a disjoint slice of dB rows while streaming A and dC row-wise.
void gemm_atb_acc(const Matrix& a, const Matrix& dc, Matrix& db) {
  const std::int64_t n = a.rows(), k = a.cols(), m = dc.cols();
#pragma omp parallel
  {
    int nt = 1, tid = 0;
#ifdef _OPENMP
    nt = omp_get_num_threads();
    tid = omp_get_thread_num();
#endif
    const std::int64_t lo = k * tid / nt;
    const std::int64_t hi = k * (tid + 1) / nt;
    for (std::int64_t i = 0; i < n; ++i) {
      const double* arow = a.row(i);
      const double* dcrow = dc.row(i);
      for (std::int64_t p = lo; p < hi; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        double* dbrow = db.row(p);
        for (std::int64_t j = 0; j < m; ++j) dbrow[j] += av * dcrow[j];
      }
    }
  }
}

void spmm_acc(const SparseCsr& s, const Matrix& b, Matrix& out) {
  const std::int64_t m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < s.rows; ++i) {
    double* dst = out.row(i);
    for (std::int64_t kk = s.row_ptr[i]; kk < s.row_ptr[i + 1]; ++kk) {
      const double v = s.vals[kk];
      const double* src = b.row(s.col_idx[kk]);
      for (std::int64_t j = 0; j < m; ++j) dst[j] += v * src[j];
    }
  }
}

void spmm_t_acc(const SparseCsr& s, const Matrix& b, Matrix& out) {
  const std::int64_t m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < s.cols; ++i) {
    double* dst = out.row(i);
    for (std::int64_t kk = s.t_row_ptr[i]; kk < s.t_row_ptr[i + 1]; ++kk) {
      const double v = s.t_vals[kk];
      const double* src = b.row(s.t_col_idx[kk]);
      for (std::int64_t j = 0; j < m; ++j) dst[j] += v * src[j];
    }
  }
}

}  // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor Tensor::constant(Matrix m) { return wrap(make_node(std::move(m), {}, nullptr)); }

Tensor Tensor::parameter(Matrix m) {
  auto n = make_node(std::move(m), {}, nullptr);
  n->requires_grad = true;
  return wrap(n);
}

Tensor Tensor::scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

void backward(const Tensor& loss) {
  auto root = loss.node();
  if (!root) throw std::invalid_argument("backward: undefined tensor");
  if (root->value.rows() != 1 || root->value.cols() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  if (!root->requires_grad)
    throw std::invalid_argument("backward: tensor is detached from all parameters");
  if (root->backward_done) throw std::logic_error("backward: called twice on the same tape");
  root->backward_done = true;

  // iterative post-order DFS -> topological order
  std::vector<Node*> topo;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    if (next_child < node->parents.size()) {
      Node* child = node->parents[next_child++].get();
      if (child->requires_grad && seen.insert(child).second) stack.push_back({child, 0});
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : topo) n->grad = Matrix(n->value.rows(), n->value.cols());
  root->grad(0, 0) = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Matrix out(a.rows(), b.cols());
  gemm_acc(a.value(), b.value(), out);
  return Tensor::wrap(make_node(std::move(out), {a.node(), b.node()}, [](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) gemm_abt_acc(self.grad, pb.value, pa.grad);
    if (pb.requires_grad) gemm_atb_acc(pa.value, self.grad, pb.grad);
  }));
}

Tensor spmm(std::shared_ptr<const SparseCsr> s, const Tensor& x) {
  if (s->cols != x.rows()) throw std::invalid_argument("spmm: inner dimension mismatch");
  Matrix out(s->rows, x.cols());
  spmm_acc(*s, x.value(), out);
  return Tensor::wrap(make_node(std::move(out), {x.node()}, [s](Node& self) {
    auto& px = *self.parents[0];
    if (px.requires_grad) spmm_t_acc(*s, self.grad, px.grad);
  }));
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Matrix out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i) out.data()[i] += b.value().data()[i];
  return Tensor::wrap(make_node(std::move(out), {a.node(), b.node()}, [](Node& self) {
    for (int p = 0; p < 2; ++p) {
      auto& par = *self.parents[p];
      if (!par.requires_grad) continue;
      for (std::int64_t i = 0; i < self.grad.size(); ++i)
        par.grad.data()[i] += self.grad.data()[i];
    }
  }));
}

Tensor add_rowvec(const Tensor& h, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != h.cols())
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
  Matrix out = h.value();
  for (std::int64_t i = 0; i < out.rows(); ++i)
    for (std::int64_t j = 0; j < out.cols(); ++j) out(i, j) += bias.value()(0, j);
  return Tensor::wrap(make_node(std::move(out), {h.node(), bias.node()}, [](Node& self) {
    auto& ph = *self.parents[0];
    auto& pb = *self.parents[1];
    if (ph.requires_grad)
      for (std::int64_t i = 0; i < self.grad.size(); ++i)
        ph.grad.data()[i] += self.grad.data()[i];
    if (pb.requires_grad)
      for (std::int64_t i = 0; i < self.grad.rows(); ++i)
        for (std::int64_t j = 0; j < self.grad.cols(); ++j)
          pb.grad(0, j) += self.grad(i, j);
  }));
}

Tensor scale(const Tensor& a, double s) {
  Matrix out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [s](Node& self) {
    auto& pa = *self.parents[0];
    if (pa.requires_grad)
      for (std::int64_t i = 0; i < self.grad.size(); ++i)
        pa.grad.data()[i] += s * self.grad.data()[i];
  }));
}

Tensor relu(const Tensor& a) {
  Matrix out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(0.0, out.data()[i]);
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [](Node& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::int64_t i = 0; i < self.grad.size(); ++i)
      if (self.value.data()[i] > 0.0) pa.grad.data()[i] += self.grad.data()[i];
  }));
}

Tensor dropout(const Tensor& a, double rate, std::mt19937_64& rng, bool training) {
  if (!training || rate == 0.0) return a;
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0,1)");
  const double keep = 1.0 - rate;
  auto mask = std::make_shared<std::vector<char>>(a.value().size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& m : *mask) m = unit(rng) < keep ? 1 : 0;
  Matrix out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i)
    out.data()[i] = (*mask)[i] ? out.data()[i] / keep : 0.0;
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [mask, keep](Node& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::int64_t i = 0; i < self.grad.size(); ++i)
      if ((*mask)[i]) pa.grad.data()[i] += self.grad.data()[i] / keep;
  }));
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("concat_rows: column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.value().data(), a.value().data() + a.value().size(), out.data());
  std::copy(b.value().data(), b.value().data() + b.value().size(),
            out.data() + a.value().size());
  const std::int64_t split = a.value().size();
  return Tensor::wrap(make_node(std::move(out), {a.node(), b.node()}, [split](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad)
      for (std::int64_t i = 0; i < split; ++i) pa.grad.data()[i] += self.grad.data()[i];
    if (pb.requires_grad)
      for (std::int64_t i = split; i < self.grad.size(); ++i)
        pb.grad.data()[i - split] += self.grad.data()[i];
  }));
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
  const std::int64_t ca = a.cols(), cb = b.cols();
  Matrix out(a.rows(), ca + cb);
  for (std::int64_t i = 0; i < a.rows(); ++i) {
    std::copy(a.value().row(i), a.value().row(i) + ca, out.row(i));
    std::copy(b.value().row(i), b.value().row(i) + cb, out.row(i) + ca);
  }
  return Tensor::wrap(make_node(std::move(out), {a.node(), b.node()}, [ca, cb](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    for (std::int64_t i = 0; i < self.grad.rows(); ++i) {
      if (pa.requires_grad)
        for (std::int64_t j = 0; j < ca; ++j) pa.grad(i, j) += self.grad(i, j);
      if (pb.requires_grad)
        for (std::int64_t j = 0; j < cb; ++j) pb.grad(i, j) += self.grad(i, ca + j);
    }
  }));
}

Tensor slice_rows(const Tensor& a, std::int64_t r0, std::int64_t r1) {
  if (r0 < 0 || r1 > a.rows() || r0 >= r1) throw std::invalid_argument("slice_rows: bad range");
  Matrix out(r1 - r0, a.cols());
  std::copy(a.value().row(r0), a.value().row(r0) + out.size(), out.data());
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [r0](Node& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    const std::int64_t off = r0 * pa.grad.cols();
    for (std::int64_t i = 0; i < self.grad.size(); ++i)
      pa.grad.data()[off + i] += self.grad.data()[i];
  }));
}

Tensor slice_cols(const Tensor& a, std::int64_t c0, std::int64_t c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
  Matrix out(a.rows(), c1 - c0);
  for (std::int64_t i = 0; i < a.rows(); ++i)
    std::copy(a.value().row(i) + c0, a.value().row(i) + c1, out.row(i));
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [c0](Node& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::int64_t i = 0; i < self.grad.rows(); ++i)
      for (std::int64_t j = 0; j < self.grad.cols(); ++j)
        pa.grad(i, c0 + j) += self.grad(i, j);
  }));
}

Tensor clamp_cols(const Tensor& a, std::vector<double> lo, std::vector<double> hi) {
  if (static_cast<std::int64_t>(lo.size()) != a.cols() ||
      static_cast<std::int64_t>(hi.size()) != a.cols())
    throw std::invalid_argument("clamp_cols: bound length mismatch");
  Matrix out = a.value();
  for (std::int64_t i = 0; i < out.rows(); ++i)
    for (std::int64_t j = 0; j < out.cols(); ++j)
      out(i, j) = std::clamp(out(i, j), lo[j], hi[j]);
  auto plo = std::make_shared<std::vector<double>>(std::move(lo));
  auto phi = std::make_shared<std::vector<double>>(std::move(hi));
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [plo, phi](Node& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::int64_t i = 0; i < self.grad.rows(); ++i)
      for (std::int64_t j = 0; j < self.grad.cols(); ++j) {
        const double v = pa.value(i, j);
        if (v > (*plo)[j] && v < (*phi)[j]) pa.grad(i, j) += self.grad(i, j);
      }
  }));
}

Tensor sum_squares(const Tensor& a) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.value().size(); ++i) {
    const double v = a.value().data()[i];
    s += v * v;
  }
  Matrix out(1, 1);
  out(0, 0) = s;
  return Tensor::wrap(make_node(std::move(out), {a.node()}, [](Node& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    const double g = self.grad(0, 0);
    for (std::int64_t i = 0; i < pa.grad.size(); ++i)
      pa.grad.data()[i] += 2.0 * g * pa.value.data()[i];
  }));
}

Tensor masked_softmax_ce(const Tensor& logits, std::vector<int> labels,
                         std::vector<std::int64_t> rows) {
  if (rows.empty()) throw std::invalid_argument("masked_softmax_ce: empty mask");
  const std::int64_t c = logits.cols();
  auto probs = std::make_shared<Matrix>(static_cast<std::int64_t>(rows.size()), c);
  double total = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::int64_t r = rows[k];
    const int y = labels[r];
    if (y < 0 || y >= c)
      throw std::invalid_argument("masked_softmax_ce: masked row has no valid label");
    const double* lrow = logits.value().row(r);
    double mx = lrow[0];
    for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, lrow[j]);
    double z = 0.0;
    for (std::int64_t j = 0; j < c; ++j) z += std::exp(lrow[j] - mx);
    for (std::int64_t j = 0; j < c; ++j) (*probs)(static_cast<std::int64_t>(k), j) =
        std::exp(lrow[j] - mx) / z;
    total += -std::log(std::max((*probs)(static_cast<std::int64_t>(k), y), kProbEps));
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(rows.size());
  auto prows = std::make_shared<std::vector<std::int64_t>>(std::move(rows));
  auto plabels = std::make_shared<std::vector<int>>(std::move(labels));
  return Tensor::wrap(
      make_node(std::move(out), {logits.node()}, [probs, prows, plabels](Node& self) {
        auto& pl = *self.parents[0];
        if (!pl.requires_grad) return;
        const double g = self.grad(0, 0) / static_cast<double>(prows->size());
        const std::int64_t c = pl.grad.cols();
        for (std::size_t k = 0; k < prows->size(); ++k) {
          const std::int64_t r = (*prows)[k];
          const int y = (*plabels)[r];
          for (std::int64_t j = 0; j < c; ++j) {
            double d = (*probs)(static_cast<std::int64_t>(k), j);
            if (j == y) d -= 1.0;
            pl.grad(r, j) += g * d;
          }
        }
      }));
}

Tensor edge_bce(const Tensor& z, std::vector<EdgePair> pos, std::vector<EdgePair> neg) {
  if (pos.empty() && neg.empty()) throw std::invalid_argument("edge_bce: empty edge lists");
  const std::int64_t d = z.cols();
  const auto count = static_cast<double>(pos.size() + neg.size());
  auto dot = [&](const EdgePair& e) {
    const double* a = z.value().row(e.first);
    const double* b = z.value().row(e.second);
    double s = 0.0;
    for (std::int64_t j = 0; j < d; ++j) s += a[j] * b[j];
    return s;
  };
  double total = 0.0;
  for (const auto& e : pos) total += -std::log(std::clamp(sigmoid(dot(e)), kProbEps, 1.0));
  for (const auto& e : neg) total += -std::log(std::clamp(1.0 - sigmoid(dot(e)), kProbEps, 1.0));
  Matrix out(1, 1);
  out(0, 0) = total / count;
  auto ppos = std::make_shared<std::vector<EdgePair>>(std::move(pos));
  auto pneg = std::make_shared<std::vector<EdgePair>>(std::move(neg));
  return Tensor::wrap(make_node(std::move(out), {z.node()}, [ppos, pneg, count](Node& self) {
    auto& pz = *self.parents[0];
    if (!pz.requires_grad) return;
    const double g = self.grad(0, 0) / count;
    const std::int64_t d = pz.grad.cols();
    auto apply = [&](const EdgePair& e, double target) {
      const double* a = pz.value.row(e.first);
      const double* b = pz.value.row(e.second);
      double s = 0.0;
      for (std::int64_t j = 0; j < d; ++j) s += a[j] * b[j];
      const double coeff = g * (sigmoid(s) - target);
      double* ga = pz.grad.row(e.first);
      double* gb = pz.grad.row(e.second);
      for (std::int64_t j = 0; j < d; ++j) {
        ga[j] += coeff * b[j];
        gb[j] += coeff * a[j];
      }
    };
    for (const auto& e : *ppos) apply(e, 1.0);
    for (const auto& e : *pneg) apply(e, 0.0);
  }));
}

Tensor bce_rows_vs_flags(const Tensor& logits_col, std::vector<std::uint8_t> flags) {
  if (logits_col.cols() != 1) throw std::invalid_argument("bce_rows_vs_flags: expect n x 1");
  if (static_cast<std::int64_t>(flags.size()) != logits_col.rows())
    throw std::invalid_argument("bce_rows_vs_flags: flag count mismatch");
  const auto n = logits_col.rows();
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double p = sigmoid(logits_col.value()(i, 0));
    total += flags[i] ? -std::log(std::clamp(p, kProbEps, 1.0))
                      : -std::log(std::clamp(1.0 - p, kProbEps, 1.0));
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(n);
  auto pflags = std::make_shared<std::vector<std::uint8_t>>(std::move(flags));
  return Tensor::wrap(make_node(std::move(out), {logits_col.node()}, [pflags](Node& self) {
    auto& pl = *self.parents[0];
    if (!pl.requires_grad) return;
    const auto n = pl.grad.rows();
    const double g = self.grad(0, 0) / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double s = sigmoid(pl.value(i, 0));
      pl.grad(i, 0) += g * (s - ((*pflags)[i] ? 1.0 : 0.0));
    }
  }));
}

Tensor mean_log_one_minus_sigmoid(const Tensor& logits_col, std::int64_t r0, std::int64_t r1) {
  if (logits_col.cols() != 1)
    throw std::invalid_argument("mean_log_one_minus_sigmoid: expect n x 1");
  if (r0 < 0 || r1 > logits_col.rows() || r0 >= r1)
    throw std::invalid_argument("mean_log_one_minus_sigmoid: bad row range");
  const double cnt = static_cast<double>(r1 - r0);
  double total = 0.0;
  for (std::int64_t i = r0; i < r1; ++i)
    total += std::log(std::clamp(1.0 - sigmoid(logits_col.value()(i, 0)), kProbEps, 1.0));
  Matrix out(1, 1);
  out(0, 0) = total / cnt;
  return Tensor::wrap(make_node(std::move(out), {logits_col.node()}, [r0, r1, cnt](Node& self) {
    auto& pl = *self.parents[0];
    if (!pl.requires_grad) return;
    const double g = self.grad(0, 0) / cnt;
    for (std::int64_t i = r0; i < r1; ++i)
      pl.grad(i, 0) += -g * sigmoid(pl.value(i, 0));
  }));
}

Tensor sse_rows(const Tensor& x, Matrix targets) {
  if (x.rows() != targets.rows() || x.cols() != targets.cols())
    throw std::invalid_argument("sse_rows: shape mismatch");
  double total = 0.0;
  for (std::int64_t i = 0; i < x.value().size(); ++i) {
    const double d = x.value().data()[i] - targets.data()[i];
    total += d * d;
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  auto pt = std::make_shared<Matrix>(std::move(targets));
  return Tensor::wrap(make_node(std::move(out), {x.node()}, [pt](Node& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    const double g = self.grad(0, 0);
    for (std::int64_t i = 0; i < px.grad.size(); ++i)
      px.grad.data()[i] += 2.0 * g * (px.value.data()[i] - pt->data()[i]);
  }));
}

}  // namespace saug::ad
