#include "saug/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace saug {

namespace {

void fill_transpose(SparseCsr& s) {
  s.t_row_ptr.assign(s.cols + 1, 0);
  s.t_col_idx.resize(s.col_idx.size());
  s.t_vals.resize(s.vals.size());
  for (std::int64_t k = 0; k < s.nnz(); ++k) s.t_row_ptr[s.col_idx[k] + 1]++;
  for (std::int64_t c = 0; c < s.cols; ++c) s.t_row_ptr[c + 1] += s.t_row_ptr[c];
  std::vector<std::int64_t> cursor(s.t_row_ptr.begin(), s.t_row_ptr.end() - 1);
  for (std::int64_t r = 0; r < s.rows; ++r) {
    for (std::int64_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
      std::int64_t pos = cursor[s.col_idx[k]]++;
      s.t_col_idx[pos] = r;
      s.t_vals[pos] = s.vals[k];
    }
  }
}

}  // namespace

std::shared_ptr<SparseCsr> SparseCsr::from_triplets(
    std::int64_t rows, std::int64_t cols,
    const std::vector<std::int64_t>& r, const std::vector<std::int64_t>& c,
    const std::vector<double>& v) {
  if (r.size() != c.size() || r.size() != v.size())
    throw std::invalid_argument("from_triplets: length mismatch");
  auto s = std::make_shared<SparseCsr>();
  s->rows = rows;
  s->cols = cols;
  s->row_ptr.assign(rows + 1, 0);
  for (auto ri : r) s->row_ptr[ri + 1]++;
  for (std::int64_t i = 0; i < rows; ++i) s->row_ptr[i + 1] += s->row_ptr[i];
  s->col_idx.resize(r.size());
  s->vals.resize(r.size());
  std::vector<std::int64_t> cursor(s->row_ptr.begin(), s->row_ptr.end() - 1);
  for (std::size_t k = 0; k < r.size(); ++k) {
    std::int64_t pos = cursor[r[k]]++;
    s->col_idx[pos] = c[k];
    s->vals[pos] = v[k];
  }
  // sort columns within each row
  for (std::int64_t i = 0; i < rows; ++i) {
    std::int64_t b = s->row_ptr[i], e = s->row_ptr[i + 1];
    std::vector<std::pair<std::int64_t, double>> tmp;
    tmp.reserve(e - b);
    for (std::int64_t k = b; k < e; ++k) tmp.emplace_back(s->col_idx[k], s->vals[k]);
    std::sort(tmp.begin(), tmp.end());
    for (std::int64_t k = b; k < e; ++k) {
      s->col_idx[k] = tmp[k - b].first;
      s->vals[k] = tmp[k - b].second;
    }
  }
  fill_transpose(*s);
  return s;
}

std::shared_ptr<SparseCsr> SparseCsr::from_dense(const Matrix& m) {
  auto s = std::make_shared<SparseCsr>();
  s->rows = m.rows();
  s->cols = m.cols();
  s->row_ptr.assign(m.rows() + 1, 0);
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    for (std::int64_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        s->col_idx.push_back(j);
        s->vals.push_back(m(i, j));
      }
    }
    s->row_ptr[i + 1] = static_cast<std::int64_t>(s->col_idx.size());
  }
  fill_transpose(*s);
  return s;
}

Matrix SparseCsr::to_dense() const {
  Matrix m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) m(i, col_idx[k]) = vals[k];
  return m;
}

void spmm(const SparseCsr& s, const Matrix& b, Matrix& out) {
  if (s.cols != b.rows()) throw std::invalid_argument("spmm: inner dimension mismatch");
  out = Matrix(s.rows, b.cols());
  const std::int64_t n = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < s.rows; ++i) {
    double* dst = out.row(i);
    for (std::int64_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      const double v = s.vals[k];
      const double* src = b.row(s.col_idx[k]);
      for (std::int64_t j = 0; j < n; ++j) dst[j] += v * src[j];
    }
  }
}

void spmm_transpose(const SparseCsr& s, const Matrix& b, Matrix& out) {
  if (s.rows != b.rows()) throw std::invalid_argument("spmm_transpose: inner dimension mismatch");
  out = Matrix(s.cols, b.cols());
  const std::int64_t n = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < s.cols; ++i) {
    double* dst = out.row(i);
    for (std::int64_t k = s.t_row_ptr[i]; k < s.t_row_ptr[i + 1]; ++k) {
      const double v = s.t_vals[k];
      const double* src = b.row(s.t_col_idx[k]);
      for (std::int64_t j = 0; j < n; ++j) dst[j] += v * src[j];
    }
  }
}

std::shared_ptr<SparseCsr> spgemm(const SparseCsr& a, const SparseCsr& b) {
  if (a.cols != b.rows) throw std::invalid_argument("spgemm: inner dimension mismatch");
  std::vector<std::int64_t> rr, cc;
  std::vector<double> vv;
  std::vector<double> acc(b.cols, 0.0);
  std::vector<char> seen(b.cols, 0);
  std::vector<std::int64_t> touched;
  for (std::int64_t i = 0; i < a.rows; ++i) {
    touched.clear();
    for (std::int64_t ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
      const std::int64_t m = a.col_idx[ka];
      const double av = a.vals[ka];
      for (std::int64_t kb = b.row_ptr[m]; kb < b.row_ptr[m + 1]; ++kb) {
        const std::int64_t j = b.col_idx[kb];
        if (!seen[j]) {
          seen[j] = 1;
          touched.push_back(j);
        }
        acc[j] += av * b.vals[kb];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::int64_t j : touched) {
      if (acc[j] != 0.0) {
        rr.push_back(i);
        cc.push_back(j);
        vv.push_back(acc[j]);
      }
      acc[j] = 0.0;
      seen[j] = 0;
    }
  }
  return SparseCsr::from_triplets(a.rows, b.cols, rr, cc, vv);
}

}  // namespace saug
