#pragma once

#include <cstdint>
#include <vector>

namespace saug {

/// Dense row-major matrix of doubles. The single value container used for
/// features, embeddings and parameters throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::int64_t size() const { return rows_ * cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::int64_t r, std::int64_t c) { return data_[r * cols_ + c]; }
  double operator()(std::int64_t r, std::int64_t c) const { return data_[r * cols_ + c]; }

  double* row(std::int64_t r) { return data_.data() + r * cols_; }
  const double* row(std::int64_t r) const { return data_.data() + r * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Matrix& o) const = default;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<double> data_;
};

/// max |a-b| over all entries; matrices must have the same shape.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// true if every entry is finite.
bool all_finite(const Matrix& m);

}  // namespace saug
