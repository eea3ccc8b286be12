#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "saug/matrix.hpp"

namespace saug {

/// CSR matrix with an explicit transpose, so products against it and against
/// its transpose are both cheap row-parallel loops. Entries are immutable
/// after construction; the autodiff engine treats these as constants.
struct SparseCsr {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int64_t> col_idx;
  std::vector<double> vals;
  // transpose arrays (row_ptr of the cols x rows matrix)
  std::vector<std::int64_t> t_row_ptr;
  std::vector<std::int64_t> t_col_idx;
  std::vector<double> t_vals;

  std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }

  /// Build from triplets (unsorted, no duplicates expected); fills transpose.
  static std::shared_ptr<SparseCsr> from_triplets(
      std::int64_t rows, std::int64_t cols,
      const std::vector<std::int64_t>& r, const std::vector<std::int64_t>& c,
      const std::vector<double>& v);

  /// Build from a dense matrix keeping entries != 0; fills transpose.
  static std::shared_ptr<SparseCsr> from_dense(const Matrix& m);

  Matrix to_dense() const;
};

/// out = S * B, row-parallel, deterministic accumulation order.
void spmm(const SparseCsr& s, const Matrix& b, Matrix& out);

/// out = S^T * B using the stored transpose arrays.
void spmm_transpose(const SparseCsr& s, const Matrix& b, Matrix& out);

/// Plain sparse*sparse product (used once at setup for mean-aggregated
/// features); result has sorted columns and a filled transpose.
std::shared_ptr<SparseCsr> spgemm(const SparseCsr& a, const SparseCsr& b);

}  // namespace saug
