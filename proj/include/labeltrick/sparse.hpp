#pragma once

#include "labeltrick/types.hpp"

namespace labeltrick {

/// Row-compressed real sparse matrix.
///
/// Invariants enforced at construction:
///  - offsets monotone non-decreasing, offsets.front() == 0,
///    offsets.back() == number of stored values
///  - column indices strictly increasing within each row, all < n_cols
///  - no stored explicit zeros
class SparseMatrix {
 public:
  SparseMatrix();
  SparseMatrix(Index n_rows, Index n_cols, std::vector<Index> offsets,
               std::vector<Index> cols, std::vector<double> values);

  /// Build from (row, col, value) triplets. Duplicate coordinates have
  /// their values summed; entries that cancel to zero are dropped.
  static SparseMatrix from_triplets(
      Index n_rows, Index n_cols,
      const std::vector<std::tuple<Index, Index, double>>& triplets);

  static SparseMatrix identity(Index n);

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  const std::vector<Index>& offsets() const { return offsets_; }
  const std::vector<Index>& col_indices() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  double coeff(Index r, Index c) const;
  Vector diagonal() const;
  Matrix to_dense() const;
  bool is_symmetric() const;

  /// Dense right-multiply: this * b, summed in ascending column order per
  /// row so the result is deterministic.
  Matrix multiply(const Matrix& b) const;

 private:
  void validate() const;

  Index n_rows_;
  Index n_cols_;
  std::vector<Index> offsets_;
  std::vector<Index> cols_;
  std::vector<double> values_;
};

/// Exact sparse-dense product with dimension check.
Matrix spmm(const SparseMatrix& a, const Matrix& b);

}  // namespace labeltrick
