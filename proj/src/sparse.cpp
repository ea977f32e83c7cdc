#include "labeltrick/sparse.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace labeltrick {

SparseMatrix::SparseMatrix() : n_rows_(0), n_cols_(0), offsets_{0} {}

SparseMatrix::SparseMatrix(Index n_rows, Index n_cols,
                           std::vector<Index> offsets, std::vector<Index> cols,
                           std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      offsets_(std::move(offsets)),
      cols_(std::move(cols)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (n_rows_ < 0 || n_cols_ < 0)
    throw std::invalid_argument("sparse: negative dimension");
  if (offsets_.size() != static_cast<size_t>(n_rows_) + 1)
    throw std::invalid_argument("sparse: offsets size must be n_rows + 1");
  if (offsets_.front() != 0)
    throw std::invalid_argument("sparse: offsets must start at 0");
  if (offsets_.back() != static_cast<Index>(values_.size()))
    throw std::invalid_argument("sparse: last offset must equal nnz");
  if (cols_.size() != values_.size())
    throw std::invalid_argument("sparse: column/value size mismatch");
  for (Index r = 0; r < n_rows_; ++r) {
    if (offsets_[r] > offsets_[r + 1])
      throw std::invalid_argument("sparse: offsets must be non-decreasing");
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (cols_[k] < 0 || cols_[k] >= n_cols_)
        throw std::invalid_argument("sparse: column index out of range");
      if (k > offsets_[r] && cols_[k] <= cols_[k - 1])
        throw std::invalid_argument(
            "sparse: column indices must be strictly increasing per row");
      if (values_[k] == 0.0)
        throw std::invalid_argument("sparse: explicit zero stored");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(
    Index n_rows, Index n_cols,
    const std::vector<std::tuple<Index, Index, double>>& triplets) {
  std::map<std::pair<Index, Index>, double> acc;
  for (const auto& [r, c, v] : triplets) {
    if (r < 0 || r >= n_rows || c < 0 || c >= n_cols)
      throw std::invalid_argument("sparse: triplet index out of range");
    acc[{r, c}] += v;
  }
  std::vector<Index> offsets(static_cast<size_t>(n_rows) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> values;
  cols.reserve(acc.size());
  values.reserve(acc.size());
  for (const auto& [rc, v] : acc) {
    if (v == 0.0) continue;
    offsets[rc.first + 1]++;
    cols.push_back(rc.second);
    values.push_back(v);
  }
  for (Index r = 0; r < n_rows; ++r) offsets[r + 1] += offsets[r];
  return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols),
                      std::move(values));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> offsets(static_cast<size_t>(n) + 1);
  std::vector<Index> cols(static_cast<size_t>(n));
  std::vector<double> values(static_cast<size_t>(n), 1.0);
  for (Index i = 0; i <= n; ++i) offsets[i] = i;
  for (Index i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::move(values));
}

double SparseMatrix::coeff(Index r, Index c) const {
  if (r < 0 || r >= n_rows_ || c < 0 || c >= n_cols_)
    throw std::invalid_argument("sparse: coeff index out of range");
  const auto first = cols_.begin() + offsets_[r];
  const auto last = cols_.begin() + offsets_[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[it - cols_.begin()];
}

Vector SparseMatrix::diagonal() const {
  const Index n = std::min(n_rows_, n_cols_);
  Vector d = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) d[i] = coeff(i, i);
  return d;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d = Matrix::Zero(n_rows_, n_cols_);
  for (Index r = 0; r < n_rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
      d(r, cols_[k]) = values_[k];
  return d;
}

bool SparseMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  for (Index r = 0; r < n_rows_; ++r)
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k)
      if (coeff(cols_[k], r) != values_[k]) return false;
  return true;
}

Matrix SparseMatrix::multiply(const Matrix& b) const {
  if (b.rows() != n_cols_)
    throw std::invalid_argument("spmm: inner dimensions disagree");
  Matrix out = Matrix::Zero(n_rows_, b.cols());
  for (Index r = 0; r < n_rows_; ++r) {
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      out.row(r) += values_[k] * b.row(cols_[k]);
    }
  }
  return out;
}

Matrix spmm(const SparseMatrix& a, const Matrix& b) { return a.multiply(b); }

}  // namespace labeltrick
