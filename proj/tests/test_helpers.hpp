#pragma once

#include <functional>

#include "labeltrick/data_io.hpp"
#include "labeltrick/propagation.hpp"

// Test-side oracles. Everything here recomputes expectations and operators
// from first principles (dense Eigen algebra, raw bitmask enumeration) so
// the production split/propagation code is checked against an independent
// path.
namespace oracle {

using labeltrick::Index;
using labeltrick::IndexList;
using labeltrick::Matrix;
using labeltrick::Vector;

// (1-lambda)(I - lambda S)^{-1} straight from the dense inverse.
inline Matrix closed_form_dense(const Matrix& s, double lambda) {
  const Index n = s.rows();
  return (1.0 - lambda) *
         (Matrix::Identity(n, n) - lambda * s).inverse();
}

// (1-lambda) sum_{i=0}^{k} lambda^i S^i by explicit powers.
inline Matrix truncated_series_dense(const Matrix& s, double lambda, Index k) {
  const Index n = s.rows();
  Matrix power = Matrix::Identity(n, n);
  Matrix acc = Matrix::Identity(n, n);
  for (Index i = 1; i <= k; ++i) {
    power = s * power;
    acc += std::pow(lambda, static_cast<double>(i)) * power;
  }
  return (1.0 - lambda) * acc;
}

// Weighted sum of f(M_in) over every subset of the training set, where
// M_in is handed over as a dense diagonal 0/1 matrix. This is the raw
// expectation oracle: no SplitMask involved.
inline void for_each_subset(
    const IndexList& train, double alpha,
    const std::function<void(double, const Matrix&)>& visit, Index n) {
  const Index m = static_cast<Index>(train.size());
  for (std::uint64_t bits = 0; bits < (1ull << m); ++bits) {
    Matrix m_in = Matrix::Zero(n, n);
    Index n_in = 0;
    for (Index k = 0; k < m; ++k)
      if (bits & (1ull << k)) {
        m_in(train[k], train[k]) = 1.0;
        ++n_in;
      }
    const double weight = std::pow(alpha, static_cast<double>(n_in)) *
                          std::pow(1.0 - alpha, static_cast<double>(m - n_in));
    visit(weight, m_in);
  }
}

// Central finite differences over every entry of a parameter matrix.
inline Matrix numeric_grad(const std::function<double(const Matrix&)>& f,
                           Matrix w, double step = 1e-5) {
  Matrix g(w.rows(), w.cols());
  for (Index r = 0; r < w.rows(); ++r)
    for (Index c = 0; c < w.cols(); ++c) {
      const double saved = w(r, c);
      w(r, c) = saved + step;
      const double up = f(w);
      w(r, c) = saved - step;
      const double down = f(w);
      w(r, c) = saved;
      g(r, c) = (up - down) / (2.0 * step);
    }
  return g;
}

inline Matrix random_matrix(labeltrick::SplitMix64& rng, Index rows,
                            Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

inline Matrix random_one_hot(labeltrick::SplitMix64& rng, Index n, Index c) {
  Matrix y = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i)
    y(i, static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(c)))) =
        1.0;
  return y;
}

inline labeltrick::Graph path2() { return labeltrick::Graph(2, {{0, 1}}); }

inline labeltrick::Graph triangle() {
  return labeltrick::Graph(3, {{0, 1}, {1, 2}, {0, 2}});
}

inline labeltrick::Graph edgeless(Index n) {
  return labeltrick::Graph(n, {});
}

inline IndexList range(Index n) {
  IndexList out(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace oracle
