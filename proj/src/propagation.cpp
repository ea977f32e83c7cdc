#include "labeltrick/propagation.hpp"

#include <Eigen/LU>
#include <cmath>

namespace labeltrick {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("propagation: lambda must lie in (0,1)");
}

void check_square(const SparseMatrix& s) {
  if (s.rows() != s.cols())
    throw std::invalid_argument("propagation: S must be square");
}

// Evaluates the truncated polynomial (1-l) sum_{i<=k} l^i S^i applied to m.
Matrix series_apply(const SparseMatrix& s, double lambda, Index k,
                    const Matrix& m) {
  const double one_minus = 1.0 - lambda;
  Matrix base = one_minus * m;
  Matrix f = base;
  for (Index step = 0; step < k; ++step) f = lambda * s.multiply(f) + base;
  return f;
}

}  // namespace

const Matrix& PropagationOperator::dense() const {
  if (!dense_)
    throw std::invalid_argument(
        "propagation: operator is not materialized densely");
  return *dense_;
}

const Vector& PropagationOperator::diag_ptp() const {
  if (!diag_ptp_)
    throw std::invalid_argument(
        "propagation: diag(P^T P) requires dense mode (n <= threshold)");
  return *diag_ptp_;
}

Matrix PropagationOperator::apply(const Matrix& m) const {
  if (m.rows() != n_)
    throw std::invalid_argument("propagation: apply dimension mismatch");
  if (mode_ == PropagationMode::truncated_series)
    return series_apply(*s_, lambda_, steps_, m);
  return *dense_ * m;
}

PropagationOperator closed_form_operator(const SparseMatrix& s, double lambda,
                                         Index dense_threshold) {
  check_square(s);
  check_lambda(lambda);
  const Index n = s.rows();
  if (n > dense_threshold)
    throw std::invalid_argument(
        "propagation: n exceeds the dense threshold; use series mode");

  const Matrix system = Matrix::Identity(n, n) - lambda * s.to_dense();
  Eigen::PartialPivLU<Matrix> lu(system);
  Matrix p = lu.solve((1.0 - lambda) * Matrix::Identity(n, n));

  const double residual =
      (system * p - (1.0 - lambda) * Matrix::Identity(n, n))
          .cwiseAbs()
          .maxCoeff();
  if (residual > 1e-8)
    throw NumericalIntegrityError(
        "propagation: closed-form inverse residual " +
        std::to_string(residual) + " exceeds 1e-8");

  PropagationOperator op;
  op.mode_ = PropagationMode::closed_form;
  op.lambda_ = lambda;
  op.n_ = n;
  op.diag_ = p.diagonal();
  op.diag_ptp_ = p.colwise().squaredNorm().transpose();
  op.dense_ = std::move(p);
  return op;
}

PropagationOperator series_operator(const SparseMatrix& s, double lambda,
                                    Index k, Index dense_threshold) {
  check_square(s);
  check_lambda(lambda);
  if (k < 0) throw std::invalid_argument("propagation: steps must be >= 0");
  const Index n = s.rows();

  PropagationOperator op;
  op.mode_ = PropagationMode::truncated_series;
  op.lambda_ = lambda;
  op.steps_ = k;
  op.n_ = n;
  op.s_ = std::make_shared<SparseMatrix>(s);

  if (n <= dense_threshold) {
    Matrix p = series_apply(s, lambda, k, Matrix::Identity(n, n));
    op.diag_ = p.diagonal();
    op.diag_ptp_ = p.colwise().squaredNorm().transpose();
    op.dense_ = std::move(p);
  } else {
    // Exact diagonal of the truncated polynomial via blocked columns of
    // the identity; costs k sparse products per block.
    op.diag_ = Vector::Zero(n);
    const Index block = 512;
    for (Index start = 0; start < n; start += block) {
      const Index width = std::min(block, n - start);
      Matrix basis = Matrix::Zero(n, width);
      for (Index j = 0; j < width; ++j) basis(start + j, j) = 1.0;
      const Matrix cols = series_apply(s, lambda, k, basis);
      for (Index j = 0; j < width; ++j) op.diag_[start + j] = cols(start + j, j);
    }
  }
  return op;
}

PropagationOperator explicit_operator(Matrix p) {
  if (p.rows() != p.cols())
    throw std::invalid_argument("propagation: explicit P must be square");
  PropagationOperator op;
  op.mode_ = PropagationMode::explicit_matrix;
  op.n_ = p.rows();
  op.diag_ = p.diagonal();
  op.diag_ptp_ = p.colwise().squaredNorm().transpose();
  op.dense_ = std::move(p);
  return op;
}

Vector gamma_diag(const PropagationOperator& op, const LabelMatrix& labels) {
  const Matrix& p = op.dense();  // dense mode required
  if (labels.num_nodes() != op.size())
    throw std::invalid_argument("gamma: label/operator size mismatch");
  Vector g = Vector::Zero(op.size());
  for (Index i : labels.train_idx()) {
    double col_sq = 0.0;
    for (Index k : labels.train_idx()) col_sq += p(k, i) * p(k, i);
    double radicand = col_sq - p(i, i) * p(i, i);
    if (radicand < 0.0) {
      if (radicand < -1e-12)
        throw NumericalIntegrityError(
            "gamma: radicand " + std::to_string(radicand) +
            " below -1e-12 at node " + std::to_string(i));
      radicand = 0.0;
    }
    g[i] = std::sqrt(radicand);
  }
  return g;
}

Matrix gamma_matrix(const PropagationOperator& op, const LabelMatrix& labels) {
  const Vector g = gamma_diag(op, labels);
  Matrix out = Matrix::Zero(labels.num_nodes(), labels.num_classes());
  for (Index i : labels.train_idx()) out.row(i) = g[i] * labels.y().row(i);
  return out;
}

}  // namespace labeltrick
