#pragma once

#include <memory>
#include <optional>

#include "labeltrick/labels.hpp"
#include "labeltrick/sparse.hpp"
#include "labeltrick/types.hpp"

namespace labeltrick {

/// Above this node count P is not materialized densely; series mode keeps
/// the operator implicit and diagonal-dependent quantities become
/// unavailable (gamma, ridge solves).
inline constexpr Index kDenseThreshold = 4096;

enum class PropagationMode { closed_form, truncated_series, explicit_matrix };

/// Propagation operator P with its diagonal C = diag(P).
///
/// closed_form:      P = (1-lambda) (I - lambda S)^{-1}, dense.
/// truncated_series: P = (1-lambda) sum_{i=0}^{k} lambda^i S^i, applied via
///                   the recursion F <- lambda S F + (1-lambda) Y starting
///                   from F = (1-lambda) Y, which evaluates the truncated
///                   polynomial exactly (k = 0 gives (1-lambda) I).
/// explicit_matrix:  any caller-supplied square P.
class PropagationOperator {
 public:
  PropagationMode mode() const { return mode_; }
  double lambda() const { return lambda_; }
  Index steps() const { return steps_; }
  Index size() const { return n_; }

  /// C = diag(P), exact for the represented operator.
  const Vector& diag() const { return diag_; }

  bool has_dense() const { return dense_.has_value(); }
  const Matrix& dense() const;

  /// diag(P^T P): column squared norms. Dense mode only.
  const Vector& diag_ptp() const;

  /// P * m (dense multiply or series recursion).
  Matrix apply(const Matrix& m) const;

  friend PropagationOperator closed_form_operator(const SparseMatrix& s,
                                                  double lambda,
                                                  Index dense_threshold);
  friend PropagationOperator series_operator(const SparseMatrix& s,
                                             double lambda, Index k,
                                             Index dense_threshold);
  friend PropagationOperator explicit_operator(Matrix p);

 private:
  PropagationOperator() = default;

  PropagationMode mode_ = PropagationMode::explicit_matrix;
  double lambda_ = 0.0;
  Index steps_ = 0;
  Index n_ = 0;
  std::shared_ptr<const SparseMatrix> s_;  // series recursion needs S
  std::optional<Matrix> dense_;
  Vector diag_;
  std::optional<Vector> diag_ptp_;
};

PropagationOperator closed_form_operator(const SparseMatrix& s, double lambda,
                                         Index dense_threshold = kDenseThreshold);
PropagationOperator series_operator(const SparseMatrix& s, double lambda,
                                    Index k,
                                    Index dense_threshold = kDenseThreshold);
PropagationOperator explicit_operator(Matrix p);

/// Diagonal of the regularizer factor, restricted to the training block:
/// for training node i the entry is sqrt(sum_{k in D_tr} P_ki^2 - P_ii^2),
/// zero elsewhere. Radicands in [-1e-12, 0) are clamped to zero; anything
/// below that range raises NumericalIntegrityError.
///
/// The training-block restriction is what makes the closed-form objective
/// an exact identity; with every node in D_tr it reduces to
/// (diag(P^T P) - C o C)^{1/2}.
Vector gamma_diag(const PropagationOperator& op, const LabelMatrix& labels);

/// Gamma = gamma_diag(op, labels) applied to Y_tr, row-wise.
Matrix gamma_matrix(const PropagationOperator& op, const LabelMatrix& labels);

}  // namespace labeltrick
