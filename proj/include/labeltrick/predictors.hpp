#pragma once

#include <map>
#include <string>

#include "labeltrick/propagation.hpp"

namespace labeltrick {

enum class WeightsKind { lp_w, feat_label, composite, cs_trainable, nonlinear_toy };

/// Trainable matrices keyed by name; shapes are fixed at construction and
/// every entry must be finite.
struct ModelWeights {
  WeightsKind kind = WeightsKind::lp_w;
  std::map<std::string, Matrix> mats;

  static ModelWeights lp(Matrix w);
  static ModelWeights feat_label(Matrix wx, Matrix wy);
  static ModelWeights cs_trainable(Matrix ws, Matrix wc_hat);
  static ModelWeights nonlinear_toy(Matrix w1, Matrix w2);

  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
};

/// Row-independent map used as h0/h1 in composite predictors: identity,
/// affine z A + b, or tanh(z A1 + b1) A2 + b2.
struct NodeMap {
  enum class Kind { identity, affine, one_hidden };
  Kind kind = Kind::identity;
  Matrix a1;
  Eigen::RowVectorXd b1;
  Matrix a2;
  Eigen::RowVectorXd b2;

  static NodeMap identity_map();
  static NodeMap affine(Matrix a, Eigen::RowVectorXd b);
  static NodeMap one_hidden(Matrix a1, Eigen::RowVectorXd b1, Matrix a2,
                            Eigen::RowVectorXd b2);

  Matrix operator()(const Matrix& z) const;
};

enum class GammaMode { identity, autoscale };

/// Plain label propagation: P Y_tr.
Matrix lp_predict(const PropagationOperator& op, const LabelMatrix& labels);

/// Self-excluded propagation (P - C) Y_tr W; C = diag(P) blocks each
/// training node's own label. Test rows coincide with P Y_tr W exactly.
Matrix self_excluded_predict(const PropagationOperator& op,
                             const LabelMatrix& labels,
                             const ModelWeights& w);

/// Feature and label aware predictor P X W_x + (P - C) Y_tr W_y.
Matrix feat_label_predict(const PropagationOperator& op, const Matrix& x,
                          const LabelMatrix& labels, const ModelWeights& w);

/// Split-conditional predictor P X W_x + P (Y_in / alpha) W_y.
Matrix stochastic_predict(const PropagationOperator& op, const Matrix& x,
                          const LabelMatrix& labels, const SplitMask& mask,
                          const ModelWeights& w);

/// Self-excluded composite over stacked operators:
/// h1( [P_j h0([X,Y_tr])]_j - [C_j h0([X,Y_tr])]_j + [C_j h0([X,0])]_j )
/// with blocks concatenated along columns.
Matrix composite_predict(const std::vector<PropagationOperator>& ops,
                         const Matrix& x, const LabelMatrix& labels,
                         const NodeMap& h0, const NodeMap& h1);

/// Minimal nonlinear model tanh(P [X, y_input] W1) W2 for limit checks.
Matrix nonlinear_toy_predict(const PropagationOperator& op, const Matrix& x,
                             const Matrix& y_input, const ModelWeights& w);

/// Scale rows of a propagated error matrix. identity leaves it untouched;
/// autoscale sets each nonzero row's L1 norm to the mean L1 norm of the
/// raw error rows over D_in.
Matrix gamma_scale(const Matrix& propagated, const Matrix& raw_error,
                   const std::vector<char>& in_mask, GammaMode mode);

/// Trainable Correct&Smooth under one split:
/// P_s((Y_in + (M_te+M_out) y_base) W_s) + P_s((M_te+M_out) E_in) Wc_hat,
/// E_in = gamma(P_c (Y_in - M_in y_base)).
Matrix cs_trainable_predict(const PropagationOperator& p_c,
                            const PropagationOperator& p_s,
                            const Matrix& y_base, const LabelMatrix& labels,
                            const SplitMask& mask, const ModelWeights& w,
                            GammaMode gamma_mode);

/// Vanilla two-step Correct&Smooth:
/// P_s(Y_tr + M_te(y_base + gamma(P_c(Y_tr - M_tr y_base)))).
Matrix cs_vanilla_predict(const PropagationOperator& p_c,
                          const PropagationOperator& p_s, const Matrix& y_base,
                          const LabelMatrix& labels, GammaMode gamma_mode);

/// Fraction of rows whose argmax (ties to the lowest class index) matches
/// the label argmax.
double accuracy(const Matrix& prediction, const LabelMatrix& labels,
                const IndexList& rows);

}  // namespace labeltrick
