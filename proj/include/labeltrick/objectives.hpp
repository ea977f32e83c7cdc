#pragma once

#include "labeltrick/predictors.hpp"

namespace labeltrick {

enum class EvalMode { exact_enumeration, monte_carlo };

/// Two-route evaluation of an identity or bound.
struct ObjectiveReport {
  double lhs_value = 0.0;
  double rhs_value = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;  // abs_gap / max(1, |rhs_value|)
  Index n_splits_used = 0;
  EvalMode mode = EvalMode::exact_enumeration;
  double standard_error = 0.0;  // Monte Carlo only
};

struct StochasticEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  Index n_splits = 0;
};

/// E_splits[ ||Y_out - M_out P X W_x - M_out P (Y_in/alpha) W_y||_F^2 ],
/// exactly (weighted sum over all 2^m splits, m <= 20) or by Monte Carlo.
/// Accepts lp_w weights (the feature term is then absent) or feat_label.
double mse_stochastic_lhs(const PropagationOperator& op, const Matrix& x,
                          const LabelMatrix& labels, const ModelWeights& w,
                          double alpha, EvalMode mode, Index n_samples,
                          std::uint64_t seed);

/// Monte Carlo mean with its standard error.
StochasticEstimate mse_stochastic_estimate(const PropagationOperator& op,
                                           const Matrix& x,
                                           const LabelMatrix& labels,
                                           const ModelWeights& w, double alpha,
                                           Index n_samples, std::uint64_t seed);

/// ||Y_tr - M_tr P X W_x - M_tr (P - C) Y_tr W_y||_F^2
///   + ((1-alpha)/alpha) ||Gamma W_y||_F^2.
double mse_deterministic_rhs(const PropagationOperator& op, const Matrix& x,
                             const LabelMatrix& labels, const ModelWeights& w,
                             double alpha);

/// lhs = (1/(1-alpha)) * exact stochastic expectation, rhs = deterministic
/// closed form; the two sides of the regression identity.
ObjectiveReport theorem1_report(const PropagationOperator& op, const Matrix& x,
                                const LabelMatrix& labels,
                                const ModelWeights& w, double alpha);

/// Sum of row-wise cross-entropy of softmaxed logits over `rows`; log
/// probabilities clamped at -745.
double cross_entropy(const LabelMatrix& labels, const Matrix& logits,
                     const IndexList& rows);

/// lhs = (1/(1-alpha)) E[CE_{D_out}(Y_out, P X W_x + P (Y_in/alpha) W_y)],
/// rhs = CE_{D_tr}(Y_tr, P X W_x + (P-C) Y_tr W_y). Raises
/// NumericalIntegrityError if lhs < rhs - 1e-9.
ObjectiveReport ce_jensen_gap(const PropagationOperator& op, const Matrix& x,
                              const LabelMatrix& labels, const ModelWeights& w,
                              double alpha);

/// (1/(1-alpha)) E_splits[ sum_{i in D_out} ||y_i - f(X, Y_in)_i||^2 ] for
/// the nonlinear toy model; Y_in is not rescaled here.
double thm3_scaled_loss(const PropagationOperator& op, const Matrix& x,
                        const LabelMatrix& labels, const ModelWeights& w,
                        double alpha, EvalMode mode, Index n_samples,
                        std::uint64_t seed);

/// Leave-one-out limit target sum_i ||y_i - f(X, Y_tr - Y_i)_i||^2.
double thm3_loo_target(const PropagationOperator& op, const Matrix& x,
                       const LabelMatrix& labels, const ModelWeights& w);

}  // namespace labeltrick
