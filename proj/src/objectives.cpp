#include "labeltrick/objectives.hpp"

#include <cmath>

namespace labeltrick {

namespace {

// Normalizes lp_w / feat_label weights to a (W_x, W_y) pair.
std::pair<Matrix, Matrix> weights_xy(const ModelWeights& w, Index d, Index c) {
  if (w.kind == WeightsKind::lp_w) return {Matrix::Zero(d, c), w.at("W")};
  if (w.kind == WeightsKind::feat_label) {
    if (w.at("W_x").rows() != d)
      throw std::invalid_argument("objectives: W_x rows != feature width");
    return {w.at("W_x"), w.at("W_y")};
  }
  throw std::invalid_argument("objectives: expected lp_w or feat_label weights");
}

double ce_row(const Eigen::RowVectorXd& logits, Index true_class) {
  const double zmax = logits.maxCoeff();
  double sum = 0.0;
  for (Index c = 0; c < logits.cols(); ++c) sum += std::exp(logits[c] - zmax);
  const double lse = zmax + std::log(sum);
  // log softmax clamped at -745 keeps saturated rows finite
  return std::min(lse - logits[true_class], 745.0);
}

// Shared machinery for split-wise losses of the linear predictor: the
// prediction on a training row i under a split is
//   fx_i + (1/alpha) sum_{k in D_in} P_ik (y_k W_y)
// which only needs the train-block of P.
struct SplitEvaluator {
  const LabelMatrix& labels;
  Matrix fx;      // rows of P X W_x at training nodes, m x c
  Matrix block;   // P entries between training nodes, m x m
  Matrix v;       // rows y_k W_y at training nodes, m x c
  Matrix y_rows;  // true label rows at training nodes, m x c
  double alpha;

  SplitEvaluator(const PropagationOperator& op, const Matrix& x,
                 const LabelMatrix& labels_in, const ModelWeights& w,
                 double alpha_in)
      : labels(labels_in), alpha(alpha_in) {
    const Index n = labels.num_nodes();
    const Index m = labels.num_train();
    const Index c = labels.num_classes();
    if (x.rows() != n)
      throw std::invalid_argument("objectives: feature rows != node count");
    auto [wx, wy] = weights_xy(w, x.cols(), c);

    const Matrix fx_full = op.apply(x * wx);
    fx.resize(m, c);
    y_rows.resize(m, c);
    v.resize(m, c);
    for (Index j = 0; j < m; ++j) {
      const Index node = labels.train_idx()[j];
      fx.row(j) = fx_full.row(node);
      y_rows.row(j) = labels.y().row(node);
      v.row(j) = labels.y().row(node) * wy;
    }

    block.resize(m, m);
    if (op.has_dense()) {
      const Matrix& p = op.dense();
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
          block(i, j) = p(labels.train_idx()[i], labels.train_idx()[j]);
    } else {
      // One propagation per training node recovers the needed block.
      Matrix basis = Matrix::Zero(n, m);
      for (Index j = 0; j < m; ++j) basis(labels.train_idx()[j], j) = 1.0;
      const Matrix cols = op.apply(basis);
      for (Index i = 0; i < m; ++i)
        block.row(i) = cols.row(labels.train_idx()[i]);
    }
  }

  // in/out membership of training node j (local index) under `mask`.
  template <typename RowLoss>
  double split_loss(const SplitMask& mask, RowLoss&& row_loss) const {
    const Index m = labels.num_train();
    double total = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (!mask.out_mask[labels.train_idx()[i]]) continue;
      Eigen::RowVectorXd pred = fx.row(i);
      for (Index k = 0; k < m; ++k)
        if (mask.in_mask[labels.train_idx()[k]])
          pred += (block(i, k) / alpha) * v.row(k);
      total += row_loss(i, pred);
    }
    return total;
  }

  double split_mse(const SplitMask& mask) const {
    return split_loss(mask, [this](Index i, const Eigen::RowVectorXd& pred) {
      return (y_rows.row(i) - pred).squaredNorm();
    });
  }

  double split_ce(const SplitMask& mask) const {
    return split_loss(mask, [this](Index i, const Eigen::RowVectorXd& pred) {
      return ce_row(pred, labels.true_class(labels.train_idx()[i]));
    });
  }
};

}  // namespace

double mse_stochastic_lhs(const PropagationOperator& op, const Matrix& x,
                          const LabelMatrix& labels, const ModelWeights& w,
                          double alpha, EvalMode mode, Index n_samples,
                          std::uint64_t seed) {
  if (mode == EvalMode::exact_enumeration) {
    const SplitEvaluator eval(op, x, labels, w, alpha);
    double total = 0.0;
    for (const SplitMask& mask : enumerate_splits(labels, alpha))
      total += mask.weight * eval.split_mse(mask);
    return total;
  }
  return mse_stochastic_estimate(op, x, labels, w, alpha, n_samples, seed).mean;
}

StochasticEstimate mse_stochastic_estimate(const PropagationOperator& op,
                                           const Matrix& x,
                                           const LabelMatrix& labels,
                                           const ModelWeights& w, double alpha,
                                           Index n_samples,
                                           std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("objectives: need at least one sample");
  const SplitEvaluator eval(op, x, labels, w, alpha);
  SplitMix64 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Index s = 0; s < n_samples; ++s) {
    const SplitMask mask = sample_split(labels, alpha, rng);
    const double loss = eval.split_mse(mask);
    sum += loss;
    sum_sq += loss * loss;
  }
  StochasticEstimate est;
  est.n_splits = n_samples;
  est.mean = sum / static_cast<double>(n_samples);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(n_samples) - est.mean * est.mean);
  est.standard_error = std::sqrt(var / static_cast<double>(n_samples));
  return est;
}

double mse_deterministic_rhs(const PropagationOperator& op, const Matrix& x,
                             const LabelMatrix& labels, const ModelWeights& w,
                             double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("objectives: alpha must lie in (0,1)");
  auto [wx, wy] = weights_xy(w, x.cols(), labels.num_classes());
  const Matrix fx = op.apply(x * wx);
  const Matrix t = labels.y_tr() * wy;
  Matrix fy = op.apply(t);
  const Vector& c = op.diag();
  for (Index i = 0; i < fy.rows(); ++i) fy.row(i) -= c[i] * t.row(i);

  double fit = 0.0;
  for (Index i : labels.train_idx())
    fit += (labels.y().row(i) - fx.row(i) - fy.row(i)).squaredNorm();

  const Vector g = gamma_diag(op, labels);
  double penalty = 0.0;
  for (Index i : labels.train_idx())
    penalty += g[i] * g[i] * (labels.y().row(i) * wy).squaredNorm();

  return fit + (1.0 - alpha) / alpha * penalty;
}

ObjectiveReport theorem1_report(const PropagationOperator& op, const Matrix& x,
                                const LabelMatrix& labels,
                                const ModelWeights& w, double alpha) {
  ObjectiveReport rep;
  rep.mode = EvalMode::exact_enumeration;
  rep.n_splits_used = static_cast<Index>(1) << labels.num_train();
  rep.lhs_value = mse_stochastic_lhs(op, x, labels, w, alpha,
                                     EvalMode::exact_enumeration, 0, 0) /
                  (1.0 - alpha);
  rep.rhs_value = mse_deterministic_rhs(op, x, labels, w, alpha);
  rep.abs_gap = std::abs(rep.lhs_value - rep.rhs_value);
  rep.rel_gap = rep.abs_gap / std::max(1.0, std::abs(rep.rhs_value));
  return rep;
}

double cross_entropy(const LabelMatrix& labels, const Matrix& logits,
                     const IndexList& rows) {
  if (labels.kind() != LabelKind::one_hot)
    throw std::invalid_argument("cross_entropy: labels must be one-hot");
  if (logits.rows() != labels.num_nodes() ||
      logits.cols() != labels.num_classes())
    throw std::invalid_argument("cross_entropy: logits shape mismatch");
  double total = 0.0;
  for (Index i : rows) total += ce_row(logits.row(i), labels.true_class(i));
  return total;
}

ObjectiveReport ce_jensen_gap(const PropagationOperator& op, const Matrix& x,
                              const LabelMatrix& labels, const ModelWeights& w,
                              double alpha) {
  const SplitEvaluator eval(op, x, labels, w, alpha);
  double expectation = 0.0;
  for (const SplitMask& mask : enumerate_splits(labels, alpha))
    expectation += mask.weight * eval.split_ce(mask);

  auto [wx, wy] = weights_xy(w, x.cols(), labels.num_classes());
  const Matrix fx = op.apply(x * wx);
  const Matrix t = labels.y_tr() * wy;
  Matrix fy = op.apply(t);
  const Vector& c = op.diag();
  for (Index i = 0; i < fy.rows(); ++i) fy.row(i) -= c[i] * t.row(i);

  ObjectiveReport rep;
  rep.mode = EvalMode::exact_enumeration;
  rep.n_splits_used = static_cast<Index>(1) << labels.num_train();
  rep.lhs_value = expectation / (1.0 - alpha);
  rep.rhs_value = cross_entropy(labels, fx + fy, labels.train_idx());
  rep.abs_gap = std::abs(rep.lhs_value - rep.rhs_value);
  rep.rel_gap = rep.abs_gap / std::max(1.0, std::abs(rep.rhs_value));
  if (rep.lhs_value < rep.rhs_value - 1e-9)
    throw NumericalIntegrityError(
        "ce_jensen_gap: bound violated by " +
        std::to_string(rep.rhs_value - rep.lhs_value));
  return rep;
}

namespace {

double thm3_split_loss(const PropagationOperator& op, const Matrix& x,
                       const LabelMatrix& labels, const ModelWeights& w,
                       const SplitMask& mask) {
  const Matrix y_in = masked_labels(labels, mask, /*rescale=*/false);
  const Matrix pred = nonlinear_toy_predict(op, x, y_in, w);
  double loss = 0.0;
  for (Index i : labels.train_idx())
    if (mask.out_mask[i])
      loss += (labels.y().row(i) - pred.row(i)).squaredNorm();
  return loss;
}

}  // namespace

double thm3_scaled_loss(const PropagationOperator& op, const Matrix& x,
                        const LabelMatrix& labels, const ModelWeights& w,
                        double alpha, EvalMode mode, Index n_samples,
                        std::uint64_t seed) {
  if (mode == EvalMode::exact_enumeration) {
    double total = 0.0;
    for (const SplitMask& mask : enumerate_splits(labels, alpha))
      total += mask.weight * thm3_split_loss(op, x, labels, w, mask);
    return total / (1.0 - alpha);
  }
  SplitMix64 rng(seed);
  double sum = 0.0;
  for (Index s = 0; s < n_samples; ++s) {
    const SplitMask mask = sample_split(labels, alpha, rng);
    sum += thm3_split_loss(op, x, labels, w, mask);
  }
  return sum / static_cast<double>(n_samples) / (1.0 - alpha);
}

double thm3_loo_target(const PropagationOperator& op, const Matrix& x,
                       const LabelMatrix& labels, const ModelWeights& w) {
  const Matrix y_tr = labels.y_tr();
  double total = 0.0;
  for (Index i : labels.train_idx()) {
    Matrix y_in = y_tr;
    y_in.row(i).setZero();
    const Matrix pred = nonlinear_toy_predict(op, x, y_in, w);
    total += (labels.y().row(i) - pred.row(i)).squaredNorm();
  }
  return total;
}

}  // namespace labeltrick
