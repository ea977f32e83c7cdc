#include "labeltrick/predictors.hpp"

#include <cmath>

namespace labeltrick {

namespace {

void check_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite())
    throw std::invalid_argument("weights: matrix " + name + " is not finite");
}

// Row-wise subtraction of the diagonal pathway: out = P t - C o t.
Matrix propagate_excluding_self(const PropagationOperator& op,
                                const Matrix& t) {
  Matrix out = op.apply(t);
  const Vector& c = op.diag();
  for (Index i = 0; i < out.rows(); ++i) out.row(i) -= c[i] * t.row(i);
  return out;
}

}  // namespace

ModelWeights ModelWeights::lp(Matrix w) {
  if (w.rows() != w.cols())
    throw std::invalid_argument("weights: W must be c x c");
  check_finite(w, "W");
  ModelWeights mw;
  mw.kind = WeightsKind::lp_w;
  mw.mats["W"] = std::move(w);
  return mw;
}

ModelWeights ModelWeights::feat_label(Matrix wx, Matrix wy) {
  if (wy.rows() != wy.cols())
    throw std::invalid_argument("weights: W_y must be c x c");
  if (wx.cols() != wy.cols())
    throw std::invalid_argument("weights: W_x and W_y class widths differ");
  check_finite(wx, "W_x");
  check_finite(wy, "W_y");
  ModelWeights mw;
  mw.kind = WeightsKind::feat_label;
  mw.mats["W_x"] = std::move(wx);
  mw.mats["W_y"] = std::move(wy);
  return mw;
}

ModelWeights ModelWeights::cs_trainable(Matrix ws, Matrix wc_hat) {
  if (ws.rows() != ws.cols() || wc_hat.rows() != wc_hat.cols() ||
      ws.rows() != wc_hat.rows())
    throw std::invalid_argument("weights: W_s and Wc_hat must both be c x c");
  check_finite(ws, "W_s");
  check_finite(wc_hat, "Wc_hat");
  ModelWeights mw;
  mw.kind = WeightsKind::cs_trainable;
  mw.mats["W_s"] = std::move(ws);
  mw.mats["Wc_hat"] = std::move(wc_hat);
  return mw;
}

ModelWeights ModelWeights::nonlinear_toy(Matrix w1, Matrix w2) {
  if (w1.cols() != w2.rows())
    throw std::invalid_argument("weights: toy layer widths disagree");
  check_finite(w1, "W1");
  check_finite(w2, "W2");
  ModelWeights mw;
  mw.kind = WeightsKind::nonlinear_toy;
  mw.mats["W1"] = std::move(w1);
  mw.mats["W2"] = std::move(w2);
  return mw;
}

const Matrix& ModelWeights::at(const std::string& name) const {
  const auto it = mats.find(name);
  if (it == mats.end())
    throw std::invalid_argument("weights: no matrix named " + name);
  return it->second;
}

Matrix& ModelWeights::at(const std::string& name) {
  const auto it = mats.find(name);
  if (it == mats.end())
    throw std::invalid_argument("weights: no matrix named " + name);
  return it->second;
}

NodeMap NodeMap::identity_map() { return NodeMap{}; }

NodeMap NodeMap::affine(Matrix a, Eigen::RowVectorXd b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("node map: affine bias width mismatch");
  NodeMap m;
  m.kind = Kind::affine;
  m.a1 = std::move(a);
  m.b1 = std::move(b);
  return m;
}

NodeMap NodeMap::one_hidden(Matrix a1, Eigen::RowVectorXd b1, Matrix a2,
                            Eigen::RowVectorXd b2) {
  if (a1.cols() != b1.cols() || a2.cols() != b2.cols() ||
      a1.cols() != a2.rows())
    throw std::invalid_argument("node map: hidden layer shape mismatch");
  NodeMap m;
  m.kind = Kind::one_hidden;
  m.a1 = std::move(a1);
  m.b1 = std::move(b1);
  m.a2 = std::move(a2);
  m.b2 = std::move(b2);
  return m;
}

Matrix NodeMap::operator()(const Matrix& z) const {
  switch (kind) {
    case Kind::identity:
      return z;
    case Kind::affine: {
      if (z.cols() != a1.rows())
        throw std::invalid_argument("node map: input width mismatch");
      return (z * a1).rowwise() + b1;
    }
    case Kind::one_hidden: {
      if (z.cols() != a1.rows())
        throw std::invalid_argument("node map: input width mismatch");
      Matrix h = ((z * a1).rowwise() + b1).array().tanh().matrix();
      return (h * a2).rowwise() + b2;
    }
  }
  throw std::logic_error("node map: unknown kind");
}

Matrix lp_predict(const PropagationOperator& op, const LabelMatrix& labels) {
  return op.apply(labels.y_tr());
}

Matrix self_excluded_predict(const PropagationOperator& op,
                             const LabelMatrix& labels,
                             const ModelWeights& w) {
  if (w.kind != WeightsKind::lp_w)
    throw std::invalid_argument("self_excluded_predict: expected lp_w kind");
  return propagate_excluding_self(op, labels.y_tr() * w.at("W"));
}

Matrix feat_label_predict(const PropagationOperator& op, const Matrix& x,
                          const LabelMatrix& labels, const ModelWeights& w) {
  if (w.kind != WeightsKind::feat_label)
    throw std::invalid_argument("feat_label_predict: expected feat_label kind");
  if (x.rows() != labels.num_nodes())
    throw std::invalid_argument("feat_label_predict: feature rows mismatch");
  if (x.cols() != w.at("W_x").rows())
    throw std::invalid_argument("feat_label_predict: W_x shape mismatch");
  return op.apply(x * w.at("W_x")) +
         propagate_excluding_self(op, labels.y_tr() * w.at("W_y"));
}

Matrix stochastic_predict(const PropagationOperator& op, const Matrix& x,
                          const LabelMatrix& labels, const SplitMask& mask,
                          const ModelWeights& w) {
  if (w.kind != WeightsKind::feat_label)
    throw std::invalid_argument("stochastic_predict: expected feat_label kind");
  const Matrix y_in_scaled = masked_labels(labels, mask, /*rescale=*/true);
  return op.apply(x * w.at("W_x")) + op.apply(y_in_scaled * w.at("W_y"));
}

Matrix composite_predict(const std::vector<PropagationOperator>& ops,
                         const Matrix& x, const LabelMatrix& labels,
                         const NodeMap& h0, const NodeMap& h1) {
  if (ops.empty())
    throw std::invalid_argument("composite_predict: need at least one operator");
  const Index n = labels.num_nodes();
  if (x.rows() != n)
    throw std::invalid_argument("composite_predict: feature rows mismatch");

  Matrix with_labels(n, x.cols() + labels.num_classes());
  with_labels << x, labels.y_tr();
  Matrix without_labels(n, x.cols() + labels.num_classes());
  without_labels << x, Matrix::Zero(n, labels.num_classes());

  const Matrix h = h0(with_labels);
  const Matrix h_zero = h0(without_labels);
  const Index q = h.cols();
  const Index k = static_cast<Index>(ops.size());

  Matrix stacked(n, k * q);
  for (Index j = 0; j < k; ++j) {
    const PropagationOperator& op = ops[static_cast<size_t>(j)];
    if (op.size() != n)
      throw std::invalid_argument("composite_predict: operator size mismatch");
    Matrix block = op.apply(h);
    const Vector& c = op.diag();
    for (Index i = 0; i < n; ++i)
      block.row(i) += c[i] * (h_zero.row(i) - h.row(i));
    stacked.middleCols(j * q, q) = block;
  }

  if (h1.kind != NodeMap::Kind::identity && h1.a1.rows() != k * q)
    throw std::invalid_argument(
        "composite_predict: h1 input width does not match operator count");
  return h1(stacked);
}

Matrix nonlinear_toy_predict(const PropagationOperator& op, const Matrix& x,
                             const Matrix& y_input, const ModelWeights& w) {
  if (w.kind != WeightsKind::nonlinear_toy)
    throw std::invalid_argument("nonlinear_toy_predict: expected toy kind");
  const Index n = op.size();
  if (x.rows() != n || y_input.rows() != n)
    throw std::invalid_argument("nonlinear_toy_predict: row count mismatch");
  Matrix z(n, x.cols() + y_input.cols());
  z << x, y_input;
  return (op.apply(z) * w.at("W1")).array().tanh().matrix() * w.at("W2");
}

Matrix gamma_scale(const Matrix& propagated, const Matrix& raw_error,
                   const std::vector<char>& in_mask, GammaMode mode) {
  if (mode == GammaMode::identity) return propagated;
  double sigma = 0.0;
  Index count = 0;
  for (Index i = 0; i < raw_error.rows(); ++i) {
    if (!in_mask[i]) continue;
    sigma += raw_error.row(i).cwiseAbs().sum();
    ++count;
  }
  if (count == 0) return propagated;
  sigma /= static_cast<double>(count);
  Matrix out = propagated;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).cwiseAbs().sum();
    if (norm > 1e-300) out.row(i) *= sigma / norm;
  }
  return out;
}

Matrix cs_trainable_predict(const PropagationOperator& p_c,
                            const PropagationOperator& p_s,
                            const Matrix& y_base, const LabelMatrix& labels,
                            const SplitMask& mask, const ModelWeights& w,
                            GammaMode gamma_mode) {
  if (w.kind != WeightsKind::cs_trainable)
    throw std::invalid_argument("cs_trainable_predict: expected cs kind");
  const Index n = labels.num_nodes();
  if (y_base.rows() != n || y_base.cols() != labels.num_classes())
    throw std::invalid_argument("cs_trainable_predict: y_base shape mismatch");

  const Matrix y_in = masked_labels(labels, mask, /*rescale=*/false);
  Matrix error_in = Matrix::Zero(n, labels.num_classes());
  for (Index i = 0; i < n; ++i)
    if (mask.in_mask[i]) error_in.row(i) = y_in.row(i) - y_base.row(i);

  const Matrix corrected =
      gamma_scale(p_c.apply(error_in), error_in, mask.in_mask, gamma_mode);

  // rows outside D_in keep the base prediction, D_in rows the true label
  Matrix blend = y_in;
  Matrix rest_correction = corrected;
  for (Index i = 0; i < n; ++i) {
    if (!mask.in_mask[i])
      blend.row(i) = y_base.row(i);
    else
      rest_correction.row(i).setZero();
  }

  return p_s.apply(blend * w.at("W_s")) +
         p_s.apply(rest_correction) * w.at("Wc_hat");
}

Matrix cs_vanilla_predict(const PropagationOperator& p_c,
                          const PropagationOperator& p_s, const Matrix& y_base,
                          const LabelMatrix& labels, GammaMode gamma_mode) {
  const Index n = labels.num_nodes();
  if (y_base.rows() != n || y_base.cols() != labels.num_classes())
    throw std::invalid_argument("cs_vanilla_predict: y_base shape mismatch");

  std::vector<char> train_mask(static_cast<size_t>(n), 0);
  for (Index i : labels.train_idx()) train_mask[i] = 1;

  const Matrix y_tr = labels.y_tr();
  Matrix error = Matrix::Zero(n, labels.num_classes());
  for (Index i : labels.train_idx())
    error.row(i) = y_tr.row(i) - y_base.row(i);

  const Matrix corrected =
      gamma_scale(p_c.apply(error), error, train_mask, gamma_mode);

  Matrix blended = y_tr;
  for (Index i = 0; i < n; ++i)
    if (!train_mask[i]) blended.row(i) = y_base.row(i) + corrected.row(i);
  return p_s.apply(blended);
}

double accuracy(const Matrix& prediction, const LabelMatrix& labels,
                const IndexList& rows) {
  if (rows.empty()) return 0.0;
  Index hits = 0;
  for (Index i : rows) {
    Index best = 0;
    for (Index c = 1; c < prediction.cols(); ++c)
      if (prediction(i, c) > prediction(i, best)) best = c;
    if (best == labels.true_class(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

}  // namespace labeltrick
