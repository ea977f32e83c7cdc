#include <doctest.h>

#include "labeltrick/predictors.hpp"
#include "test_helpers.hpp"

using namespace labeltrick;

namespace {

SplitMask full_in_mask(const LabelMatrix& labels, double alpha) {
  SplitMask m;
  m.in_mask.assign(static_cast<size_t>(labels.num_nodes()), 0);
  m.out_mask.assign(static_cast<size_t>(labels.num_nodes()), 0);
  m.alpha = alpha;
  for (Index i : labels.train_idx()) m.in_mask[i] = 1;
  return m;
}

}  // namespace

TEST_CASE("lp predict") {
  // edgeless: (1-lambda) Y_tr, so train nodes recover their own labels
  const LabelMatrix labels(Matrix::Identity(4, 4), {0, 1, 2},
                           LabelKind::one_hot);
  const PropagationOperator ed =
      closed_form_operator(oracle::edgeless(4).normalized_adjacency(), 0.4);
  const Matrix pred = lp_predict(ed, labels);
  CHECK((pred - 0.6 * labels.y_tr()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(accuracy(pred, labels, {0, 1, 2}) == 1.0);

  // 2-node edge, only node 0 trained: row 1 is P_10 * y_0 = y_0 / 3
  const PropagationOperator p2 =
      closed_form_operator(oracle::path2().normalized_adjacency(), 0.5);
  Matrix y = Matrix::Zero(2, 2);
  y(0, 0) = 1.0;
  y(1, 1) = 1.0;
  const LabelMatrix one(y, {0}, LabelKind::one_hot);
  const Matrix lp = lp_predict(p2, one);
  CHECK(lp(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(lp(1, 1) == 0.0);
}

TEST_CASE("lp predict separates a two-cluster SBM") {
  // 50 per cluster, 10 labeled per cluster
  const Dataset ds = make_sbm(50, 0.5, 0.01, 424242);
  IndexList train;
  for (Index i = 0; i < 10; ++i) train.push_back(i);
  for (Index i = 50; i < 60; ++i) train.push_back(i);
  const LabelMatrix labels(ds.labels.y(), train, LabelKind::one_hot);
  const PropagationOperator op =
      closed_form_operator(ds.graph.normalized_adjacency(), 0.6);
  IndexList unlabeled;
  for (Index i = 0; i < 100; ++i)
    if (!labels.is_train(i)) unlabeled.push_back(i);
  CHECK(accuracy(lp_predict(op, labels), labels, unlabeled) >= 0.9);
}

TEST_CASE("self-excluded predictor") {
  const PropagationOperator p2 =
      closed_form_operator(oracle::path2().normalized_adjacency(), 0.5);
  const LabelMatrix both(Matrix::Identity(2, 2), oracle::range(2),
                         LabelKind::one_hot);
  const ModelWeights eye = ModelWeights::lp(Matrix::Identity(2, 2));

  // both trained: own label blocked, neighbor label scaled by 1/3
  const Matrix pred = self_excluded_predict(p2, both, eye);
  Matrix expect(2, 2);
  expect << 0, 1.0 / 3.0, 1.0 / 3.0, 0;
  CHECK((pred - expect).cwiseAbs().maxCoeff() <= 1e-14);

  // edgeless: nothing to propagate from others
  const PropagationOperator ed =
      closed_form_operator(oracle::edgeless(3).normalized_adjacency(), 0.5);
  const LabelMatrix l3(Matrix::Identity(3, 3), oracle::range(3),
                       LabelKind::one_hot);
  CHECK(self_excluded_predict(ed, l3, ModelWeights::lp(Matrix::Identity(3, 3)))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("test rows of the self-excluded predictor equal plain LP exactly") {
  SplitMix64 rng(61);
  for (int t = 0; t < 5; ++t) {
    const Index n = 6 + static_cast<Index>(rng.next_below(8));
    const Graph g = make_erdos_renyi(n, 0.4, rng);
    const PropagationOperator op =
        closed_form_operator(g.normalized_adjacency(), 0.6);
    const Index m = 3 + static_cast<Index>(rng.next_below(3));
    const LabelMatrix labels(oracle::random_one_hot(rng, n, 3),
                             oracle::range(m), LabelKind::one_hot);
    const Matrix w = oracle::random_matrix(rng, 3, 3);

    const Matrix selp =
        self_excluded_predict(op, labels, ModelWeights::lp(w));
    const Matrix lp_w = op.apply(labels.y_tr() * w);
    for (Index i = m; i < n; ++i)
      CHECK((selp.row(i) - lp_w.row(i)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("feature and label predictor") {
  SplitMix64 rng(67);
  const Graph g = make_erdos_renyi(8, 0.5, rng);
  const PropagationOperator op =
      closed_form_operator(g.normalized_adjacency(), 0.55);
  const LabelMatrix labels(oracle::random_one_hot(rng, 8, 2), oracle::range(5),
                           LabelKind::one_hot);
  const Matrix x = oracle::random_matrix(rng, 8, 3);
  const Matrix wx = oracle::random_matrix(rng, 3, 2);
  const Matrix wy = oracle::random_matrix(rng, 2, 2);

  // W_y = 0 reduces to the SGC-like feature path
  const Matrix feat_only = feat_label_predict(
      op, x, labels, ModelWeights::feat_label(wx, Matrix::Zero(2, 2)));
  CHECK((feat_only - op.dense() * x * wx).cwiseAbs().maxCoeff() <= 1e-12);

  // W_x = 0, W_y = I reduces to self-excluded propagation
  const Matrix label_only = feat_label_predict(
      op, x, labels,
      ModelWeights::feat_label(Matrix::Zero(3, 2), Matrix::Identity(2, 2)));
  const Matrix selp = self_excluded_predict(
      op, labels, ModelWeights::lp(Matrix::Identity(2, 2)));
  CHECK((label_only - selp).cwiseAbs().maxCoeff() == 0.0);

  // dense brute force of P X W_x + (P - C) Y_tr W_y
  const Matrix p = op.dense();
  const Matrix c = op.diag().asDiagonal();
  const Matrix brute = p * x * wx + (p - c) * labels.y_tr() * wy;
  const Matrix pred =
      feat_label_predict(op, x, labels, ModelWeights::feat_label(wx, wy));
  CHECK((pred - brute).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stochastic predictor") {
  SplitMix64 rng(71);
  const Graph g = make_erdos_renyi(7, 0.5, rng);
  const PropagationOperator op =
      closed_form_operator(g.normalized_adjacency(), 0.5);
  const LabelMatrix labels(oracle::random_one_hot(rng, 7, 2), oracle::range(4),
                           LabelKind::one_hot);
  const Matrix x = oracle::random_matrix(rng, 7, 2);
  const Matrix wx = oracle::random_matrix(rng, 2, 2);
  const Matrix wy = oracle::random_matrix(rng, 2, 2);
  const ModelWeights w = ModelWeights::feat_label(wx, wy);

  // empty D_in: the label term vanishes
  SplitMask none;
  none.in_mask.assign(7, 0);
  none.out_mask.assign(7, 0);
  none.alpha = 0.5;
  for (Index i : labels.train_idx()) none.out_mask[i] = 1;
  const Matrix feat_only = stochastic_predict(op, x, labels, none, w);
  CHECK((feat_only - op.apply(x * wx)).cwiseAbs().maxCoeff() == 0.0);

  // full D_in at alpha = 1 reduces the label term to P Y_tr W_y
  const SplitMask full = full_in_mask(labels, 1.0);
  const Matrix full_pred = stochastic_predict(op, x, labels, full, w);
  const Matrix expect = op.apply(x * wx) + op.apply(labels.y_tr() * wy);
  CHECK((full_pred - expect).cwiseAbs().maxCoeff() <= 1e-14);

  // exact-enumeration average of the label term on training rows equals
  // (1-alpha) M_tr (P - C) Y_tr W_y
  const double alpha = 0.4;
  const Matrix p = op.dense();
  Matrix average = Matrix::Zero(7, 2);
  oracle::for_each_subset(
      labels.train_idx(), alpha,
      [&](double weight, const Matrix& m_in) {
        Matrix m_tr = Matrix::Zero(7, 7);
        for (Index i : labels.train_idx()) m_tr(i, i) = 1.0;
        const Matrix m_out = m_tr - m_in;
        average += weight * m_out * p * (m_in * labels.y() / alpha) * wy;
      },
      7);
  const Matrix c = op.diag().asDiagonal();
  Matrix target = (p - c) * labels.y_tr() * wy;
  for (Index i = 0; i < 7; ++i)
    if (!labels.is_train(i)) target.row(i).setZero();
  CHECK((average - (1 - alpha) * target).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("composite predictor") {
  SplitMix64 rng(73);
  const Graph g = make_erdos_renyi(6, 0.5, rng);
  const SparseMatrix& s = g.normalized_adjacency();
  const LabelMatrix labels(oracle::random_one_hot(rng, 6, 2), oracle::range(4),
                           LabelKind::one_hot);

  // identity maps, single operator, no features: self-excluded propagation
  const PropagationOperator op = closed_form_operator(s, 0.5);
  const Matrix no_x(6, 0);
  const Matrix reduced = composite_predict({op}, no_x, labels,
                                           NodeMap::identity_map(),
                                           NodeMap::identity_map());
  const Matrix selp = self_excluded_predict(
      op, labels, ModelWeights::lp(Matrix::Identity(2, 2)));
  CHECK((reduced - selp).cwiseAbs().maxCoeff() <= 1e-14);

  // zero labels: plain linear propagation of h0([X, 0])
  const Matrix x = oracle::random_matrix(rng, 6, 2);
  const LabelMatrix zero_labels(Matrix::Zero(6, 2), {}, LabelKind::one_hot);
  const Matrix plain = composite_predict({op}, x, zero_labels,
                                         NodeMap::identity_map(),
                                         NodeMap::identity_map());
  Matrix padded(6, 4);
  padded << x, Matrix::Zero(6, 2);
  CHECK((plain - op.dense() * padded).cwiseAbs().maxCoeff() <= 1e-12);

  // affine h0: matches the leave-one-out expansion row by row
  const NodeMap h0 = NodeMap::affine(oracle::random_matrix(rng, 4, 3),
                                     oracle::random_matrix(rng, 1, 3).row(0));
  const PropagationOperator op2 = closed_form_operator(s, 0.7);
  const std::vector<PropagationOperator> ops = {op, op2};
  const Matrix combined =
      composite_predict(ops, x, labels, h0, NodeMap::identity_map());
  for (Index i : labels.train_idx()) {
    Matrix y_loo = labels.y_tr();
    y_loo.row(i).setZero();
    Matrix z(6, 4);
    z << x, y_loo;
    const Matrix h = h0(z);
    for (size_t j = 0; j < ops.size(); ++j) {
      const Matrix block = ops[j].dense() * h;
      CHECK((combined.row(i).segment(static_cast<Index>(j) * 3, 3) -
             block.row(i))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
    }
  }

  // h1 width mismatch is rejected
  const NodeMap bad_h1 = NodeMap::affine(oracle::random_matrix(rng, 5, 2),
                                         oracle::random_matrix(rng, 1, 2).row(0));
  CHECK_THROWS_AS(composite_predict(ops, x, labels, h0, bad_h1),
                  std::invalid_argument);
}

TEST_CASE("nonlinear toy predictor") {
  SplitMix64 rng(79);
  const Graph g = make_erdos_renyi(5, 0.5, rng);
  const PropagationOperator op =
      closed_form_operator(g.normalized_adjacency(), 0.5);
  const Matrix x = oracle::random_matrix(rng, 5, 2);
  const Matrix y_input = oracle::random_matrix(rng, 5, 2);

  const ModelWeights zero_out = ModelWeights::nonlinear_toy(
      oracle::random_matrix(rng, 4, 8), Matrix::Zero(8, 2));
  CHECK(nonlinear_toy_predict(op, x, y_input, zero_out)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  const ModelWeights zero_hidden = ModelWeights::nonlinear_toy(
      Matrix::Zero(4, 8), oracle::random_matrix(rng, 8, 2));
  CHECK(nonlinear_toy_predict(op, x, y_input, zero_hidden)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // independent dense evaluation of tanh(P [X,Y] W1) W2
  const Matrix w1 = oracle::random_matrix(rng, 4, 8, 0.5);
  const Matrix w2 = oracle::random_matrix(rng, 8, 2, 0.5);
  Matrix z(5, 4);
  z << x, y_input;
  const Matrix brute =
      ((op.dense() * z * w1).array().tanh()).matrix() * w2;
  const Matrix pred = nonlinear_toy_predict(
      op, x, y_input, ModelWeights::nonlinear_toy(w1, w2));
  CHECK((pred - brute).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("trainable C&S predictor") {
  SplitMix64 rng(83);
  const Graph g = make_erdos_renyi(10, 0.4, rng);
  const SparseMatrix& s = g.normalized_adjacency();
  const PropagationOperator pc = closed_form_operator(s, 0.5);
  const PropagationOperator ps = closed_form_operator(s, 0.7);
  const LabelMatrix labels(oracle::random_one_hot(rng, 10, 3),
                           oracle::range(6), LabelKind::one_hot);
  const Matrix base = make_miscalibrated_base(labels, 0.3, 5);

  // W_s = I, Wc_hat = 0, D_in = D_tr reduces to smooth-only C&S
  const SplitMask full = full_in_mask(labels, 0.5);
  const ModelWeights smooth_only = ModelWeights::cs_trainable(
      Matrix::Identity(3, 3), Matrix::Zero(3, 3));
  const Matrix pred = cs_trainable_predict(pc, ps, base, labels, full,
                                           smooth_only, GammaMode::identity);
  Matrix blend = labels.y_tr();
  for (Index i = 0; i < 10; ++i)
    if (!labels.is_train(i)) blend.row(i) = base.row(i);
  CHECK((pred - ps.dense() * blend).cwiseAbs().maxCoeff() <= 1e-12);

  // a perfectly calibrated base has nothing to correct
  const Matrix perfect = labels.y();
  const SplitMask half = sample_split(labels, 0.5, std::uint64_t{17});
  const ModelWeights with_corr = ModelWeights::cs_trainable(
      Matrix::Identity(3, 3), oracle::random_matrix(rng, 3, 3));
  const Matrix corrected = cs_trainable_predict(
      pc, ps, perfect, labels, half, with_corr, GammaMode::identity);
  const ModelWeights no_corr = ModelWeights::cs_trainable(
      Matrix::Identity(3, 3), Matrix::Zero(3, 3));
  const Matrix uncorrected = cs_trainable_predict(
      pc, ps, perfect, labels, half, no_corr, GammaMode::identity);
  CHECK((corrected - uncorrected).cwiseAbs().maxCoeff() <= 1e-13);

  // step-by-step dense evaluation of the unreparameterized form
  const Matrix ws = oracle::random_matrix(rng, 3, 3);
  const Matrix wc = oracle::random_matrix(rng, 3, 3);
  const SplitMask mask = sample_split(labels, 0.6, std::uint64_t{23});
  const Matrix got = cs_trainable_predict(
      pc, ps, base, labels, mask, ModelWeights::cs_trainable(ws, wc * ws),
      GammaMode::identity);

  Matrix m_in = Matrix::Zero(10, 10);
  Matrix m_rest = Matrix::Identity(10, 10);
  for (Index i = 0; i < 10; ++i)
    if (mask.in_mask[i]) {
      m_in(i, i) = 1.0;
      m_rest(i, i) = 0.0;
    }
  const Matrix y_in = m_in * labels.y();
  const Matrix e_in = pc.dense() * (y_in - m_in * base);
  const Matrix brute =
      ps.dense() * (y_in + m_rest * (base + e_in * wc)) * ws;
  CHECK((got - brute).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gamma scaling modes") {
  SplitMix64 rng(89);
  Matrix raw = Matrix::Zero(4, 2);
  raw.row(0) << 1.0, -1.0;  // L1 = 2
  raw.row(1) << 0.5, 0.5;   // L1 = 1
  std::vector<char> in_mask = {1, 1, 0, 0};
  Matrix propagated = oracle::random_matrix(rng, 4, 2);
  propagated.row(3).setZero();

  CHECK((gamma_scale(propagated, raw, in_mask, GammaMode::identity) -
         propagated)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  const Matrix scaled =
      gamma_scale(propagated, raw, in_mask, GammaMode::autoscale);
  const double sigma = (2.0 + 1.0) / 2.0;
  for (Index i = 0; i < 3; ++i)
    CHECK(scaled.row(i).cwiseAbs().sum() == doctest::Approx(sigma));
  CHECK(scaled.row(3).cwiseAbs().maxCoeff() == 0.0);  // zero rows stay zero
}

TEST_CASE("vanilla C&S on a perfect base is plain label smoothing") {
  SplitMix64 rng(97);
  const Graph g = make_erdos_renyi(8, 0.5, rng);
  const SparseMatrix& s = g.normalized_adjacency();
  const PropagationOperator pc = closed_form_operator(s, 0.5);
  const PropagationOperator ps = closed_form_operator(s, 0.6);
  const LabelMatrix labels(oracle::random_one_hot(rng, 8, 2), oracle::range(5),
                           LabelKind::one_hot);
  const Matrix pred = cs_vanilla_predict(pc, ps, labels.y(), labels,
                                         GammaMode::identity);
  Matrix blend = labels.y_tr();
  for (Index i = 5; i < 8; ++i) blend.row(i) = labels.y().row(i);
  CHECK((pred - ps.dense() * blend).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("accuracy breaks ties toward the lowest class") {
  Matrix pred = Matrix::Zero(2, 3);
  Matrix y = Matrix::Zero(2, 3);
  y(0, 0) = 1.0;
  y(1, 2) = 1.0;
  const LabelMatrix labels(y, {0, 1}, LabelKind::one_hot);
  CHECK(accuracy(pred, labels, {0, 1}) == 0.5);  // ties predict class 0
}
