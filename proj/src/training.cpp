#include "labeltrick/training.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <fstream>
#include <sstream>

namespace labeltrick {

namespace {

double ce_row_loss(const Eigen::RowVectorXd& logits, Index true_class) {
  const double zmax = logits.maxCoeff();
  double sum = 0.0;
  for (Index c = 0; c < logits.cols(); ++c) sum += std::exp(logits[c] - zmax);
  return std::min(zmax + std::log(sum) - logits[true_class], 745.0);
}

Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& logits) {
  const double zmax = logits.maxCoeff();
  Eigen::RowVectorXd p = (logits.array() - zmax).exp();
  return p / p.sum();
}

std::pair<Matrix, Matrix> weights_xy(const ModelWeights& w, Index d, Index c) {
  if (w.kind == WeightsKind::lp_w) return {Matrix::Zero(d, c), w.at("W")};
  if (w.kind == WeightsKind::feat_label) return {w.at("W_x"), w.at("W_y")};
  throw std::invalid_argument("training: expected lp_w or feat_label weights");
}

ModelWeights pack_xy(WeightsKind kind, Matrix wx, Matrix wy) {
  if (kind == WeightsKind::lp_w) return ModelWeights::lp(std::move(wy));
  return ModelWeights::feat_label(std::move(wx), std::move(wy));
}

// Train-row design shared by losses, gradients and the ridge solve:
//   ax      rows of P X at training nodes            (m x d)
//   ay      rows of (P - C) Y_tr at training nodes   (m x c)
//   y_rows  true labels at training nodes            (m x c)
//   block   P entries between training nodes         (m x m, on demand)
//   g_rows  Gamma rows g_i * y_i                     (m x c, on demand)
struct Design {
  const LabelMatrix* labels = nullptr;
  Matrix ax, ay, y_rows, g_rows, block;
  IndexList classes;  // argmax class per training row
  double kappa = 0.0;

  Design(const PropagationOperator& op, const Matrix& x,
         const LabelMatrix& labels_in, double alpha, bool need_gamma,
         bool need_block)
      : labels(&labels_in) {
    const Index n = labels_in.num_nodes();
    const Index m = labels_in.num_train();
    const Index c = labels_in.num_classes();
    if (x.rows() != n)
      throw std::invalid_argument("training: feature rows != node count");

    const Matrix px = op.apply(x);
    const Matrix y_tr = labels_in.y_tr();
    Matrix py = op.apply(y_tr);
    const Vector& diag = op.diag();
    for (Index i = 0; i < n; ++i) py.row(i) -= diag[i] * y_tr.row(i);

    ax.resize(m, x.cols());
    ay.resize(m, c);
    y_rows.resize(m, c);
    classes.resize(static_cast<size_t>(m));
    for (Index j = 0; j < m; ++j) {
      const Index node = labels_in.train_idx()[j];
      ax.row(j) = px.row(node);
      ay.row(j) = py.row(node);
      y_rows.row(j) = labels_in.y().row(node);
      classes[j] = labels_in.true_class(node);
    }

    if (need_gamma) {
      const Vector g = gamma_diag(op, labels_in);
      g_rows.resize(m, c);
      for (Index j = 0; j < m; ++j) {
        const Index node = labels_in.train_idx()[j];
        g_rows.row(j) = g[node] * labels_in.y().row(node);
      }
      kappa = (1.0 - alpha) / alpha;
    }

    if (need_block) {
      block.resize(m, m);
      if (op.has_dense()) {
        const Matrix& p = op.dense();
        for (Index i = 0; i < m; ++i)
          for (Index j = 0; j < m; ++j)
            block(i, j) =
                p(labels_in.train_idx()[i], labels_in.train_idx()[j]);
      } else {
        Matrix basis = Matrix::Zero(n, m);
        for (Index j = 0; j < m; ++j) basis(labels_in.train_idx()[j], j) = 1.0;
        const Matrix cols = op.apply(basis);
        for (Index i = 0; i < m; ++i)
          block.row(i) = cols.row(labels_in.train_idx()[i]);
      }
    }
  }

  LossGrad deterministic(const Matrix& wx, const Matrix& wy,
                         TrainLoss loss) const {
    LossGrad lg;
    if (loss == TrainLoss::mse) {
      const Matrix residual = y_rows - ax * wx - ay * wy;
      lg.loss = residual.squaredNorm();
      lg.grad_x = -2.0 * ax.transpose() * residual;
      lg.grad_y = -2.0 * ay.transpose() * residual;
      if (kappa > 0.0) {
        const Matrix gw = g_rows * wy;
        lg.loss += kappa * gw.squaredNorm();
        lg.grad_y += 2.0 * kappa * g_rows.transpose() * gw;
      }
    } else {
      const Matrix logits = ax * wx + ay * wy;
      Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
      double total = 0.0;
      for (Index j = 0; j < logits.rows(); ++j) {
        total += ce_row_loss(logits.row(j), classes[j]);
        grad.row(j) = softmax_row(logits.row(j));
        grad(j, classes[j]) -= 1.0;
      }
      lg.loss = total;
      lg.grad_x = ax.transpose() * grad;
      lg.grad_y = ay.transpose() * grad;
    }
    return lg;
  }

  LossGrad stochastic(const Matrix& wx, const Matrix& wy,
                      const SplitMask& mask, TrainLoss loss) const {
    const Index m = labels->num_train();
    IndexList out_local;
    IndexList in_local;
    for (Index j = 0; j < m; ++j) {
      const Index node = labels->train_idx()[j];
      if (mask.out_mask[node]) out_local.push_back(j);
      if (mask.in_mask[node]) in_local.push_back(j);
    }

    // design rows over D_out: bx = (P X)_out, by = (P Y_in / alpha)_out
    const Index n_out = static_cast<Index>(out_local.size());
    Matrix bx(n_out, ax.cols());
    Matrix by = Matrix::Zero(n_out, y_rows.cols());
    Matrix y_out(n_out, y_rows.cols());
    for (Index r = 0; r < n_out; ++r) {
      const Index i = out_local[r];
      bx.row(r) = ax.row(i);
      y_out.row(r) = y_rows.row(i);
      for (Index k : in_local)
        by.row(r) += (block(i, k) / mask.alpha) * y_rows.row(k);
    }

    LossGrad lg;
    if (loss == TrainLoss::mse) {
      const Matrix residual = y_out - bx * wx - by * wy;
      lg.loss = residual.squaredNorm();
      lg.grad_x = -2.0 * bx.transpose() * residual;
      lg.grad_y = -2.0 * by.transpose() * residual;
    } else {
      const Matrix logits = bx * wx + by * wy;
      Matrix grad = Matrix::Zero(n_out, y_rows.cols());
      double total = 0.0;
      for (Index r = 0; r < n_out; ++r) {
        total += ce_row_loss(logits.row(r), classes[out_local[r]]);
        grad.row(r) = softmax_row(logits.row(r));
        grad(r, classes[out_local[r]]) -= 1.0;
      }
      lg.loss = total;
      lg.grad_x = bx.transpose() * grad;
      lg.grad_y = by.transpose() * grad;
    }
    return lg;
  }
};

void check_config(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("training: lr must be > 0");
  if (cfg.epochs < 1)
    throw std::invalid_argument("training: epochs must be >= 1");
  if (cfg.trick != Trick::none && !(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("training: alpha must lie in (0,1)");
}

}  // namespace

LossGrad deterministic_loss_grad(const PropagationOperator& op,
                                 const Matrix& x, const LabelMatrix& labels,
                                 const ModelWeights& w, double alpha,
                                 TrainLoss loss) {
  auto [wx, wy] = weights_xy(w, x.cols(), labels.num_classes());
  const bool need_gamma = loss == TrainLoss::mse;
  const Design design(op, x, labels, alpha, need_gamma, false);
  return design.deterministic(wx, wy, loss);
}

LossGrad stochastic_loss_grad(const PropagationOperator& op, const Matrix& x,
                              const LabelMatrix& labels, const SplitMask& mask,
                              const ModelWeights& w, TrainLoss loss) {
  auto [wx, wy] = weights_xy(w, x.cols(), labels.num_classes());
  const Design design(op, x, labels, mask.alpha, false, true);
  return design.stochastic(wx, wy, mask, loss);
}

CsLossGrad cs_loss_grad(const Matrix& ys_out, const Matrix& yc_out,
                        const Matrix& y_out, const IndexList& out_classes,
                        const ModelWeights& w, TrainLoss loss) {
  const Matrix& ws = w.at("W_s");
  const Matrix& wc = w.at("Wc_hat");
  const Matrix logits = ys_out * ws + yc_out * wc;
  CsLossGrad lg;
  if (loss == TrainLoss::mse) {
    const Matrix residual = y_out - logits;
    lg.loss = residual.squaredNorm();
    lg.grad_s = -2.0 * ys_out.transpose() * residual;
    lg.grad_c = -2.0 * yc_out.transpose() * residual;
  } else {
    Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
    double total = 0.0;
    for (Index r = 0; r < logits.rows(); ++r) {
      total += ce_row_loss(logits.row(r), out_classes[r]);
      grad.row(r) = softmax_row(logits.row(r));
      grad(r, out_classes[r]) -= 1.0;
    }
    lg.loss = total;
    lg.grad_s = ys_out.transpose() * grad;
    lg.grad_c = yc_out.transpose() * grad;
  }
  return lg;
}

ModelWeights solve_ridge(const PropagationOperator& op, const Matrix& x,
                         const LabelMatrix& labels, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("training: alpha must lie in (0,1)");
  const Design design(op, x, labels, alpha, true, false);
  const Index d = x.cols();
  const Index c = labels.num_classes();

  Matrix a(design.ax.rows(), d + c);
  a << design.ax, design.ay;
  Matrix gram = a.transpose() * a;
  gram.bottomRightCorner(c, c) +=
      design.kappa * design.g_rows.transpose() * design.g_rows;
  gram += 1e-10 * Matrix::Identity(d + c, d + c);
  const Matrix rhs = a.transpose() * design.y_rows;

  Eigen::LDLT<Matrix> ldlt(gram);
  Matrix solution;
  bool bad = ldlt.info() != Eigen::Success;
  if (!bad) {
    solution = ldlt.solve(rhs);
    const double residual = (gram * solution - rhs).cwiseAbs().maxCoeff();
    bad = !(residual <= 1e-6 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
  if (bad) {
    const auto rank = Eigen::FullPivLU<Matrix>(gram).rank();
    throw NumericalIntegrityError(
        "solve_ridge: normal equations singular beyond jitter (rank " +
        std::to_string(rank) + " of " + std::to_string(d + c) + ")");
  }
  return pack_xy(d == 0 ? WeightsKind::lp_w : WeightsKind::feat_label,
                 solution.topRows(d), solution.bottomRows(c));
}

namespace {

Matrix inference_prediction(const PropagationOperator& op, const Matrix& x,
                            const LabelMatrix& labels, const Matrix& wx,
                            const Matrix& wy) {
  const Matrix t = labels.y_tr() * wy;
  Matrix out = op.apply(x * wx) + op.apply(t);
  const Vector& c = op.diag();
  for (Index i = 0; i < out.rows(); ++i) out.row(i) -= c[i] * t.row(i);
  return out;
}

FitResult fit_linear_common(const PropagationOperator& op, const Matrix& x,
                            const LabelMatrix& labels, const TrainConfig& cfg,
                            const IndexList& val_idx, const IndexList& test_idx,
                            WeightsKind kind, const ModelWeights* init) {
  check_config(cfg);
  const Index d = x.cols();
  const Index c = labels.num_classes();

  Matrix wx = Matrix::Zero(d, c);
  Matrix wy = Matrix::Zero(c, c);
  if (init) std::tie(wx, wy) = weights_xy(*init, d, c);

  const bool need_gamma =
      cfg.trick == Trick::deterministic && cfg.loss == TrainLoss::mse;
  const bool need_block = cfg.trick == Trick::stochastic;
  const Design design(op, x, labels, cfg.alpha, need_gamma, need_block);
  SplitMix64 rng(cfg.seed);

  const double wd = cfg.weight_decay;
  auto eval = [&](const Matrix& wx_in, const Matrix& wy_in,
                  const SplitMask* mask) {
    LossGrad lg = mask ? design.stochastic(wx_in, wy_in, *mask, cfg.loss)
                       : design.deterministic(wx_in, wy_in, cfg.loss);
    if (cfg.trick == Trick::none) {
      // label pathway frozen at zero; only W_x trains
      lg.grad_y.setZero();
    }
    if (wd > 0.0) {
      lg.loss += wd * (wx_in.squaredNorm() + wy_in.squaredNorm());
      lg.grad_x += 2.0 * wd * wx_in;
      if (cfg.trick != Trick::none) lg.grad_y += 2.0 * wd * wy_in;
    }
    return lg;
  };

  FitResult result{pack_xy(kind, wx, wy), {}, 0.0, 0.0};
  double best_val = -1.0;
  Index since_best = 0;
  Matrix best_wx = wx;
  Matrix best_wy = wy;

  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    SplitMask mask;
    const bool stochastic = cfg.trick == Trick::stochastic;
    if (stochastic) {
      SplitMix64 epoch_rng = rng.split(static_cast<std::uint64_t>(epoch));
      mask = sample_split(labels, cfg.alpha, epoch_rng);
    }
    const SplitMask* mask_ptr = stochastic ? &mask : nullptr;

    const LossGrad lg = eval(wx, wy, mask_ptr);
    result.train_curve.push_back(lg.loss);

    double step = cfg.lr;
    Matrix try_x = wx - step * lg.grad_x;
    Matrix try_y = wy - step * lg.grad_y;
    if (!stochastic && cfg.backtracking) {
      for (int halvings = 0; halvings < 60; ++halvings) {
        if (eval(try_x, try_y, mask_ptr).loss <= lg.loss) break;
        step *= 0.5;
        try_x = wx - step * lg.grad_x;
        try_y = wy - step * lg.grad_y;
        if (halvings == 59) {
          try_x = wx;
          try_y = wy;
        }
      }
    }
    wx = try_x;
    wy = try_y;

    if (cfg.early_stop_patience > 0 && !val_idx.empty()) {
      const double val_acc = accuracy(
          inference_prediction(op, x, labels, wx, wy), labels, val_idx);
      if (val_acc > best_val) {
        best_val = val_acc;
        best_wx = wx;
        best_wy = wy;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }

  if (cfg.early_stop_patience > 0 && best_val >= 0.0) {
    wx = best_wx;
    wy = best_wy;
  }

  const Matrix prediction = inference_prediction(op, x, labels, wx, wy);
  result.weights = pack_xy(kind, wx, wy);
  result.val_accuracy =
      val_idx.empty() ? 0.0 : accuracy(prediction, labels, val_idx);
  result.test_accuracy =
      test_idx.empty() ? 0.0 : accuracy(prediction, labels, test_idx);
  return result;
}

}  // namespace

FitResult fit_trainable_lp(const PropagationOperator& op,
                           const LabelMatrix& labels, const TrainConfig& cfg,
                           const IndexList& val_idx, const IndexList& test_idx,
                           const ModelWeights* init) {
  if (cfg.trick == Trick::none)
    throw std::invalid_argument(
        "fit_trainable_lp: plain label propagation has no parameters; "
        "choose the stochastic or deterministic trick");
  const Matrix empty(labels.num_nodes(), 0);
  return fit_linear_common(op, empty, labels, cfg, val_idx, test_idx,
                           WeightsKind::lp_w, init);
}

FitResult fit_linear_model(const PropagationOperator& op, const Matrix& x,
                           const LabelMatrix& labels, const TrainConfig& cfg,
                           const IndexList& val_idx, const IndexList& test_idx,
                           const ModelWeights* init) {
  if (x.cols() == 0)
    throw std::invalid_argument("fit_linear_model: features are required");
  return fit_linear_common(op, x, labels, cfg, val_idx, test_idx,
                           WeightsKind::feat_label, init);
}

FitResult fit_trainable_cs(const PropagationOperator& p_c,
                           const PropagationOperator& p_s,
                           const Matrix& y_base, const LabelMatrix& labels,
                           const TrainConfig& cfg, const IndexList& val_idx,
                           const IndexList& test_idx, GammaMode gamma_mode,
                           const ModelWeights* init) {
  check_config(cfg);
  if (y_base.rows() != labels.num_nodes() ||
      y_base.cols() != labels.num_classes())
    throw std::invalid_argument("fit_trainable_cs: y_base shape mismatch");
  if (cfg.cs_split_pool < 1)
    throw std::invalid_argument("fit_trainable_cs: split pool must be >= 1");
  const Index n = labels.num_nodes();
  const Index c = labels.num_classes();

  // Per-split tensors: logits on D_out rows are ys W_s + yc Wc_hat, with
  // ys = P_s(Y_in + (M_te+M_out) y_base) and yc = P_s((M_te+M_out) E_in).
  struct SplitTensors {
    Matrix ys_out, yc_out, y_out;
    IndexList out_classes;
  };
  SplitMix64 rng(cfg.seed);
  std::vector<SplitTensors> pool;
  pool.reserve(static_cast<size_t>(cfg.cs_split_pool));
  for (Index j = 0; j < cfg.cs_split_pool; ++j) {
    SplitMix64 split_rng = rng.split(static_cast<std::uint64_t>(j));
    const SplitMask mask = sample_split(labels, cfg.alpha, split_rng);

    const Matrix y_in = masked_labels(labels, mask, /*rescale=*/false);
    Matrix error_in = Matrix::Zero(n, c);
    for (Index i = 0; i < n; ++i)
      if (mask.in_mask[i]) error_in.row(i) = y_in.row(i) - y_base.row(i);
    const Matrix corrected =
        gamma_scale(p_c.apply(error_in), error_in, mask.in_mask, gamma_mode);

    Matrix blend = y_in;
    Matrix rest_correction = corrected;
    for (Index i = 0; i < n; ++i) {
      if (!mask.in_mask[i])
        blend.row(i) = y_base.row(i);
      else
        rest_correction.row(i).setZero();
    }
    const Matrix ys = p_s.apply(blend);
    const Matrix yc = p_s.apply(rest_correction);

    SplitTensors t;
    for (Index i : labels.train_idx()) {
      if (!mask.out_mask[i]) continue;
      t.ys_out.conservativeResize(t.ys_out.rows() + 1, c);
      t.yc_out.conservativeResize(t.yc_out.rows() + 1, c);
      t.y_out.conservativeResize(t.y_out.rows() + 1, c);
      t.ys_out.row(t.ys_out.rows() - 1) = ys.row(i);
      t.yc_out.row(t.yc_out.rows() - 1) = yc.row(i);
      t.y_out.row(t.y_out.rows() - 1) = labels.y().row(i);
      t.out_classes.push_back(labels.true_class(i));
    }
    pool.push_back(std::move(t));
  }

  ModelWeights w = init ? *init
                        : ModelWeights::cs_trainable(Matrix::Identity(c, c),
                                                     Matrix::Zero(c, c));

  SplitMask full_in;
  full_in.in_mask.assign(static_cast<size_t>(n), 0);
  full_in.out_mask.assign(static_cast<size_t>(n), 0);
  full_in.alpha = cfg.alpha;
  for (Index i : labels.train_idx()) full_in.in_mask[i] = 1;
  auto infer = [&]() {
    return cs_trainable_predict(p_c, p_s, y_base, labels, full_in, w,
                                gamma_mode);
  };

  FitResult result{w, {}, 0.0, 0.0};
  double best_val = -1.0;
  Index since_best = 0;
  ModelWeights best = w;

  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    const SplitTensors& t =
        pool[static_cast<size_t>(epoch % cfg.cs_split_pool)];
    CsLossGrad lg =
        cs_loss_grad(t.ys_out, t.yc_out, t.y_out, t.out_classes, w, cfg.loss);
    if (cfg.weight_decay > 0.0) {
      lg.loss += cfg.weight_decay *
                 (w.at("W_s").squaredNorm() + w.at("Wc_hat").squaredNorm());
      lg.grad_s += 2.0 * cfg.weight_decay * w.at("W_s");
      lg.grad_c += 2.0 * cfg.weight_decay * w.at("Wc_hat");
    }
    result.train_curve.push_back(lg.loss);
    w.at("W_s") -= cfg.lr * lg.grad_s;
    w.at("Wc_hat") -= cfg.lr * lg.grad_c;

    if (cfg.early_stop_patience > 0 && !val_idx.empty()) {
      const double val_acc = accuracy(infer(), labels, val_idx);
      if (val_acc > best_val) {
        best_val = val_acc;
        best = w;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }
  if (cfg.early_stop_patience > 0 && best_val >= 0.0) w = best;

  const Matrix prediction =
      cs_trainable_predict(p_c, p_s, y_base, labels, full_in, w, gamma_mode);
  result.weights = w;
  result.val_accuracy =
      val_idx.empty() ? 0.0 : accuracy(prediction, labels, val_idx);
  result.test_accuracy =
      test_idx.empty() ? 0.0 : accuracy(prediction, labels, test_idx);
  return result;
}

namespace {

const char* kind_name(WeightsKind kind) {
  switch (kind) {
    case WeightsKind::lp_w: return "lp_w";
    case WeightsKind::feat_label: return "feat_label";
    case WeightsKind::composite: return "composite";
    case WeightsKind::cs_trainable: return "cs_trainable";
    case WeightsKind::nonlinear_toy: return "nonlinear_toy";
  }
  return "unknown";
}

WeightsKind kind_from_name(const std::string& name) {
  if (name == "lp_w") return WeightsKind::lp_w;
  if (name == "feat_label") return WeightsKind::feat_label;
  if (name == "composite") return WeightsKind::composite;
  if (name == "cs_trainable") return WeightsKind::cs_trainable;
  if (name == "nonlinear_toy") return WeightsKind::nonlinear_toy;
  throw ConfigError("checkpoint: unknown weights kind " + name);
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelWeights& w,
                     std::uint64_t seed, const std::string& config_hash) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("checkpoint: cannot open " + path + " for writing");
  f << "labeltrick checkpoint v1\n";
  f << "kind " << kind_name(w.kind) << '\n';
  f << "seed " << seed << '\n';
  f << "config_hash " << (config_hash.empty() ? "-" : config_hash) << '\n';
  f << "matrices " << w.mats.size() << '\n';
  f.precision(17);
  for (const auto& [name, mat] : w.mats) {
    f << "matrix " << name << ' ' << mat.rows() << ' ' << mat.cols() << '\n';
    for (Index r = 0; r < mat.rows(); ++r) {
      for (Index c = 0; c < mat.cols(); ++c) {
        if (c) f << ' ';
        f << mat(r, c);
      }
      f << '\n';
    }
  }
  f << "end\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("checkpoint: cannot open " + path);
  std::string line;
  auto expect_line = [&](const std::string& what) {
    if (!std::getline(f, line))
      throw ConfigError("checkpoint: truncated file at " + what);
    return line;
  };
  if (expect_line("header") != "labeltrick checkpoint v1")
    throw ConfigError("checkpoint: bad header in " + path);

  Checkpoint ck;
  std::string token;
  {
    std::istringstream ss(expect_line("kind"));
    std::string name;
    ss >> token >> name;
    if (token != "kind") throw ConfigError("checkpoint: expected kind line");
    ck.weights.kind = kind_from_name(name);
  }
  {
    std::istringstream ss(expect_line("seed"));
    ss >> token >> ck.seed;
    if (token != "seed") throw ConfigError("checkpoint: expected seed line");
  }
  {
    std::istringstream ss(expect_line("config_hash"));
    ss >> token >> ck.config_hash;
    if (token != "config_hash")
      throw ConfigError("checkpoint: expected config_hash line");
    if (ck.config_hash == "-") ck.config_hash.clear();
  }
  size_t count = 0;
  {
    std::istringstream ss(expect_line("matrices"));
    ss >> token >> count;
    if (token != "matrices")
      throw ConfigError("checkpoint: expected matrices line");
  }
  for (size_t k = 0; k < count; ++k) {
    std::istringstream ss(expect_line("matrix header"));
    std::string name;
    Index rows = 0;
    Index cols = 0;
    ss >> token >> name >> rows >> cols;
    if (token != "matrix" || rows < 0 || cols < 0)
      throw ConfigError("checkpoint: malformed matrix header");
    Matrix mat(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      std::istringstream row(expect_line("matrix row"));
      for (Index c = 0; c < cols; ++c)
        if (!(row >> mat(r, c)))
          throw ConfigError("checkpoint: malformed matrix row");
    }
    ck.weights.mats[name] = std::move(mat);
  }
  if (expect_line("end") != "end")
    throw ConfigError("checkpoint: missing end marker");
  return ck;
}

}  // namespace labeltrick
