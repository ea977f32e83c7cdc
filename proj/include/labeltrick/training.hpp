#pragma once

#include "labeltrick/objectives.hpp"

namespace labeltrick {

enum class Trick { none, stochastic, deterministic };
enum class TrainLoss { mse, cross_entropy };

struct TrainConfig {
  double lr = 0.1;
  Index epochs = 200;
  double weight_decay = 0.0;
  double alpha = 0.5;
  Trick trick = Trick::deterministic;
  std::uint64_t seed = 0;
  TrainLoss loss = TrainLoss::mse;
  Index early_stop_patience = 0;  // 0 disables validation early stopping
  Index cs_split_pool = 10;       // pregenerated splits for trainable C&S
  bool backtracking = true;       // halve the step on loss increase
};

struct FitResult {
  ModelWeights weights;
  // Objective value at the start of each epoch run (before that epoch's
  // update), so entry 0 is the loss at initialization.
  std::vector<double> train_curve;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  Matrix grad_x;  // d x c (possibly 0 x c)
  Matrix grad_y;  // c x c
};

/// Deterministic-trick objective and its gradient. MSE includes the
/// ((1-alpha)/alpha) ||Gamma W_y||^2 penalty; cross-entropy is the plain
/// training-row sum.
LossGrad deterministic_loss_grad(const PropagationOperator& op,
                                 const Matrix& x, const LabelMatrix& labels,
                                 const ModelWeights& w, double alpha,
                                 TrainLoss loss);

/// Single-split stochastic objective (loss on D_out rows of the rescaled
/// split predictor) and its gradient.
LossGrad stochastic_loss_grad(const PropagationOperator& op, const Matrix& x,
                              const LabelMatrix& labels, const SplitMask& mask,
                              const ModelWeights& w, TrainLoss loss);

struct CsLossGrad {
  double loss = 0.0;
  Matrix grad_s;
  Matrix grad_c;
};

/// Trainable C&S objective on one split from the precomputed tensors
/// (rows restricted to D_out): logits = ys W_s + yc Wc_hat.
CsLossGrad cs_loss_grad(const Matrix& ys_out, const Matrix& yc_out,
                        const Matrix& y_out, const IndexList& out_classes,
                        const ModelWeights& w, TrainLoss loss);

/// Exact minimizer of the deterministic MSE objective over (W_x, W_y) via
/// the normal equations of the stacked design with the Gamma block
/// penalty; 1e-10 jitter on the diagonal. Features may be empty (d = 0).
ModelWeights solve_ridge(const PropagationOperator& op, const Matrix& x,
                         const LabelMatrix& labels, double alpha);

/// Trainable label propagation: learns W (c x c) under the stochastic or
/// deterministic trick. trick = none is rejected. `init` overrides the
/// zero default (e.g. identity to start from plain label propagation).
FitResult fit_trainable_lp(const PropagationOperator& op,
                           const LabelMatrix& labels, const TrainConfig& cfg,
                           const IndexList& val_idx, const IndexList& test_idx,
                           const ModelWeights* init = nullptr);

/// Feature+label linear model under the configured trick. Stochastic mode
/// resamples a split each epoch and evaluates loss on D_out only;
/// deterministic mode descends the closed-form objective.
FitResult fit_linear_model(const PropagationOperator& op, const Matrix& x,
                           const LabelMatrix& labels, const TrainConfig& cfg,
                           const IndexList& val_idx, const IndexList& test_idx,
                           const ModelWeights* init = nullptr);

/// Two-stage trainable C&S: pregenerates cfg.cs_split_pool splits,
/// precomputes the split tensors, then cycles over the pool optimizing
/// (W_s, Wc_hat). W_s starts at identity, Wc_hat at zero.
FitResult fit_trainable_cs(const PropagationOperator& p_c,
                           const PropagationOperator& p_s,
                           const Matrix& y_base, const LabelMatrix& labels,
                           const TrainConfig& cfg, const IndexList& val_idx,
                           const IndexList& test_idx,
                           GammaMode gamma_mode = GammaMode::autoscale,
                           const ModelWeights* init = nullptr);

struct Checkpoint {
  ModelWeights weights;
  std::uint64_t seed = 0;
  std::string config_hash;
};

void save_checkpoint(const std::string& path, const ModelWeights& w,
                     std::uint64_t seed, const std::string& config_hash);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace labeltrick
