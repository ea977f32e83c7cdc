#pragma once

#include <string>

#include "labeltrick/rng.hpp"
#include "labeltrick/types.hpp"

namespace labeltrick {

enum class LabelKind { one_hot, real };

/// n x c label matrix with an ordered training index set.
///
/// Rows outside the training set are informational; y_tr() zeroes them.
class LabelMatrix {
 public:
  LabelMatrix(Matrix y, IndexList train_idx, LabelKind kind);

  Index num_nodes() const { return y_.rows(); }
  Index num_classes() const { return y_.cols(); }
  Index num_train() const { return static_cast<Index>(train_idx_.size()); }

  const Matrix& y() const { return y_; }
  const IndexList& train_idx() const { return train_idx_; }
  LabelKind kind() const { return kind_; }
  bool is_train(Index node) const;

  /// M_tr * Y: training rows kept, all others exactly zero.
  Matrix y_tr() const;

  /// argmax class of row `node`, ties broken by lowest class index.
  Index true_class(Index node) const;

 private:
  Matrix y_;
  IndexList train_idx_;
  std::vector<char> is_train_;
  LabelKind kind_;
};

/// One realization of the Bernoulli partition of the training set.
///
/// in_mask and out_mask are disjoint and their union is exactly the
/// training mask. weight is the exact-enumeration probability of the split,
/// 1/m for one-versus-all splits, and 1 for Monte Carlo samples.
struct SplitMask {
  std::vector<char> in_mask;
  std::vector<char> out_mask;
  double alpha = 0.5;
  double weight = 1.0;

  Index num_in() const;
  Index num_out() const;
};

/// Independent Bernoulli(alpha) assignment of each training node to D_in.
SplitMask sample_split(const LabelMatrix& labels, double alpha,
                       std::uint64_t seed);
SplitMask sample_split(const LabelMatrix& labels, double alpha,
                       SplitMix64& rng);

/// The m deterministic splits with |D_out| = 1, one per training node,
/// each carrying weight 1/m.
std::vector<SplitMask> one_vs_all_splits(const LabelMatrix& labels);

/// All 2^m subsets of the training set as D_in, weighted by
/// alpha^{|D_in|} (1-alpha)^{m-|D_in|}. Refused for m > 20.
std::vector<SplitMask> enumerate_splits(const LabelMatrix& labels,
                                        double alpha);

/// Y_in (zero rows outside D_in); rescale divides by mask.alpha.
Matrix masked_labels(const LabelMatrix& labels, const SplitMask& mask,
                     bool rescale);

/// Split fixture files: one `node_id<TAB>{in|out}` line per training node.
void write_split_file(const std::string& path, const LabelMatrix& labels,
                      const SplitMask& mask);
SplitMask read_split_file(const std::string& path, const LabelMatrix& labels,
                          double alpha);

}  // namespace labeltrick
