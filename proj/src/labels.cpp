#include "labeltrick/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace labeltrick {

LabelMatrix::LabelMatrix(Matrix y, IndexList train_idx, LabelKind kind)
    : y_(std::move(y)), train_idx_(std::move(train_idx)), kind_(kind) {
  std::sort(train_idx_.begin(), train_idx_.end());
  if (std::adjacent_find(train_idx_.begin(), train_idx_.end()) !=
      train_idx_.end())
    throw std::invalid_argument("labels: duplicate training index");
  is_train_.assign(static_cast<size_t>(y_.rows()), 0);
  for (Index i : train_idx_) {
    if (i < 0 || i >= y_.rows())
      throw std::invalid_argument("labels: training index out of range");
    is_train_[i] = 1;
  }
  if (kind_ == LabelKind::one_hot) {
    for (Index i : train_idx_) {
      double sum = 0.0;
      for (Index c = 0; c < y_.cols(); ++c) {
        const double v = y_(i, c);
        if (v != 0.0 && v != 1.0)
          throw std::invalid_argument(
              "labels: one-hot training row has entry outside {0,1}");
        sum += v;
      }
      if (sum != 1.0)
        throw std::invalid_argument(
            "labels: one-hot training row must sum to 1");
    }
  }
}

bool LabelMatrix::is_train(Index node) const {
  return node >= 0 && node < y_.rows() && is_train_[node] != 0;
}

Matrix LabelMatrix::y_tr() const {
  Matrix out = Matrix::Zero(y_.rows(), y_.cols());
  for (Index i : train_idx_) out.row(i) = y_.row(i);
  return out;
}

Index LabelMatrix::true_class(Index node) const {
  Index best = 0;
  for (Index c = 1; c < y_.cols(); ++c)
    if (y_(node, c) > y_(node, best)) best = c;
  return best;
}

Index SplitMask::num_in() const {
  Index n = 0;
  for (char v : in_mask) n += (v != 0);
  return n;
}

Index SplitMask::num_out() const {
  Index n = 0;
  for (char v : out_mask) n += (v != 0);
  return n;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("splits: alpha must lie in (0,1)");
}

SplitMask empty_mask(const LabelMatrix& labels, double alpha) {
  SplitMask m;
  m.in_mask.assign(static_cast<size_t>(labels.num_nodes()), 0);
  m.out_mask.assign(static_cast<size_t>(labels.num_nodes()), 0);
  m.alpha = alpha;
  m.weight = 1.0;
  return m;
}

}  // namespace

SplitMask sample_split(const LabelMatrix& labels, double alpha,
                       SplitMix64& rng) {
  check_alpha(alpha);
  SplitMask m = empty_mask(labels, alpha);
  for (Index i : labels.train_idx()) {
    if (rng.bernoulli(alpha))
      m.in_mask[i] = 1;
    else
      m.out_mask[i] = 1;
  }
  return m;
}

SplitMask sample_split(const LabelMatrix& labels, double alpha,
                       std::uint64_t seed) {
  SplitMix64 rng(seed);
  return sample_split(labels, alpha, rng);
}

std::vector<SplitMask> one_vs_all_splits(const LabelMatrix& labels) {
  const Index m = labels.num_train();
  if (m == 0) throw std::invalid_argument("splits: empty training set");
  std::vector<SplitMask> out;
  out.reserve(static_cast<size_t>(m));
  for (Index j = 0; j < m; ++j) {
    SplitMask mask = empty_mask(labels, 0.5);
    mask.weight = 1.0 / static_cast<double>(m);
    for (Index k = 0; k < m; ++k) {
      const Index node = labels.train_idx()[k];
      if (k == j)
        mask.out_mask[node] = 1;
      else
        mask.in_mask[node] = 1;
    }
    out.push_back(std::move(mask));
  }
  return out;
}

std::vector<SplitMask> enumerate_splits(const LabelMatrix& labels,
                                        double alpha) {
  check_alpha(alpha);
  const Index m = labels.num_train();
  if (m > 20)
    throw std::invalid_argument(
        "splits: exact enumeration refused for m > 20 training nodes; "
        "use Monte Carlo sampling instead");
  const std::uint64_t count = 1ull << m;
  std::vector<SplitMask> out;
  out.reserve(count);
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    SplitMask mask = empty_mask(labels, alpha);
    Index n_in = 0;
    for (Index k = 0; k < m; ++k) {
      const Index node = labels.train_idx()[k];
      if (bits & (1ull << k)) {
        mask.in_mask[node] = 1;
        ++n_in;
      } else {
        mask.out_mask[node] = 1;
      }
    }
    mask.weight = std::pow(alpha, static_cast<double>(n_in)) *
                  std::pow(1.0 - alpha, static_cast<double>(m - n_in));
    out.push_back(std::move(mask));
  }
  return out;
}

Matrix masked_labels(const LabelMatrix& labels, const SplitMask& mask,
                     bool rescale) {
  if (static_cast<Index>(mask.in_mask.size()) != labels.num_nodes())
    throw std::invalid_argument("splits: mask length != node count");
  Matrix out = Matrix::Zero(labels.num_nodes(), labels.num_classes());
  const double scale = rescale ? 1.0 / mask.alpha : 1.0;
  for (Index i : labels.train_idx())
    if (mask.in_mask[i]) out.row(i) = scale * labels.y().row(i);
  return out;
}

void write_split_file(const std::string& path, const LabelMatrix& labels,
                      const SplitMask& mask) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("splits: cannot open " + path + " for writing");
  for (Index i : labels.train_idx())
    f << i << '\t' << (mask.in_mask[i] ? "in" : "out") << '\n';
}

SplitMask read_split_file(const std::string& path, const LabelMatrix& labels,
                          double alpha) {
  std::ifstream f(path);
  if (!f) throw ConfigError("splits: cannot open " + path);
  SplitMask mask = empty_mask(labels, alpha);
  std::string line;
  Index line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Index node;
    std::string side;
    if (!(ss >> node >> side) || (side != "in" && side != "out"))
      throw ConfigError("splits: malformed line " + std::to_string(line_no) +
                        " in " + path);
    if (!labels.is_train(node))
      throw ConfigError("splits: node " + std::to_string(node) +
                        " in split file is not a training node");
    (side == "in" ? mask.in_mask : mask.out_mask)[node] = 1;
  }
  for (Index i : labels.train_idx())
    if (!mask.in_mask[i] && !mask.out_mask[i])
      throw ConfigError("splits: training node " + std::to_string(i) +
                        " missing from split file");
  return mask;
}

}  // namespace labeltrick
