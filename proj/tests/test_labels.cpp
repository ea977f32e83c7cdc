#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "test_helpers.hpp"

using namespace labeltrick;

namespace {

LabelMatrix toy_labels(Index n, Index m, Index c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return LabelMatrix(oracle::random_one_hot(rng, n, c), oracle::range(m),
                     LabelKind::one_hot);
}

}  // namespace

TEST_CASE("label matrix validation") {
  Matrix y(2, 2);
  y << 0.5, 0.5, 1, 0;
  CHECK_THROWS_AS(LabelMatrix(y, {0}, LabelKind::one_hot),
                  std::invalid_argument);
  CHECK_NOTHROW(LabelMatrix(y, {1}, LabelKind::one_hot));
  CHECK_NOTHROW(LabelMatrix(y, {0, 1}, LabelKind::real));
  CHECK_THROWS_AS(LabelMatrix(y, {0, 0}, LabelKind::real),
                  std::invalid_argument);
  CHECK_THROWS_AS(LabelMatrix(y, {5}, LabelKind::real), std::invalid_argument);

  const LabelMatrix l(Matrix::Identity(3, 3), {0, 2}, LabelKind::one_hot);
  CHECK(l.y_tr().row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(l.y_tr().row(0).cwiseAbs().maxCoeff() == 1.0);
  CHECK(l.is_train(2));
  CHECK(!l.is_train(1));

  // argmax ties break to the lowest class index
  Matrix flat = Matrix::Zero(1, 3);
  const LabelMatrix tied(flat, {}, LabelKind::real);
  CHECK(tied.true_class(0) == 0);
}

TEST_CASE("sample_split reproducibility and statistics") {
  const LabelMatrix labels = toy_labels(12, 10, 3, 5);
  CHECK_THROWS_AS(sample_split(labels, 0.0, std::uint64_t{1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_split(labels, 1.0, std::uint64_t{1}),
                  std::invalid_argument);

  const SplitMask a = sample_split(labels, 0.5, std::uint64_t{99});
  const SplitMask b = sample_split(labels, 0.5, std::uint64_t{99});
  CHECK(a.in_mask == b.in_mask);
  CHECK(a.out_mask == b.out_mask);
  CHECK(a.weight == 1.0);
  CHECK(a.num_in() + a.num_out() == 10);

  // per-node empirical frequency within 3 standard errors of alpha, and
  // the expected |D_in| close to alpha * m
  const Index samples = 100000;
  const double alpha = 0.5;
  std::vector<double> freq(10, 0.0);
  double mean_in = 0.0;
  SplitMix64 rng(123);
  for (Index s = 0; s < samples; ++s) {
    const SplitMask mask = sample_split(labels, alpha, rng);
    mean_in += static_cast<double>(mask.num_in());
    for (Index j = 0; j < 10; ++j)
      freq[j] += mask.in_mask[labels.train_idx()[j]] ? 1.0 : 0.0;
  }
  const double se =
      std::sqrt(alpha * (1 - alpha) / static_cast<double>(samples));
  for (Index j = 0; j < 10; ++j)
    CHECK(std::abs(freq[j] / samples - alpha) <= 3.0 * se);
  const double se_count = std::sqrt(10 * alpha * (1 - alpha) /
                                    static_cast<double>(samples));
  CHECK(std::abs(mean_in / samples - alpha * 10.0) <= 4.0 * se_count);
}

TEST_CASE("one_vs_all_splits") {
  const LabelMatrix labels = toy_labels(5, 3, 2, 6);
  const auto masks = one_vs_all_splits(labels);
  REQUIRE(masks.size() == 3);
  std::vector<char> seen(5, 0);
  for (size_t j = 0; j < 3; ++j) {
    CHECK(masks[j].num_out() == 1);
    CHECK(masks[j].num_in() == 2);
    CHECK(masks[j].weight == doctest::Approx(1.0 / 3.0));
    CHECK(masks[j].out_mask[labels.train_idx()[static_cast<Index>(j)]]);
    for (Index i = 0; i < 5; ++i)
      if (masks[j].out_mask[i]) {
        CHECK(!seen[i]);  // pairwise disjoint out-sets
        seen[i] = 1;
      }
  }
  for (Index i : labels.train_idx()) CHECK(seen[i]);  // union covers D_tr

  const LabelMatrix empty(Matrix::Identity(3, 3), {}, LabelKind::one_hot);
  CHECK_THROWS_AS(one_vs_all_splits(empty), std::invalid_argument);
}

TEST_CASE("enumerate_splits weights") {
  const LabelMatrix two = toy_labels(4, 2, 2, 7);
  const auto masks = enumerate_splits(two, 0.5);
  REQUIRE(masks.size() == 4);
  for (const SplitMask& m : masks) CHECK(m.weight == doctest::Approx(0.25));

  const LabelMatrix three = toy_labels(5, 3, 2, 8);
  double empty_weight = -1.0;
  for (const SplitMask& m : enumerate_splits(three, 0.3))
    if (m.num_in() == 0) empty_weight = m.weight;
  CHECK(empty_weight == doctest::Approx(0.343).epsilon(1e-12));

  for (Index m = 1; m <= 12; ++m) {
    for (double alpha : {0.1, 0.5, 0.9}) {
      const LabelMatrix labels = toy_labels(m + 1, m, 2, 100 + m);
      double total = 0.0;
      for (const SplitMask& mask : enumerate_splits(labels, alpha))
        total += mask.weight;
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }

  const LabelMatrix big = toy_labels(25, 21, 2, 9);
  CHECK_THROWS_WITH_AS(enumerate_splits(big, 0.5),
                       doctest::Contains("Monte Carlo"),
                       std::invalid_argument);
}

TEST_CASE("enumerate_splits matches the raw bitmask oracle") {
  const LabelMatrix labels = toy_labels(6, 4, 2, 10);
  const double alpha = 0.35;
  const auto masks = enumerate_splits(labels, alpha);
  REQUIRE(masks.size() == 16);

  size_t visited = 0;
  oracle::for_each_subset(
      labels.train_idx(), alpha,
      [&](double weight, const Matrix& m_in) {
        const SplitMask& mask = masks[visited];
        CHECK(mask.weight == doctest::Approx(weight).epsilon(1e-12));
        for (Index i = 0; i < 6; ++i) {
          CHECK((m_in(i, i) == 1.0) == (mask.in_mask[i] != 0));
          CHECK((labels.is_train(i) && m_in(i, i) == 0.0) ==
                (mask.out_mask[i] != 0));
        }
        ++visited;
      },
      6);
  CHECK(visited == 16);
}

TEST_CASE("masked_labels") {
  const LabelMatrix labels = toy_labels(5, 3, 2, 11);

  SplitMask all_in;
  all_in.in_mask.assign(5, 0);
  all_in.out_mask.assign(5, 0);
  all_in.alpha = 0.5;
  for (Index i : labels.train_idx()) all_in.in_mask[i] = 1;
  CHECK((masked_labels(labels, all_in, false) - labels.y_tr())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((masked_labels(labels, all_in, true) - 2.0 * labels.y_tr())
            .cwiseAbs()
            .maxCoeff() == 0.0);

  SplitMask none = all_in;
  none.in_mask.assign(5, 0);
  for (Index i : labels.train_idx()) none.out_mask[i] = 1;
  CHECK(masked_labels(labels, none, false).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mask expectation identities against closed forms") {
  // (a)-(d) plus the cross term, via the raw bitmask oracle on a random
  // symmetric P; absolute tolerance 1e-10
  SplitMix64 rng(77);
  for (int t = 0; t < 10; ++t) {
    const Index n = 4 + static_cast<Index>(rng.next_below(5));
    const Index m = 2 + static_cast<Index>(rng.next_below(
                            static_cast<std::uint64_t>(n - 1)));
    const double alpha = rng.uniform(0.1, 0.9);
    const Matrix r = oracle::random_matrix(rng, n, n);
    const Matrix p = 0.5 * (r + r.transpose());
    const LabelMatrix labels(oracle::random_one_hot(rng, n, 2),
                             oracle::range(m), LabelKind::one_hot);
    const Matrix y_tr = labels.y_tr();

    Matrix m_tr = Matrix::Zero(n, n);
    for (Index i : labels.train_idx()) m_tr(i, i) = 1.0;
    const Matrix p_tr = m_tr * p * m_tr;
    const Matrix c_tr = p_tr.diagonal().asDiagonal();
    const Matrix q2 = (p_tr * p_tr).diagonal().asDiagonal();

    Matrix e_out = Matrix::Zero(n, n);
    Matrix e_b = Matrix::Zero(n, n);
    Matrix e_c = Matrix::Zero(n, n);
    Matrix e_d = Matrix::Zero(n, n);
    Matrix e_cross = Matrix::Zero(n, 2);
    oracle::for_each_subset(
        labels.train_idx(), alpha,
        [&](double w, const Matrix& m_in) {
          const Matrix m_out = m_tr - m_in;
          e_out += w * m_out;
          e_b += w * m_in * p * m_in;
          e_c += w * m_in * p.transpose() * m_tr * p * m_in;
          e_d += w * m_in * p.transpose() * m_in * p * m_in;
          e_cross += w * m_out * p * m_in * y_tr;
        },
        n);

    const double a2 = alpha * alpha;
    const double a3 = a2 * alpha;
    CHECK((e_out - (1 - alpha) * m_tr).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((e_b - a2 * p_tr - (alpha - a2) * c_tr).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK((e_c - a2 * p_tr.transpose() * p_tr - (alpha - a2) * q2)
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    CHECK((e_d - a3 * p_tr * p_tr - (a2 - a3) * q2 -
           (alpha - 3 * a2 + 2 * a3) * c_tr * c_tr -
           (a2 - a3) * (c_tr * p_tr + p_tr * c_tr))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    CHECK((e_cross - (alpha - a2) * (p_tr - c_tr) * y_tr)
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
  }
}

TEST_CASE("Monte Carlo split sampling is consistent with identity (a)") {
  const LabelMatrix labels = toy_labels(8, 6, 2, 12);
  const double alpha = 0.4;
  const Index samples = 100000;
  SplitMix64 rng(55);
  Vector out_freq = Vector::Zero(8);
  for (Index s = 0; s < samples; ++s) {
    const SplitMask mask = sample_split(labels, alpha, rng);
    for (Index i = 0; i < 8; ++i)
      if (mask.out_mask[i]) out_freq[i] += 1.0;
  }
  out_freq /= static_cast<double>(samples);
  const double se =
      std::sqrt(alpha * (1 - alpha) / static_cast<double>(samples));
  for (Index i : labels.train_idx())
    CHECK(std::abs(out_freq[i] - (1 - alpha)) <= 4.0 * se);
}

TEST_CASE("split files round trip") {
  const LabelMatrix labels = toy_labels(6, 4, 2, 13);
  const SplitMask mask = sample_split(labels, 0.5, std::uint64_t{3});
  const std::string path =
      (std::filesystem::temp_directory_path() / "lt_split_test.tsv").string();
  write_split_file(path, labels, mask);
  const SplitMask back = read_split_file(path, labels, 0.5);
  CHECK(back.in_mask == mask.in_mask);
  CHECK(back.out_mask == mask.out_mask);
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_split_file("/nonexistent/split.tsv", labels, 0.5),
                  ConfigError);
}
