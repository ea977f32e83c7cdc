#include "labeltrick/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "labeltrick/data_io.hpp"
#include "labeltrick/training.hpp"

namespace labeltrick {

namespace {

struct RandomInstance {
  Graph graph;
  LabelMatrix labels;
  PropagationOperator op;
  Matrix x;
  double alpha;
};

// Shared instance distribution: Erdos-Renyi graphs spanning edgeless,
// sparse and complete regimes, random training subset, random one-hot
// labels. Instance 0 is forced edgeless and instance 1 complete.
RandomInstance make_instance(SplitMix64 rng, Index instance_index,
                             Index feature_dim_max) {
  const Index n = 4 + static_cast<Index>(rng.next_below(13));  // [4,16]
  double edge_prob = rng.uniform(0.1, 0.9);
  if (instance_index == 0) edge_prob = 0.0;
  if (instance_index == 1) edge_prob = 1.0;
  Graph graph = make_erdos_renyi(n, edge_prob, rng);

  const Index m_max = std::min<Index>(n, 10);
  const Index m = 2 + static_cast<Index>(rng.next_below(
                          static_cast<std::uint64_t>(m_max - 1)));  // [2,m_max]
  IndexList order(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  for (Index i = n - 1; i > 0; --i) {
    const Index j =
        static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  IndexList train(order.begin(), order.begin() + m);
  std::sort(train.begin(), train.end());

  const Index c = 2 + static_cast<Index>(rng.next_below(3));  // [2,4]
  Matrix y = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i)
    y(i, static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(c)))) =
        1.0;

  const double lambda = rng.uniform(0.2, 0.8);
  PropagationOperator op =
      closed_form_operator(graph.normalized_adjacency(), lambda);

  Matrix x(n, 0);
  if (feature_dim_max > 0) {
    const Index d = 1 + static_cast<Index>(rng.next_below(
                            static_cast<std::uint64_t>(feature_dim_max)));
    x.resize(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  }

  const double alpha =
      0.1 * static_cast<double>(1 + rng.next_below(9));  // {0.1,...,0.9}
  return RandomInstance{std::move(graph),
                        LabelMatrix(std::move(y), train, LabelKind::one_hot),
                        std::move(op), std::move(x), alpha};
}

Matrix random_matrix(SplitMix64& rng, Index rows, Index cols,
                     double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

VerificationSuiteReport run_identity_suite(const std::string& name,
                                           Index n_instances,
                                           std::uint64_t seed,
                                           bool with_features) {
  const auto start = std::chrono::steady_clock::now();
  VerificationSuiteReport report;
  report.suite = name;
  report.master_seed = seed;
  SplitMix64 master(seed);

  for (Index i = 0; i < n_instances; ++i) {
    SplitMix64 rng = master.split(static_cast<std::uint64_t>(i));
    RandomInstance inst = make_instance(rng, i, with_features ? 5 : 0);
    SplitMix64 wrng = rng.split(9001);
    const Index c = inst.labels.num_classes();
    ModelWeights w =
        with_features
            ? ModelWeights::feat_label(random_matrix(wrng, inst.x.cols(), c),
                                       random_matrix(wrng, c, c))
            : ModelWeights::lp(random_matrix(wrng, c, c));

    const ObjectiveReport obj =
        theorem1_report(inst.op, inst.x, inst.labels, w, inst.alpha);
    InstanceRecord rec;
    rec.seed = static_cast<std::uint64_t>(i);
    rec.n = inst.labels.num_nodes();
    rec.m = inst.labels.num_train();
    rec.alpha = inst.alpha;
    rec.rel_gap = obj.rel_gap;
    rec.pass = obj.rel_gap <= 1e-10;
    report.max_rel_gap = std::max(report.max_rel_gap, rec.rel_gap);
    report.records.push_back(rec);
    if (!rec.pass) report.failures.push_back(rec);
  }
  report.instances = n_instances;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace

VerificationSuiteReport verify_theorem1(Index n_instances,
                                        std::uint64_t seed) {
  return run_identity_suite("thm1", n_instances, seed, false);
}

VerificationSuiteReport verify_corollary1(Index n_instances,
                                          std::uint64_t seed) {
  return run_identity_suite("cor1", n_instances, seed, true);
}

VerificationSuiteReport verify_theorem2(Index n_instances,
                                        std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  VerificationSuiteReport report;
  report.suite = "thm2";
  report.master_seed = seed;
  SplitMix64 master(seed);

  for (Index i = 0; i < n_instances; ++i) {
    SplitMix64 rng = master.split(static_cast<std::uint64_t>(i));
    RandomInstance inst = make_instance(rng, i, 5);
    SplitMix64 wrng = rng.split(9001);
    const Index c = inst.labels.num_classes();
    const ModelWeights w = ModelWeights::feat_label(
        random_matrix(wrng, inst.x.cols(), c), random_matrix(wrng, c, c));
    const ModelWeights zero = ModelWeights::feat_label(
        Matrix::Zero(inst.x.cols(), c), Matrix::Zero(c, c));

    double badness = 0.0;
    try {
      const ObjectiveReport obj =
          ce_jensen_gap(inst.op, inst.x, inst.labels, w, inst.alpha);
      badness = std::max(0.0, obj.rhs_value - obj.lhs_value);
      // the bound is an equality at zero weights
      const ObjectiveReport tight =
          ce_jensen_gap(inst.op, inst.x, inst.labels, zero, inst.alpha);
      badness = std::max(badness, tight.abs_gap);
    } catch (const NumericalIntegrityError&) {
      badness = 1.0;
    }

    InstanceRecord rec;
    rec.seed = static_cast<std::uint64_t>(i);
    rec.n = inst.labels.num_nodes();
    rec.m = inst.labels.num_train();
    rec.alpha = inst.alpha;
    rec.rel_gap = badness;
    rec.pass = badness <= 1e-9;
    report.max_rel_gap = std::max(report.max_rel_gap, rec.rel_gap);
    report.records.push_back(rec);
    if (!rec.pass) report.failures.push_back(rec);
  }
  report.instances = n_instances;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

VerificationSuiteReport verify_theorem3(const std::vector<double>& alphas,
                                        std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  VerificationSuiteReport report;
  report.suite = "thm3";
  report.master_seed = seed;
  SplitMix64 master(seed);

  // Fixed 8-node fixture with a bounded toy model.
  SplitMix64 rng = master.split(0);
  const Index n = 8;
  const Index m = 6;
  const Index c = 2;
  const Index d = 2;
  const Index hidden = 16;
  Graph graph = make_erdos_renyi(n, 0.35, rng);
  IndexList train;
  for (Index i = 0; i < m; ++i) train.push_back(i);
  Matrix y = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i)
    y(i, static_cast<Index>(rng.next_below(2))) = 1.0;
  LabelMatrix labels(y, train, LabelKind::one_hot);
  const Matrix x = random_matrix(rng, n, d);
  PropagationOperator op =
      closed_form_operator(graph.normalized_adjacency(), 0.6);
  const double w1_scale = 0.5 / std::sqrt(static_cast<double>(d + c));
  const double w2_scale = 0.5 / std::sqrt(static_cast<double>(hidden));
  const ModelWeights w = ModelWeights::nonlinear_toy(
      random_matrix(rng, d + c, hidden, w1_scale),
      random_matrix(rng, hidden, c, w2_scale));

  const double target = thm3_loo_target(op, x, labels, w);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < alphas.size(); ++a) {
    const double alpha = alphas[a];
    const double scaled = thm3_scaled_loss(
        op, x, labels, w, alpha, EvalMode::exact_enumeration, 0, 0);
    const double gap = std::abs(scaled - target);
    InstanceRecord rec;
    rec.seed = static_cast<std::uint64_t>(a);
    rec.n = n;
    rec.m = m;
    rec.alpha = alpha;
    rec.rel_gap = gap / std::max(1e-300, std::abs(target));
    rec.pass = gap <= prev_gap;
    if (a + 1 == alphas.size())
      rec.pass = rec.pass && gap <= 0.02 * std::abs(target);
    prev_gap = gap;
    report.max_rel_gap = std::max(report.max_rel_gap, rec.rel_gap);
    report.records.push_back(rec);
    if (!rec.pass) report.failures.push_back(rec);
  }

  // Near-linear regime: with tiny weights the limit target matches the
  // deterministic self-excluded loss of the collapsed linear model.
  {
    SplitMix64 lin_rng = master.split(1);
    const Matrix w1 = random_matrix(lin_rng, d + c, hidden, 1e-3);
    const Matrix w2 = random_matrix(lin_rng, hidden, c, 1e-3);
    const ModelWeights toy = ModelWeights::nonlinear_toy(w1, w2);
    const Matrix collapsed = w1 * w2;  // [A; B] stacked over feature/label rows
    const ModelWeights linear = ModelWeights::feat_label(
        collapsed.topRows(d), collapsed.bottomRows(c));

    const double toy_target = thm3_loo_target(op, x, labels, toy);
    const Matrix t = labels.y_tr() * linear.at("W_y");
    Matrix pred = op.apply(x * linear.at("W_x")) + op.apply(t);
    for (Index i = 0; i < n; ++i) pred.row(i) -= op.diag()[i] * t.row(i);
    double fit = 0.0;
    for (Index i : labels.train_idx())
      fit += (labels.y().row(i) - pred.row(i)).squaredNorm();

    InstanceRecord rec;
    rec.seed = 100;
    rec.n = n;
    rec.m = m;
    rec.alpha = 1.0;  // the limit itself
    rec.rel_gap = std::abs(toy_target - fit);
    rec.pass = rec.rel_gap <= 1e-8;
    report.records.push_back(rec);
    if (!rec.pass) report.failures.push_back(rec);
  }

  // Zero-weight model: scaled loss equals the target at every alpha.
  {
    const ModelWeights zero = ModelWeights::nonlinear_toy(
        Matrix::Zero(d + c, hidden), Matrix::Zero(hidden, c));
    const double zero_target = thm3_loo_target(op, x, labels, zero);
    double worst = 0.0;
    for (double alpha : alphas) {
      const double scaled = thm3_scaled_loss(
          op, x, labels, zero, alpha, EvalMode::exact_enumeration, 0, 0);
      worst = std::max(worst,
                       std::abs(scaled - zero_target) / std::abs(zero_target));
    }
    InstanceRecord rec;
    rec.seed = 101;
    rec.n = n;
    rec.m = m;
    rec.alpha = 0.0;
    rec.rel_gap = worst;
    rec.pass = worst <= 1e-12;
    report.records.push_back(rec);
    if (!rec.pass) report.failures.push_back(rec);
  }

  report.instances = static_cast<Index>(report.records.size());
  report.max_rel_gap = 0.0;
  for (const InstanceRecord& rec : report.records)
    report.max_rel_gap = std::max(report.max_rel_gap, rec.rel_gap);
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

VerificationSuiteReport verify_appendix_identities(Index n_instances,
                                                   std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  VerificationSuiteReport report;
  report.suite = "appendix";
  report.master_seed = seed;
  SplitMix64 master(seed);

  for (Index i = 0; i < n_instances; ++i) {
    SplitMix64 rng = master.split(static_cast<std::uint64_t>(i));
    RandomInstance inst = make_instance(rng, i, 0);
    const Index n = inst.labels.num_nodes();

    // alternate the graph-induced operator with explicit symmetric P
    Matrix p;
    if (i % 2 == 0) {
      p = inst.op.dense();
    } else {
      const Matrix r = random_matrix(rng, n, n);
      p = 0.5 * (r + r.transpose());
    }
    const double alpha = (i == 1) ? 0.5 : inst.alpha;

    Matrix m_tr = Matrix::Zero(n, n);
    for (Index t : inst.labels.train_idx()) m_tr(t, t) = 1.0;
    const Matrix p_tr = m_tr * p * m_tr;
    const Matrix c_tr = p_tr.diagonal().asDiagonal();
    const Matrix q2 = (p_tr * p_tr).diagonal().asDiagonal();
    const Matrix y_tr = inst.labels.y_tr();

    Matrix e_out = Matrix::Zero(n, n);
    Matrix e_in_p_in = Matrix::Zero(n, n);
    Matrix e_c = Matrix::Zero(n, n);
    Matrix e_d = Matrix::Zero(n, n);
    Matrix e_cross = Matrix::Zero(n, y_tr.cols());
    for (const SplitMask& mask : enumerate_splits(inst.labels, alpha)) {
      Matrix m_in = Matrix::Zero(n, n);
      for (Index t : inst.labels.train_idx())
        if (mask.in_mask[t]) m_in(t, t) = 1.0;
      const Matrix m_out = m_tr - m_in;
      e_out += mask.weight * m_out;
      e_in_p_in += mask.weight * m_in * p * m_in;
      e_c += mask.weight * m_in * p.transpose() * m_tr * p * m_in;
      e_d += mask.weight * m_in * p.transpose() * m_in * p * m_in;
      e_cross += mask.weight * m_out * p * m_in * y_tr;
    }

    const double a2 = alpha * alpha;
    const double a3 = a2 * alpha;
    double dev = (e_out - (1.0 - alpha) * m_tr).cwiseAbs().maxCoeff();
    dev = std::max(dev, (e_in_p_in - a2 * p_tr - (alpha - a2) * c_tr)
                            .cwiseAbs()
                            .maxCoeff());
    dev = std::max(
        dev, (e_c - a2 * p_tr.transpose() * p_tr - (alpha - a2) * q2)
                 .cwiseAbs()
                 .maxCoeff());
    dev = std::max(
        dev,
        (e_d - a3 * p_tr * p_tr - (a2 - a3) * q2 -
         (alpha - 3.0 * a2 + 2.0 * a3) * c_tr * c_tr -
         (a2 - a3) * (c_tr * p_tr + p_tr * c_tr))
            .cwiseAbs()
            .maxCoeff());
    dev = std::max(dev, (e_cross - (alpha - a2) * (p_tr - c_tr) * y_tr)
                            .cwiseAbs()
                            .maxCoeff());

    InstanceRecord rec;
    rec.seed = static_cast<std::uint64_t>(i);
    rec.n = n;
    rec.m = inst.labels.num_train();
    rec.alpha = alpha;
    rec.rel_gap = dev;
    rec.pass = dev <= 1e-10;
    report.max_rel_gap = std::max(report.max_rel_gap, rec.rel_gap);
    report.records.push_back(rec);
    if (!rec.pass) report.failures.push_back(rec);
  }
  report.instances = n_instances;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string format_report(const VerificationSuiteReport& report) {
  std::string out;
  char buf[256];
  out += "suite " + report.suite + "\n";
  std::snprintf(buf, sizeof(buf), "master_seed %llu\n",
                static_cast<unsigned long long>(report.master_seed));
  out += buf;
  std::snprintf(buf, sizeof(buf), "instances %lld\n",
                static_cast<long long>(report.instances));
  out += buf;
  std::snprintf(buf, sizeof(buf), "failures %zu\n", report.failures.size());
  out += buf;
  std::snprintf(buf, sizeof(buf), "max_rel_gap %.12e\n", report.max_rel_gap);
  out += buf;
  for (const InstanceRecord& rec : report.records) {
    std::snprintf(buf, sizeof(buf),
                  "record seed=%llu n=%lld m=%lld alpha=%.6f rel_gap=%.12e "
                  "pass=%d\n",
                  static_cast<unsigned long long>(rec.seed),
                  static_cast<long long>(rec.n), static_cast<long long>(rec.m),
                  rec.alpha, rec.rel_gap, rec.pass ? 1 : 0);
    out += buf;
  }
  out += "end\n";
  return out;
}

void write_report(const VerificationSuiteReport& report,
                  const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("verify: cannot open " + path + " for writing");
  f << format_report(report);
}

}  // namespace labeltrick
