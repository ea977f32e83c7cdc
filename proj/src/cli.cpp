#include "labeltrick/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "labeltrick/verify.hpp"

namespace labeltrick::cli {

namespace {

using nlohmann::json;

Trick trick_from_name(const std::string& name) {
  if (name == "none") return Trick::none;
  if (name == "stochastic") return Trick::stochastic;
  if (name == "deterministic") return Trick::deterministic;
  throw ConfigError("config: unknown trick " + name);
}

TrainLoss loss_from_name(const std::string& name) {
  if (name == "mse") return TrainLoss::mse;
  if (name == "cross_entropy") return TrainLoss::cross_entropy;
  throw ConfigError("config: unknown loss " + name);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for key " + key);
  }
}

const std::vector<std::string> kMethods = {
    "lp",     "trainable_lp",   "selp", "linear",
    "linear_trick_s", "linear_trick_d", "cs",   "trainable_cs"};

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.method = get_or<std::string>(j, "method", "");
  if (std::find(kMethods.begin(), kMethods.end(), cfg.method) == kMethods.end())
    throw ConfigError(
        "config: method must be one of lp, trainable_lp, selp, linear, "
        "linear_trick_s, linear_trick_d, cs, trainable_cs (got '" +
        cfg.method + "')");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.output = get_or<std::string>(j, "output", "metrics.csv");
  cfg.run_id = get_or<std::string>(j, "run_id",
                                   cfg.method + "-" + std::to_string(cfg.seed));
  cfg.threads = get_or<int>(j, "threads", 1);
  if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    cfg.dataset_kind = get_or<std::string>(d, "kind", "sbm");
    if (cfg.dataset_kind == "sbm") {
      cfg.sbm_n_per_block = get_or<Index>(d, "n_per_block", 100);
      cfg.sbm_p_in = get_or<double>(d, "p_in", 0.1);
      cfg.sbm_p_out = get_or<double>(d, "p_out", 0.01);
      cfg.sbm_feature_dim = get_or<Index>(d, "feature_dim", 4);
      cfg.sbm_feature_noise = get_or<double>(d, "feature_noise", 3.0);
    } else if (cfg.dataset_kind == "files") {
      cfg.edges_path = get_or<std::string>(d, "edges", "");
      cfg.features_path = get_or<std::string>(d, "features", "");
      cfg.labels_path = get_or<std::string>(d, "labels", "");
      if (cfg.edges_path.empty() || cfg.labels_path.empty())
        throw ConfigError("config: files dataset needs edges and labels paths");
      if (d.contains("splits")) {
        const json& s = d.at("splits");
        cfg.split_kind = get_or<std::string>(s, "kind", "ratio");
        if (cfg.split_kind == "files") {
          cfg.train_split_path = get_or<std::string>(s, "train", "");
          cfg.val_split_path = get_or<std::string>(s, "val", "");
          cfg.test_split_path = get_or<std::string>(s, "test", "");
          if (cfg.train_split_path.empty())
            throw ConfigError("config: split files need at least train");
        } else if (cfg.split_kind != "ratio") {
          throw ConfigError("config: splits.kind must be ratio or files");
        }
      }
    } else {
      throw ConfigError("config: dataset.kind must be sbm or files");
    }
    cfg.add_self_loops = get_or<bool>(d, "add_self_loops", false);
    cfg.keep_input_self_loops = get_or<bool>(d, "keep_self_loops", false);
  }

  if (j.contains("operator")) {
    const json& o = j.at("operator");
    cfg.op_mode = get_or<std::string>(o, "mode", "closed_form");
    if (cfg.op_mode != "closed_form" && cfg.op_mode != "series")
      throw ConfigError("config: operator.mode must be closed_form or series");
    cfg.op_lambda = get_or<double>(o, "lambda", 0.6);
    cfg.op_steps = get_or<Index>(o, "steps", 50);
    cfg.cs_lambda_correct = get_or<double>(o, "lambda_correct", cfg.op_lambda);
    cfg.cs_lambda_smooth = get_or<double>(o, "lambda_smooth", cfg.op_lambda);
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    cfg.train.lr = get_or<double>(t, "lr", 0.1);
    cfg.train.epochs = get_or<Index>(t, "epochs", 200);
    cfg.train.weight_decay = get_or<double>(t, "weight_decay", 0.0);
    cfg.train.alpha = get_or<double>(t, "alpha", 0.5);
    cfg.train.trick =
        trick_from_name(get_or<std::string>(t, "trick", "deterministic"));
    cfg.train.loss = loss_from_name(get_or<std::string>(t, "loss", "mse"));
    cfg.train.early_stop_patience = get_or<Index>(t, "early_stop_patience", 0);
    cfg.train.cs_split_pool = get_or<Index>(t, "cs_split_pool", 10);
    cfg.train.backtracking = get_or<bool>(t, "backtracking", true);
    cfg.init = get_or<std::string>(t, "init", "zeros");
    if (cfg.init != "zeros" && cfg.init != "identity")
      throw ConfigError("config: train.init must be zeros or identity");
  }
  cfg.train.seed = cfg.seed;

  const std::string gamma = get_or<std::string>(j, "gamma_mode", "autoscale");
  if (gamma == "identity")
    cfg.gamma_mode = GammaMode::identity;
  else if (gamma == "autoscale")
    cfg.gamma_mode = GammaMode::autoscale;
  else
    throw ConfigError("config: gamma_mode must be identity or autoscale");

  if (j.contains("base")) {
    const json& b = j.at("base");
    cfg.base_kind = get_or<std::string>(b, "kind", "miscalibrated");
    cfg.base_flip_prob = get_or<double>(b, "flip_prob", 0.4);
    cfg.base_table_path = get_or<std::string>(b, "path", "");
    if (cfg.base_kind != "miscalibrated" && cfg.base_kind != "table")
      throw ConfigError("config: base.kind must be miscalibrated or table");
    if (cfg.base_kind == "table" && cfg.base_table_path.empty())
      throw ConfigError("config: base.kind table needs a path");
  }
  return cfg;
}

namespace {

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);  // bare strings stay strings
  }
}

void apply_override(json& j, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override: expected key=value, got '" + spec + "'");
  std::string key = spec.substr(0, eq);
  if (key.rfind("--", 0) == 0) key = key.substr(2);
  const json value = parse_override_value(spec.substr(eq + 1));

  json* node = &j;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override: empty key segment");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path + ": " + e.what());
  }
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_config(j);
}

namespace {

struct LoadedData {
  Graph graph;
  LabelMatrix labels;
  IndexList train, val, test;
  Matrix features;  // n x 0 when absent
};

IndexList read_index_file(const std::string& path, Index n) {
  std::ifstream f(path);
  if (!f) throw ConfigError("splits: cannot open " + path);
  IndexList out;
  long long v = 0;
  while (f >> v) {
    if (v < 0 || v >= n)
      throw ConfigError("splits: node id out of range in " + path);
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

LoadedData load_data(const ExperimentConfig& cfg) {
  if (cfg.dataset_kind == "sbm") {
    Dataset ds = make_sbm(cfg.sbm_n_per_block, cfg.sbm_p_in, cfg.sbm_p_out,
                          cfg.seed, cfg.sbm_feature_dim, cfg.sbm_feature_noise);
    Matrix x = ds.graph.has_features()
                   ? ds.graph.features()
                   : Matrix(ds.graph.num_nodes(), 0);
    return LoadedData{std::move(ds.graph), std::move(ds.labels),
                      std::move(ds.train_idx), std::move(ds.val_idx),
                      std::move(ds.test_idx), std::move(x)};
  }

  GraphOptions opts;
  opts.add_self_loops = cfg.add_self_loops;
  opts.keep_input_self_loops = cfg.keep_input_self_loops;
  Graph graph = load_edge_list(cfg.edges_path, opts);
  const Index n = graph.num_nodes();
  const Matrix y = load_table(cfg.labels_path, n);
  if (y.cols() < 2) throw ConfigError("config: labels table needs >= 2 classes");
  Matrix x(n, 0);
  if (!cfg.features_path.empty()) x = load_table(cfg.features_path, n);

  IndexList train, val, test;
  if (cfg.split_kind == "files") {
    train = read_index_file(cfg.train_split_path, n);
    if (!cfg.val_split_path.empty())
      val = read_index_file(cfg.val_split_path, n);
    if (!cfg.test_split_path.empty())
      test = read_index_file(cfg.test_split_path, n);
  } else {
    IndexList order(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(cfg.seed);
    for (Index i = n - 1; i > 0; --i) {
      const Index j = static_cast<Index>(
          rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    const Index n_train = (n * 6) / 10;
    const Index n_val = (n * 2) / 10;
    train.assign(order.begin(), order.begin() + n_train);
    val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    test.assign(order.begin() + n_train + n_val, order.end());
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    std::sort(test.begin(), test.end());
  }
  LabelMatrix labels(y, train, LabelKind::one_hot);
  return LoadedData{std::move(graph), std::move(labels), std::move(train),
                    std::move(val),   std::move(test),   std::move(x)};
}

PropagationOperator build_operator(const ExperimentConfig& cfg,
                                   const SparseMatrix& s, double lambda) {
  if (cfg.op_mode == "series")
    return series_operator(s, lambda, cfg.op_steps);
  return closed_form_operator(s, lambda);
}

Matrix build_base(const ExperimentConfig& cfg, const LoadedData& data) {
  if (cfg.base_kind == "table")
    return load_table(cfg.base_table_path, data.graph.num_nodes());
  return make_miscalibrated_base(data.labels, cfg.base_flip_prob,
                                 cfg.seed ^ 0xba5eba5eull);
}

double mean_row_mse(const Matrix& pred, const LabelMatrix& labels,
                    const IndexList& rows) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (Index i : rows)
    total += (labels.y().row(i) - pred.row(i)).squaredNorm();
  return total / static_cast<double>(rows.size());
}

struct RunOutcome {
  Matrix prediction;
  std::optional<FitResult> fit;
};

RunOutcome execute_method(const ExperimentConfig& cfg, const LoadedData& data) {
  const SparseMatrix& s = data.graph.normalized_adjacency();
  const Index c = data.labels.num_classes();
  TrainConfig train = cfg.train;

  if (cfg.method == "lp") {
    const PropagationOperator op = build_operator(cfg, s, cfg.op_lambda);
    return {lp_predict(op, data.labels), std::nullopt};
  }
  if (cfg.method == "selp") {
    const PropagationOperator op = build_operator(cfg, s, cfg.op_lambda);
    return {self_excluded_predict(op, data.labels,
                                  ModelWeights::lp(Matrix::Identity(c, c))),
            std::nullopt};
  }
  if (cfg.method == "trainable_lp") {
    const PropagationOperator op = build_operator(cfg, s, cfg.op_lambda);
    std::optional<ModelWeights> init;
    if (cfg.init == "identity")
      init = ModelWeights::lp(Matrix::Identity(c, c));
    FitResult fit = fit_trainable_lp(op, data.labels, train, data.val,
                                     data.test, init ? &*init : nullptr);
    Matrix pred = self_excluded_predict(op, data.labels, fit.weights);
    return {std::move(pred), std::move(fit)};
  }
  if (cfg.method == "linear" || cfg.method == "linear_trick_s" ||
      cfg.method == "linear_trick_d") {
    if (data.features.cols() == 0)
      throw ConfigError("config: method " + cfg.method + " needs features");
    if (cfg.method == "linear") train.trick = Trick::none;
    if (cfg.method == "linear_trick_s") train.trick = Trick::stochastic;
    if (cfg.method == "linear_trick_d") train.trick = Trick::deterministic;
    const PropagationOperator op = build_operator(cfg, s, cfg.op_lambda);
    FitResult fit = fit_linear_model(op, data.features, data.labels, train,
                                     data.val, data.test);
    Matrix pred =
        feat_label_predict(op, data.features, data.labels, fit.weights);
    return {std::move(pred), std::move(fit)};
  }
  if (cfg.method == "cs") {
    const PropagationOperator pc = build_operator(cfg, s, cfg.cs_lambda_correct);
    const PropagationOperator ps = build_operator(cfg, s, cfg.cs_lambda_smooth);
    const Matrix base = build_base(cfg, data);
    return {cs_vanilla_predict(pc, ps, base, data.labels, cfg.gamma_mode),
            std::nullopt};
  }
  if (cfg.method == "trainable_cs") {
    const PropagationOperator pc = build_operator(cfg, s, cfg.cs_lambda_correct);
    const PropagationOperator ps = build_operator(cfg, s, cfg.cs_lambda_smooth);
    const Matrix base = build_base(cfg, data);
    train.loss = TrainLoss::cross_entropy;
    FitResult fit = fit_trainable_cs(pc, ps, base, data.labels, train,
                                     data.val, data.test, cfg.gamma_mode);
    SplitMask full_in;
    full_in.in_mask.assign(static_cast<size_t>(data.graph.num_nodes()), 0);
    full_in.out_mask.assign(static_cast<size_t>(data.graph.num_nodes()), 0);
    full_in.alpha = train.alpha;
    for (Index i : data.labels.train_idx()) full_in.in_mask[i] = 1;
    Matrix pred = cs_trainable_predict(pc, ps, base, data.labels, full_in,
                                       fit.weights, cfg.gamma_mode);
    return {std::move(pred), std::move(fit)};
  }
  throw ConfigError("config: unhandled method " + cfg.method);
}

void write_sidecar(const ExperimentConfig& cfg) {
  std::ofstream f(cfg.output + ".config.json", std::ios::binary);
  if (!f)
    throw ConfigError("run: cannot write sidecar next to " + cfg.output);
  f << cfg.raw.dump(2) << '\n';
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg) {
  const LoadedData data = load_data(cfg);
  const RunOutcome outcome = execute_method(cfg, data);

  const double alpha_col =
      (cfg.method == "lp" || cfg.method == "selp" || cfg.method == "linear" ||
       cfg.method == "cs")
          ? 0.0
          : cfg.train.alpha;
  std::vector<MetricsRow> rows;
  for (const auto& [split, idx] :
       {std::pair<std::string, const IndexList*>{"val", &data.val},
        std::pair<std::string, const IndexList*>{"test", &data.test}}) {
    MetricsRow row;
    row.run_id = cfg.run_id;
    row.method = cfg.method;
    row.alpha = alpha_col;
    row.seed = cfg.seed;
    row.split = split;
    row.accuracy = accuracy(outcome.prediction, data.labels, *idx);
    row.loss = mean_row_mse(outcome.prediction, data.labels, *idx);
    rows.push_back(std::move(row));
  }
  write_metrics_csv(cfg.output, rows);
  write_sidecar(cfg);
  if (outcome.fit) {
    save_checkpoint(cfg.output + ".ckpt", outcome.fit->weights, cfg.seed,
                    provenance_hash_bytes(cfg.raw.dump()));
  }
  std::printf("%s val_acc=%.6f test_acc=%.6f\n", cfg.method.c_str(),
              rows[0].accuracy, rows[1].accuracy);
  return 0;
}

int cmd_verify(const std::string& suite, Index n, std::uint64_t seed,
               const std::string& out_dir) {
  std::vector<VerificationSuiteReport> reports;
  const bool all = suite == "all";
  if (all || suite == "thm1") reports.push_back(verify_theorem1(n, seed));
  if (all || suite == "cor1") reports.push_back(verify_corollary1(n, seed));
  if (all || suite == "thm2") reports.push_back(verify_theorem2(n, seed));
  if (all || suite == "thm3")
    reports.push_back(verify_theorem3({0.9, 0.99, 0.999}, seed));
  if (all || suite == "appendix")
    reports.push_back(verify_appendix_identities(
        std::min<Index>(n, n == 500 ? 200 : n), seed));
  if (reports.empty())
    throw ConfigError(
        "verify: suite must be one of thm1, cor1, thm2, thm3, appendix, all");

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  bool ok = true;
  for (const VerificationSuiteReport& rep : reports) {
    if (!out_dir.empty())
      write_report(rep, out_dir + "/verify_" + rep.suite + ".txt");
    std::printf("suite=%s instances=%lld failures=%zu max_rel_gap=%.3e "
                "wall=%.2fs\n",
                rep.suite.c_str(), static_cast<long long>(rep.instances),
                rep.failures.size(), rep.max_rel_gap, rep.wall_time_sec);
    ok = ok && rep.passed();
  }
  return ok ? 0 : 2;
}

int cmd_sweep_alpha(ExperimentConfig cfg, std::vector<double> alphas) {
  if (alphas.empty()) throw ConfigError("sweep: need at least one alpha");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0))
      throw ConfigError("sweep: alpha must lie in (0,1)");
  if (cfg.method != "trainable_lp" && cfg.method != "linear_trick_s" &&
      cfg.method != "linear_trick_d" && cfg.method != "trainable_cs")
    throw ConfigError("sweep: method " + cfg.method + " has no alpha to sweep");
  std::sort(alphas.begin(), alphas.end());

  const LoadedData data = load_data(cfg);
  std::vector<MetricsRow> rows;
  for (double alpha : alphas) {
    ExperimentConfig run = cfg;
    run.train.alpha = alpha;
    const RunOutcome outcome = execute_method(run, data);
    MetricsRow row;
    row.run_id = cfg.run_id;
    row.method = cfg.method;
    row.alpha = alpha;
    row.seed = cfg.seed;
    row.split = "val";
    row.accuracy = outcome.fit ? outcome.fit->val_accuracy
                               : accuracy(outcome.prediction, data.labels,
                                          data.val);
    row.loss = mean_row_mse(outcome.prediction, data.labels, data.val);
    rows.push_back(std::move(row));
    std::printf("alpha=%.4f val_acc=%.6f\n", alpha, row.accuracy);
  }
  write_metrics_csv(cfg.output, rows);
  write_sidecar(cfg);
  return 0;
}

int cmd_ingest(const std::string& input, const std::string& out_edges,
               const std::string& out_map) {
  ingest_remap(input, out_edges, out_map);
  std::printf("ingested %s -> %s (map %s)\n", input.c_str(), out_edges.c_str(),
              out_map.c_str());
  return 0;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"label-trick propagation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string suite = "all";
  Index verify_n = 500;
  std::uint64_t seed = 42;
  std::string out_dir = "verify_out";
  std::string alphas_arg;
  std::string ingest_in, ingest_edges, ingest_map;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "execute a configured method");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--threads", threads, "worker threads (1 = deterministic)");
  run->allow_extras();

  CLI::App* verify =
      app.add_subcommand("verify", "run a theorem verification suite");
  verify->add_option("--suite", suite, "thm1|cor1|thm2|thm3|appendix|all");
  verify->add_option("--n", verify_n, "instances per suite");
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--out", out_dir, "report directory");
  verify->add_option("--threads", threads, "worker threads (1 = deterministic)");

  CLI::App* sweep =
      app.add_subcommand("sweep-alpha", "train once per alpha value");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--alphas", alphas_arg, "comma-separated alpha list")
      ->required();
  sweep->add_option("--threads", threads, "worker threads (1 = deterministic)");
  sweep->allow_extras();

  CLI::App* ingest =
      app.add_subcommand("ingest", "remap a raw edge list to 0-based ids");
  ingest->add_option("--input", ingest_in, "raw edge list")->required();
  ingest->add_option("--edges", ingest_edges, "remapped edge list")->required();
  ingest->add_option("--map", ingest_map, "id map output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed())
      return cmd_run(load_config(config_path, run->remaining()));
    if (verify->parsed()) return cmd_verify(suite, verify_n, seed, out_dir);
    if (sweep->parsed()) {
      std::vector<double> alphas;
      std::stringstream ss(alphas_arg);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) alphas.push_back(std::stod(tok));
      return cmd_sweep_alpha(load_config(config_path, sweep->remaining()),
                             alphas);
    }
    if (ingest->parsed()) return cmd_ingest(ingest_in, ingest_edges, ingest_map);
  } catch (const NumericalIntegrityError& e) {
    std::fprintf(stderr, "numerical integrity error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace labeltrick::cli
