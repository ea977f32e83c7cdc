#pragma once

#include <json.hpp>

#include "labeltrick/data_io.hpp"
#include "labeltrick/training.hpp"

namespace labeltrick::cli {

/// Fully resolved run description: dataset source, operator spec, method
/// and training options. Built from a JSON config file with `--key=value`
/// command-line overrides applied on top.
struct ExperimentConfig {
  nlohmann::json raw;  // the resolved document (written to the sidecar)

  std::string run_id;
  std::string method;
  std::string output = "metrics.csv";
  std::uint64_t seed = 0;
  int threads = 1;

  // dataset
  std::string dataset_kind = "sbm";  // sbm | files
  Index sbm_n_per_block = 100;
  double sbm_p_in = 0.1;
  double sbm_p_out = 0.01;
  Index sbm_feature_dim = 4;
  double sbm_feature_noise = 3.0;
  std::string edges_path, features_path, labels_path;
  std::string split_kind = "ratio";  // ratio | files
  std::string train_split_path, val_split_path, test_split_path;
  bool add_self_loops = false;
  bool keep_input_self_loops = false;

  // operators
  double op_lambda = 0.6;
  Index op_steps = 50;
  std::string op_mode = "closed_form";  // closed_form | series
  double cs_lambda_correct = 0.6;
  double cs_lambda_smooth = 0.6;

  TrainConfig train;
  std::string init = "zeros";  // zeros | identity
  GammaMode gamma_mode = GammaMode::autoscale;

  // base predictions for C&S methods
  std::string base_kind = "miscalibrated";  // miscalibrated | table
  double base_flip_prob = 0.4;
  std::string base_table_path;
};

/// Parse a JSON document (defaults filled, unknown keys rejected).
ExperimentConfig parse_config(const nlohmann::json& j);

/// Load a config file and apply `key=value` overrides (dotted paths into
/// the JSON tree, values parsed as JSON with string fallback).
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides);

int cmd_run(const ExperimentConfig& config);
int cmd_verify(const std::string& suite, Index n, std::uint64_t seed,
               const std::string& out_dir);
int cmd_sweep_alpha(ExperimentConfig config, std::vector<double> alphas);
int cmd_ingest(const std::string& input, const std::string& out_edges,
               const std::string& out_map);

/// Full argv dispatch; returns the process exit code
/// (0 ok, 1 usage/config, 2 verification failure, 3 numerical integrity).
int dispatch(int argc, const char* const* argv);

}  // namespace labeltrick::cli
