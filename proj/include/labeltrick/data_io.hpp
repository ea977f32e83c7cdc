#pragma once

#include "labeltrick/graph.hpp"
#include "labeltrick/labels.hpp"
#include "labeltrick/rng.hpp"

namespace labeltrick {

/// A graph with labels and disjoint train/val/test index sets.
struct Dataset {
  Graph graph;
  LabelMatrix labels;
  IndexList train_idx;
  IndexList val_idx;
  IndexList test_idx;
  std::string name;
  std::string provenance_hash;

  Dataset(Graph g, LabelMatrix l, IndexList train, IndexList val,
          IndexList test, std::string name_in, std::string hash);
};

/// Parse `u v [w]` whitespace rows (0-based ids, positive weights accepted
/// but edges are unit weight); duplicates collapse, row order irrelevant.
Graph load_edge_list(const std::string& path, GraphOptions options = {});
void write_edge_list(const std::string& path, const Graph& g);

/// CSV with header `node_id,c0,...`; rows ordered by node id on return,
/// missing nodes zero-filled.
Matrix load_table(const std::string& path, Index expected_rows);
void write_table(const std::string& path, const Matrix& m);

/// Two-block SBM: block id is the label, 6:2:2 split by seeded shuffle.
/// Gaussian node features (block mean +-1 per channel, noise sigma) make
/// the feature pathway available to linear models.
Dataset make_sbm(Index n_per_block, double p_in, double p_out,
                 std::uint64_t seed, Index feature_dim = 4,
                 double feature_noise = 3.0);

Graph make_erdos_renyi(Index n, double p, SplitMix64& rng);

/// Soft base predictions degraded on purpose: each row starts as a blend
/// of the one-hot truth and the uniform distribution, and with probability
/// flip_prob the mass is moved onto a wrong class.
Matrix make_miscalibrated_base(const LabelMatrix& labels, double flip_prob,
                               std::uint64_t seed);

struct MetricsRow {
  std::string run_id;
  std::string method;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string split;
  double accuracy = 0.0;
  double loss = 0.0;
};

/// Header `run_id,method,alpha,seed,split,accuracy,loss`; UTF-8, LF line
/// endings, 6-decimal fixed notation.
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

/// FNV-1a 64-bit of the file bytes, as 16 hex digits.
std::string provenance_hash_file(const std::string& path);
std::string provenance_hash_bytes(const std::string& bytes);

/// Rewrite an edge list with arbitrary string ids as 0-based contiguous
/// ids; the id map (`original<TAB>new`) is persisted beside it.
void ingest_remap(const std::string& in_path, const std::string& out_edges,
                  const std::string& out_map);

}  // namespace labeltrick
