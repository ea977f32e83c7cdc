#include "labeltrick/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace labeltrick {

Dataset::Dataset(Graph g, LabelMatrix l, IndexList train, IndexList val,
                 IndexList test, std::string name_in, std::string hash)
    : graph(std::move(g)),
      labels(std::move(l)),
      train_idx(std::move(train)),
      val_idx(std::move(val)),
      test_idx(std::move(test)),
      name(std::move(name_in)),
      provenance_hash(std::move(hash)) {
  const Index n = graph.num_nodes();
  if (labels.num_nodes() != n)
    throw std::invalid_argument("dataset: label rows != node count");
  std::set<Index> seen;
  auto check = [&](const IndexList& idx, const char* which) {
    for (Index i : idx) {
      if (i < 0 || i >= n)
        throw std::invalid_argument(std::string("dataset: ") + which +
                                    " index out of range");
      if (!seen.insert(i).second)
        throw std::invalid_argument("dataset: index sets must be disjoint");
    }
  };
  check(train_idx, "train");
  check(val_idx, "val");
  check(test_idx, "test");
  if (labels.kind() == LabelKind::one_hot) {
    for (Index i : seen) {
      double sum = 0.0;
      for (Index c = 0; c < labels.num_classes(); ++c) {
        const double v = labels.y()(i, c);
        if (v != 0.0 && v != 1.0)
          throw std::invalid_argument(
              "dataset: split node label not one-hot");
        sum += v;
      }
      if (sum != 1.0)
        throw std::invalid_argument("dataset: split node label not one-hot");
    }
  }
}

Graph load_edge_list(const std::string& path, GraphOptions options) {
  std::ifstream f(path);
  if (!f) throw ConfigError("edge list: cannot open " + path);
  std::vector<std::pair<Index, Index>> edges;
  Index max_id = -1;
  std::string line;
  Index line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long long u = 0;
    long long v = 0;
    if (!(ss >> u >> v) || u < 0 || v < 0)
      throw ConfigError("edge list: malformed row at line " +
                        std::to_string(line_no) + " of " + path);
    double w = 1.0;
    if (ss >> w && !(w > 0.0))
      throw ConfigError("edge list: non-positive weight at line " +
                        std::to_string(line_no) + " of " + path);
    std::string extra;
    if (ss >> extra)
      throw ConfigError("edge list: trailing tokens at line " +
                        std::to_string(line_no) + " of " + path);
    edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
    max_id = std::max({max_id, static_cast<Index>(u), static_cast<Index>(v)});
  }
  return Graph(max_id + 1, std::move(edges), options);
}

void write_edge_list(const std::string& path, const Graph& g) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("edge list: cannot open " + path + " for writing");
  for (const auto& [u, v] : g.edges()) f << u << ' ' << v << '\n';
}

Matrix load_table(const std::string& path, Index expected_rows) {
  std::ifstream f(path);
  if (!f) throw ConfigError("table: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) return Matrix::Zero(expected_rows, 0);

  Index n_cols = -1;  // data columns, excluding node_id
  {
    std::stringstream header(line);
    std::string cell;
    Index count = 0;
    while (std::getline(header, cell, ',')) ++count;
    if (count < 1) throw ConfigError("table: empty header in " + path);
    n_cols = count - 1;
  }

  std::vector<std::pair<Index, std::vector<double>>> parsed;
  std::set<Index> seen;
  Index line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<Index>(cells.size()) != n_cols + 1)
      throw ConfigError("table: wrong cell count at line " +
                        std::to_string(line_no) + " of " + path);
    Index node = 0;
    try {
      size_t pos = 0;
      node = static_cast<Index>(std::stoll(cells[0], &pos));
      if (pos != cells[0].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("table: bad node_id at line " +
                        std::to_string(line_no) + " of " + path);
    }
    if (node < 0 || node >= expected_rows)
      throw ConfigError("table: node_id " + cells[0] +
                        " overflows expected row count " +
                        std::to_string(expected_rows));
    if (!seen.insert(node).second)
      throw ConfigError("table: duplicate node_id " + cells[0] + " in " +
                        path);
    std::vector<double> values(static_cast<size_t>(n_cols));
    for (Index c = 0; c < n_cols; ++c) {
      try {
        size_t pos = 0;
        values[c] = std::stod(cells[c + 1], &pos);
        if (pos != cells[c + 1].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("table: non-numeric cell at line " +
                          std::to_string(line_no) + ", column c" +
                          std::to_string(c) + " of " + path);
      }
    }
    parsed.emplace_back(node, std::move(values));
  }

  Matrix out = Matrix::Zero(expected_rows, n_cols);
  for (const auto& [node, values] : parsed)
    for (Index c = 0; c < n_cols; ++c) out(node, c) = values[c];
  return out;
}

void write_table(const std::string& path, const Matrix& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("table: cannot open " + path + " for writing");
  f << "node_id";
  for (Index c = 0; c < m.cols(); ++c) f << ",c" << c;
  f << '\n';
  char buf[64];
  for (Index r = 0; r < m.rows(); ++r) {
    f << r;
    for (Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      f << ',' << buf;
    }
    f << '\n';
  }
}

Dataset make_sbm(Index n_per_block, double p_in, double p_out,
                 std::uint64_t seed, Index feature_dim, double feature_noise) {
  if (n_per_block < 1)
    throw std::invalid_argument("sbm: need at least one node per block");
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
    throw std::invalid_argument("sbm: probabilities must lie in [0,1]");
  const Index n = 2 * n_per_block;
  SplitMix64 rng(seed);
  SplitMix64 edge_rng = rng.split(0);
  SplitMix64 feat_rng = rng.split(1);
  SplitMix64 shuffle_rng = rng.split(2);

  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const bool same_block = (u < n_per_block) == (v < n_per_block);
      if (edge_rng.bernoulli(same_block ? p_in : p_out)) edges.emplace_back(u, v);
    }
  }
  Graph g(n, std::move(edges));

  Matrix x(n, feature_dim);
  for (Index i = 0; i < n; ++i) {
    const double mean = i < n_per_block ? 1.0 : -1.0;
    for (Index c = 0; c < feature_dim; ++c)
      x(i, c) = mean + feature_noise * feat_rng.normal();
  }
  g.set_features(std::move(x));

  Matrix y = Matrix::Zero(n, 2);
  for (Index i = 0; i < n; ++i) y(i, i < n_per_block ? 0 : 1) = 1.0;

  // 6:2:2 split via Fisher-Yates
  IndexList order(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(
        shuffle_rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  const Index n_train = (n * 6) / 10;
  const Index n_val = (n * 2) / 10;
  IndexList train(order.begin(), order.begin() + n_train);
  IndexList val(order.begin() + n_train, order.begin() + n_train + n_val);
  IndexList test(order.begin() + n_train + n_val, order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());

  std::ostringstream name;
  name << "sbm(n_per_block=" << n_per_block << ",p_in=" << p_in
       << ",p_out=" << p_out << ",seed=" << seed
       << ",feature_dim=" << feature_dim << ",feature_noise=" << feature_noise
       << ")";
  LabelMatrix labels(std::move(y), train, LabelKind::one_hot);
  return Dataset(std::move(g), std::move(labels), std::move(train),
                 std::move(val), std::move(test), name.str(),
                 provenance_hash_bytes(name.str()));
}

Graph make_erdos_renyi(Index n, double p, SplitMix64& rng) {
  if (n < 0) throw std::invalid_argument("erdos-renyi: negative node count");
  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

Matrix make_miscalibrated_base(const LabelMatrix& labels, double flip_prob,
                               std::uint64_t seed) {
  if (flip_prob < 0.0 || flip_prob > 1.0)
    throw std::invalid_argument("base: flip_prob must lie in [0,1]");
  const Index n = labels.num_nodes();
  const Index c = labels.num_classes();
  if (c < 2) throw std::invalid_argument("base: need at least two classes");
  SplitMix64 rng(seed);
  Matrix out(n, c);
  for (Index i = 0; i < n; ++i) {
    Index cls = labels.true_class(i);
    if (rng.bernoulli(flip_prob)) cls = (cls + 1) % c;
    for (Index k = 0; k < c; ++k) out(i, k) = 0.4 / static_cast<double>(c);
    out(i, cls) += 0.6;
  }
  return out;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("metrics: cannot open " + path + " for writing");
  f << "run_id,method,alpha,seed,split,accuracy,loss\n";
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%llu,%s,%.6f,%.6f",
                  r.run_id.c_str(), r.method.c_str(), r.alpha,
                  static_cast<unsigned long long>(r.seed), r.split.c_str(),
                  r.accuracy, r.loss);
    f << buf << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("metrics: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) ||
      line != "run_id,method,alpha,seed,split,accuracy,loss")
    throw ConfigError("metrics: bad header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7)
      throw ConfigError("metrics: malformed row in " + path);
    MetricsRow r;
    r.run_id = cells[0];
    r.method = cells[1];
    r.alpha = std::stod(cells[2]);
    r.seed = std::stoull(cells[3]);
    r.split = cells[4];
    r.accuracy = std::stod(cells[5]);
    r.loss = std::stod(cells[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string fnv1a_hex(const char* data, size_t size) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < size; ++i) {
    hash ^= static_cast<unsigned char>(data[i]);
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

}  // namespace

std::string provenance_hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("provenance: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();
  return fnv1a_hex(bytes.data(), bytes.size());
}

std::string provenance_hash_bytes(const std::string& bytes) {
  return fnv1a_hex(bytes.data(), bytes.size());
}

void ingest_remap(const std::string& in_path, const std::string& out_edges,
                  const std::string& out_map) {
  std::ifstream f(in_path);
  if (!f) throw ConfigError("ingest: cannot open " + in_path);
  std::map<std::string, Index> ids;
  std::vector<std::string> order;
  auto remap = [&](const std::string& id) {
    const auto it = ids.find(id);
    if (it != ids.end()) return it->second;
    const Index fresh = static_cast<Index>(ids.size());
    ids.emplace(id, fresh);
    order.push_back(id);
    return fresh;
  };

  std::ofstream out(out_edges, std::ios::binary);
  if (!out)
    throw ConfigError("ingest: cannot open " + out_edges + " for writing");
  std::string line;
  Index line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string u, v, w;
    if (!(ss >> u >> v))
      throw ConfigError("ingest: malformed row at line " +
                        std::to_string(line_no) + " of " + in_path);
    if (ss >> w) {
      double weight = 0.0;
      try {
        weight = std::stod(w);
      } catch (const std::exception&) {
        throw ConfigError("ingest: bad weight at line " +
                          std::to_string(line_no) + " of " + in_path);
      }
      if (!(weight > 0.0))
        throw ConfigError("ingest: non-positive weight at line " +
                          std::to_string(line_no) + " of " + in_path);
      out << remap(u) << ' ' << remap(v) << ' ' << w << '\n';
    } else {
      out << remap(u) << ' ' << remap(v) << '\n';
    }
  }

  std::ofstream map_out(out_map, std::ios::binary);
  if (!map_out)
    throw ConfigError("ingest: cannot open " + out_map + " for writing");
  for (const std::string& id : order) map_out << id << '\t' << ids[id] << '\n';
}

}  // namespace labeltrick
