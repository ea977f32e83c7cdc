#include "labeltrick/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace labeltrick {

namespace {

SparseMatrix build_s(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  std::vector<double> degree(static_cast<size_t>(n), 0.0);
  for (const auto& [u, v] : edges) {
    degree[u] += 1.0;
    if (u != v) degree[v] += 1.0;
  }
  std::vector<double> dinv_sqrt(static_cast<size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i)
    if (degree[i] > 0.0) dinv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    const double w = dinv_sqrt[u] * dinv_sqrt[v];
    triplets.emplace_back(u, v, w);
    if (u != v) triplets.emplace_back(v, u, w);
  }
  return SparseMatrix::from_triplets(n, n, triplets);
}

}  // namespace

Graph::Graph(Index n, std::vector<std::pair<Index, Index>> edges,
             GraphOptions options)
    : n_(n) {
  if (n < 0) throw std::invalid_argument("graph: negative node count");
  std::set<std::pair<Index, Index>> unique;
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (u == v && !options.keep_input_self_loops) continue;
    if (u > v) std::swap(u, v);
    unique.insert({u, v});
  }
  if (options.add_self_loops)
    for (Index i = 0; i < n; ++i) unique.insert({i, i});
  edges_.assign(unique.begin(), unique.end());
  s_ = build_s(n_, edges_);
}

Vector Graph::degrees() const {
  Vector d = Vector::Zero(n_);
  for (const auto& [u, v] : edges_) {
    d[u] += 1.0;
    if (u != v) d[v] += 1.0;
  }
  return d;
}

const Matrix& Graph::features() const {
  if (!features_) throw std::invalid_argument("graph: no features attached");
  return *features_;
}

void Graph::set_features(Matrix x) {
  if (x.rows() != n_)
    throw std::invalid_argument("graph: feature row count != node count");
  features_ = std::move(x);
}

SparseMatrix build_normalized_adjacency(const Graph& g) {
  return g.normalized_adjacency();
}

SparseMatrix build_laplacian(const SparseMatrix& s) {
  if (s.rows() != s.cols())
    throw std::invalid_argument("laplacian: input must be square");
  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(static_cast<size_t>(s.nnz()) + static_cast<size_t>(s.rows()));
  for (Index i = 0; i < s.rows(); ++i) triplets.emplace_back(i, i, 1.0);
  const auto& offsets = s.offsets();
  const auto& cols = s.col_indices();
  const auto& values = s.values();
  for (Index r = 0; r < s.rows(); ++r)
    for (Index k = offsets[r]; k < offsets[r + 1]; ++k)
      triplets.emplace_back(r, cols[k], -values[k]);
  return SparseMatrix::from_triplets(s.rows(), s.cols(), triplets);
}

}  // namespace labeltrick
