#pragma once

#include <optional>
#include <utility>

#include "labeltrick/sparse.hpp"
#include "labeltrick/types.hpp"

namespace labeltrick {

struct GraphOptions {
  bool keep_input_self_loops = false;  // keep `u u` rows from edge lists
  bool add_self_loops = false;         // add a unit loop at every node
};

/// Undirected unweighted graph with optional node features.
///
/// Edges are stored deduplicated with u < v (self-loops as u == v when
/// enabled). The symmetric normalized adjacency S is built once at
/// construction; degree-0 nodes get all-zero rows and columns.
class Graph {
 public:
  Graph(Index n, std::vector<std::pair<Index, Index>> edges,
        GraphOptions options = {});

  Index num_nodes() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<std::pair<Index, Index>>& edges() const { return edges_; }

  const SparseMatrix& normalized_adjacency() const { return s_; }
  Vector degrees() const;

  bool has_features() const { return features_.has_value(); }
  const Matrix& features() const;
  void set_features(Matrix x);

 private:
  Index n_;
  std::vector<std::pair<Index, Index>> edges_;
  std::optional<Matrix> features_;
  SparseMatrix s_;
};

/// S = D^{-1/2} A D^{-1/2}; 0/0 treated as 0 for isolated nodes.
SparseMatrix build_normalized_adjacency(const Graph& g);

/// L = I - S. Rejects non-square input.
SparseMatrix build_laplacian(const SparseMatrix& s);

}  // namespace labeltrick
