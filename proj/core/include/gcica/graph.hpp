#pragma once

#include <string>
#include <vector>

#include "gcica/linalg.hpp"

namespace gcica {

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

// Weighted undirected graph: symmetric non-negative weights, zero diagonal.
// Immutable after construction; safe to share read-only across workers.
class Graph {
 public:
  // Symmetrizes: every (i, j, w) also inserts (j, i, w).
  static Graph from_edges(int n_nodes, const std::vector<Edge>& edges);
  // Rejects asymmetry beyond 1e-12, negative weights and nonzero diagonals.
  static Graph from_dense(const Matrix& weights);

  int n_nodes() const { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }

  const std::vector<std::string>& node_labels() const { return node_labels_; }
  void set_node_labels(std::vector<std::string> labels);

 private:
  explicit Graph(Matrix w) : weights_(std::move(w)) {}
  Matrix weights_;
  std::vector<std::string> node_labels_;
};

// L = D - W when alpha = 0, or the regularized L + alpha I.
struct Laplacian {
  Matrix matrix;
  double alpha = 0.0;
};

inline constexpr double kDefaultAlpha = 0.01;

Laplacian combinatorial_laplacian(const Graph& g);
Laplacian regularized_laplacian(const Laplacian& l, double alpha);

// a L_alpha a^T = 1/2 sum_{i,j~i} w_ij (a_i - a_j)^2 + alpha sum_i a_i^2.
double smoothness_penalty(const Vector& a, const Laplacian& l);

// Partition of [0, N) into connected node sets; an edge exists iff W_ij > 0.
// Components are ordered by smallest member, members ascending.
std::vector<std::vector<int>> connected_components(const Graph& g);

}  // namespace gcica
