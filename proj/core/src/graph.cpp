#include "gcica/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcica/common.hpp"

namespace gcica {

namespace {
constexpr double kSymmetryTol = 1e-12;
}

Graph Graph::from_edges(int n_nodes, const std::vector<Edge>& edges) {
  if (n_nodes < 1) throw ValidationError("graph needs at least one node");
  Matrix w = Matrix::Zero(n_nodes, n_nodes);
  for (const Edge& e : edges) {
    if (e.i < 0 || e.i >= n_nodes || e.j < 0 || e.j >= n_nodes)
      throw ValidationError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                            ") out of range for " + std::to_string(n_nodes) + " nodes");
    if (e.weight < 0.0)
      throw ValidationError("negative edge weight " + std::to_string(e.weight) + " on (" +
                            std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    if (e.i == e.j) {
      if (e.weight != 0.0)
        throw ValidationError("self-loop with nonzero weight on node " + std::to_string(e.i));
      continue;
    }
    w(e.i, e.j) = e.weight;
    w(e.j, e.i) = e.weight;
  }
  return Graph(std::move(w));
}

Graph Graph::from_dense(const Matrix& weights) {
  if (weights.rows() != weights.cols() || weights.rows() < 1)
    throw ValidationError("adjacency matrix must be square and non-empty");
  const auto n = weights.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights(i, i) != 0.0)
      throw ValidationError("nonzero diagonal entry at node " + std::to_string(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(weights(i, j) - weights(j, i)) > kSymmetryTol)
        throw ValidationError("asymmetric weights at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      if (weights(i, j) < 0.0 || weights(j, i) < 0.0)
        throw ValidationError("negative weight at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    }
  }
  // Exact symmetry from here on.
  Matrix w = 0.5 * (weights + weights.transpose());
  w.diagonal().setZero();
  return Graph(std::move(w));
}

void Graph::set_node_labels(std::vector<std::string> labels) {
  if (!labels.empty() && static_cast<int>(labels.size()) != n_nodes())
    throw ValidationError("label count does not match node count");
  node_labels_ = std::move(labels);
}

Laplacian combinatorial_laplacian(const Graph& g) {
  const Matrix& w = g.weights();
  Matrix l = -w;
  l.diagonal() = w.rowwise().sum();
  return Laplacian{std::move(l), 0.0};
}

Laplacian regularized_laplacian(const Laplacian& l, double alpha) {
  if (l.alpha != 0.0) throw ValidationError("input Laplacian is already regularized");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  Matrix m = l.matrix;
  m.diagonal().array() += alpha;
  return Laplacian{std::move(m), alpha};
}

double smoothness_penalty(const Vector& a, const Laplacian& l) {
  if (a.size() != l.matrix.rows())
    throw ValidationError("vector length " + std::to_string(a.size()) +
                          " does not match Laplacian size " + std::to_string(l.matrix.rows()));
  return a.dot(l.matrix * a);
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
  const int n = g.n_nodes();
  const Matrix& w = g.weights();
  std::vector<int> component(n, -1);
  std::vector<std::vector<int>> out;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    stack.push_back(start);
    component[start] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      out[id].push_back(u);
      for (int v = 0; v < n; ++v) {
        if (component[v] < 0 && w(u, v) > 0.0) {
          component[v] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

}  // namespace gcica
