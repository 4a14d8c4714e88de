#pragma once

#include <random>

#include "gcica/graph.hpp"
#include "gcica/linalg.hpp"

namespace testutil {

using gcica::Graph;
using gcica::Matrix;
using gcica::Vector;

inline Graph random_graph(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unif(rng) < density) {
        const double v = weight(rng);
        w(i, j) = v;
        w(j, i) = v;
      }
  return Graph::from_dense(w);
}

inline Matrix random_matrix(int rows, int cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = unif(rng);
  return m;
}

inline Vector random_vector(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(rng);
  return v;
}

inline Matrix random_spd(int n, std::mt19937_64& rng) {
  const Matrix b = random_matrix(n, n, -1.0, 1.0, rng);
  return b * b.transpose() + 0.5 * Matrix::Identity(n, n);
}

// Direct evaluation of 1/2 sum_i sum_{j~i} w_ij (a_i - a_j)^2 + alpha |a|^2.
inline double edge_sum_penalty(const Vector& a, const Graph& g, double alpha) {
  const Matrix& w = g.weights();
  double sum = 0.0;
  for (int i = 0; i < g.n_nodes(); ++i)
    for (int j = i + 1; j < g.n_nodes(); ++j)
      sum += w(i, j) * (a[i] - a[j]) * (a[i] - a[j]);
  return sum + alpha * a.squaredNorm();
}

}  // namespace testutil
