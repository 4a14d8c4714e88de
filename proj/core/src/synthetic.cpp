#include "gcica/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

namespace gcica {

namespace {

constexpr double kExtraEdgeProb = 0.25;  // non-tree pairs added to each subgraph

double sample_laplace(double scale, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) - 0.5;
  const double w = std::max(1.0 - 2.0 * std::abs(u), 1e-300);
  return u >= 0.0 ? -scale * std::log(w) : scale * std::log(w);
}

// Uniform random tree on m local nodes via a Prufer sequence.
std::vector<std::pair<int, int>> random_tree(int m, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  if (m < 2) return edges;
  if (m == 2) {
    edges.emplace_back(0, 1);
    return edges;
  }
  std::uniform_int_distribution<int> node(0, m - 1);
  std::vector<int> prufer(m - 2);
  for (int& v : prufer) v = node(rng);
  std::vector<int> degree(m, 1);
  for (int v : prufer) ++degree[v];
  std::priority_queue<int, std::vector<int>, std::greater<int>> leaves;
  for (int i = 0; i < m; ++i)
    if (degree[i] == 1) leaves.push(i);
  for (int v : prufer) {
    const int u = leaves.top();
    leaves.pop();
    edges.emplace_back(std::min(u, v), std::max(u, v));
    if (--degree[v] == 1) leaves.push(v);
    degree[u] = 0;
  }
  const int a = leaves.top();
  leaves.pop();
  const int b = leaves.top();
  edges.emplace_back(std::min(a, b), std::max(a, b));
  return edges;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_components < 1) throw ValidationError("n_components must be positive");
  if (nodes_per_component < 1) throw ValidationError("nodes_per_component must be positive");
  if (n_shared_nodes < 0 || n_shared_nodes >= nodes_per_component)
    throw ValidationError("n_shared_nodes must lie in [0, nodes_per_component)");
  if (t_samples < 1) throw ValidationError("t_samples must be positive");
  if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be non-negative");
  if (!(weight_low > 0.0 && weight_low < 1.0) || !(weight_high > 0.0 && weight_high < 1.0) ||
      weight_low > weight_high)
    throw ValidationError("weights must satisfy 0 < weight_low <= weight_high < 1");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
}

int SyntheticConfig::n_nodes() const {
  return n_components * nodes_per_component - (n_components - 1) * n_shared_nodes;
}

Backbone generate_backbone(const SyntheticConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.n_shared_nodes == 0 && cfg.n_components > 1)
    throw ValidationError("n_shared_nodes must be positive to keep the union graph connected");
  const int k = cfg.n_components;
  const int m = cfg.nodes_per_component;
  const int stride = m - cfg.n_shared_nodes;
  const int n = cfg.n_nodes();

  Matrix w = Matrix::Zero(n, n);
  std::uniform_real_distribution<double> weight(cfg.weight_low, cfg.weight_high);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<int>> supports(k);
  for (int c = 0; c < k; ++c) {
    const int base = c * stride;
    supports[c].resize(m);
    for (int i = 0; i < m; ++i) supports[c][i] = base + i;

    auto edges = random_tree(m, rng);
    std::vector<std::vector<bool>> in_tree(m, std::vector<bool>(m, false));
    for (auto [a, b] : edges) in_tree[a][b] = true;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (!in_tree[a][b] && unif(rng) < kExtraEdgeProb) edges.emplace_back(a, b);

    std::sort(edges.begin(), edges.end());
    for (auto [a, b] : edges) {
      const double value = weight(rng);
      const int i = base + a;
      const int j = base + b;
      // Shared node pairs can be hit by two subgraphs; keep the larger draw.
      const double kept = std::max(value, w(i, j));
      w(i, j) = kept;
      w(j, i) = kept;
    }
  }
  return Backbone{Graph::from_dense(w), std::move(supports)};
}

Matrix sample_folded_mvn_loadings(int n_nodes, const std::vector<std::vector<int>>& supports,
                                  const std::vector<Matrix>& precisions, Rng& rng) {
  if (supports.size() != precisions.size())
    throw ValidationError("supports and precisions must have the same length");
  const int k = static_cast<int>(supports.size());
  Matrix a = Matrix::Zero(k, n_nodes);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < k; ++c) {
    const auto m = static_cast<Eigen::Index>(supports[c].size());
    if (precisions[c].rows() != m || precisions[c].cols() != m)
      throw ValidationError("precision " + std::to_string(c) + " does not match its support");
    Eigen::LLT<Matrix> llt(precisions[c]);
    if (llt.info() != Eigen::Success)
      throw NumericalError("precision matrix " + std::to_string(c) +
                           " is not positive definite");
    Vector u(m);
    for (Eigen::Index i = 0; i < m; ++i) u[i] = normal(rng);
    // cov(z) = (L L^T)^-1 when z solves L^T z = u.
    const Vector z = llt.matrixU().solve(u);
    for (Eigen::Index i = 0; i < m; ++i) a(c, supports[c][i]) = std::abs(z[i]);
  }
  return a;
}

Matrix sample_laplace_sources(int t_samples, int k_components, Rng& rng) {
  if (t_samples < 1 || k_components < 1)
    throw ValidationError("sources need positive dimensions");
  const double scale = 1.0 / std::sqrt(2.0);
  Matrix s(t_samples, k_components);
  for (Eigen::Index t = 0; t < t_samples; ++t)
    for (Eigen::Index c = 0; c < k_components; ++c) s(t, c) = sample_laplace(scale, rng);
  return s;
}

TimeSeriesMatrix assemble_observations(const Matrix& sources, const Matrix& loadings,
                                       double sigma, Rng& rng) {
  if (sources.cols() != loadings.rows())
    throw ValidationError("sources are T x " + std::to_string(sources.cols()) +
                          " but loadings are " + std::to_string(loadings.rows()) + " x N");
  Matrix y = sources * loadings;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index t = 0; t < y.rows(); ++t)
      for (Eigen::Index i = 0; i < y.cols(); ++i) y(t, i) += noise(rng);
  }
  return standardize(y);
}

std::vector<Matrix> support_precisions(const Graph& g,
                                       const std::vector<std::vector<int>>& supports,
                                       double alpha) {
  const Matrix& w = g.weights();
  std::vector<Matrix> out;
  out.reserve(supports.size());
  for (const auto& support : supports) {
    const auto m = static_cast<Eigen::Index>(support.size());
    Matrix sub = Matrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b)
        if (a != b) sub(a, b) = -w(support[a], support[b]);
    for (Eigen::Index a = 0; a < m; ++a) {
      double degree = 0.0;
      for (Eigen::Index b = 0; b < m; ++b)
        if (b != a) degree -= sub(a, b);
      sub(a, a) = degree + alpha;
    }
    out.push_back(std::move(sub));
  }
  return out;
}

SyntheticInstance make_instance(const SyntheticConfig& cfg) {
  Rng rng = make_rng(cfg.seed);
  Backbone backbone = generate_backbone(cfg, rng);
  const auto precisions = support_precisions(backbone.graph, backbone.supports, cfg.alpha);
  Matrix a = sample_folded_mvn_loadings(cfg.n_nodes(), backbone.supports, precisions, rng);
  // Components are scale-free in every downstream metric; unit rows give all
  // of them the same footing and make noise_sigma a meaningful noise level.
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double norm = a.row(r).norm();
    if (norm > 0.0) a.row(r) /= norm;
  }
  Matrix s = sample_laplace_sources(cfg.t_samples, cfg.n_components, rng);
  TimeSeriesMatrix y = assemble_observations(s, a, cfg.noise_sigma, rng);
  return SyntheticInstance{std::move(backbone.graph), std::move(a), std::move(s), std::move(y),
                           std::move(backbone.supports)};
}

PlateSample sample_plate_model(const Graph& graph, int k_components, int t_samples,
                               double pi_lambda, Rng& rng) {
  if (k_components < 1) throw ValidationError("k_components must be positive");
  if (pi_lambda < 0.0 || pi_lambda > 1.0) throw ValidationError("pi_lambda must lie in [0, 1]");
  const int n = graph.n_nodes();

  Matrix sources = sample_laplace_sources(t_samples, k_components, rng);

  std::gamma_distribution<double> gamma11(1.0, 1.0);
  const double sigma2 = 1.0 / std::max(gamma11(rng), 1e-300);

  const Laplacian l_alpha = regularized_laplacian(combinatorial_laplacian(graph), kDefaultAlpha);
  Eigen::LLT<Matrix> llt(l_alpha.matrix);
  if (llt.info() != Eigen::Success)
    throw NumericalError("regularized Laplacian is not positive definite");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix smooth(k_components, n);
  for (int c = 0; c < k_components; ++c) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    smooth.row(c) = llt.matrixU().solve(u).cwiseAbs().transpose();
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::gamma_distribution<double> gamma1010(10.0, 0.1);  // shape 10, rate 10
  Vector lambda(k_components);
  for (int c = 0; c < k_components; ++c)
    lambda[c] = unif(rng) < pi_lambda ? gamma11(rng) : gamma1010(rng);
  std::sort(lambda.begin(), lambda.end());

  std::gamma_distribution<double> dirichlet_part(1.0 / k_components, 1.0);
  Matrix mask(k_components, n);
  for (int i = 0; i < n; ++i) {
    Vector parts(k_components);
    for (int c = 0; c < k_components; ++c) parts[c] = std::max(dirichlet_part(rng), 1e-300);
    parts /= parts.sum();
    mask.col(i) = parts.cwiseSqrt();
  }

  Matrix loadings = lambda.asDiagonal() * smooth.cwiseProduct(mask);
  TimeSeriesMatrix y = assemble_observations(sources, loadings, std::sqrt(sigma2), rng);

  std::vector<int> everything(n);
  for (int i = 0; i < n; ++i) everything[i] = i;
  std::vector<std::vector<int>> supports(k_components, everything);

  SyntheticInstance instance{graph, std::move(loadings), std::move(sources), std::move(y),
                             std::move(supports)};
  return PlateSample{std::move(instance), std::move(lambda), std::move(mask), sigma2};
}

}  // namespace gcica
