#pragma once

#include <cstdint>
#include <vector>

#include "gcica/common.hpp"
#include "gcica/graph.hpp"
#include "gcica/model.hpp"

namespace gcica {

struct SyntheticConfig {
  int n_components = 5;
  int nodes_per_component = 10;
  int n_shared_nodes = 2;  // nodes shared between consecutive components
  int t_samples = 45;
  double noise_sigma = 0.01;
  double weight_low = 0.3;
  double weight_high = 0.4;
  // Generative precisions are L_sub + alpha I; a tiny alpha makes each
  // component dominated by its smooth mode, which keeps the standardized
  // loadings close to the raw ones.
  double alpha = 1e-5;
  std::uint64_t seed = 0;

  void validate() const;
  int n_nodes() const;
};

struct SyntheticInstance {
  Graph graph;
  Matrix true_components;  // K x N, rows zero off their support
  Matrix sources;          // T x K
  TimeSeriesMatrix observations;
  std::vector<std::vector<int>> component_supports;
};

struct Backbone {
  Graph graph;
  std::vector<std::vector<int>> supports;
};

// K random connected subgraphs with weights uniform in [weight_low,
// weight_high], patched together by sharing n_shared_nodes between
// consecutive components so the union is connected.
Backbone generate_backbone(const SyntheticConfig& cfg, Rng& rng);

// Per component k: z ~ N(0, precision_k^-1) on support k, loadings = |z|
// there and 0 elsewhere.
Matrix sample_folded_mvn_loadings(int n_nodes, const std::vector<std::vector<int>>& supports,
                                  const std::vector<Matrix>& precisions, Rng& rng);

// i.i.d. Laplace(0, 1/sqrt(2)) entries, so each source has unit variance.
Matrix sample_laplace_sources(int t_samples, int k_components, Rng& rng);

// standardize(S A + eps) with eps ~ N(0, sigma^2) i.i.d.
TimeSeriesMatrix assemble_observations(const Matrix& sources, const Matrix& loadings,
                                       double sigma, Rng& rng);

// Generative precision of each support: the support subgraph's combinatorial
// Laplacian plus alpha I.
std::vector<Matrix> support_precisions(const Graph& g,
                                       const std::vector<std::vector<int>>& supports,
                                       double alpha);

SyntheticInstance make_instance(const SyntheticConfig& cfg);

// One forward sample of the full hierarchical model on a given graph.
// Loadings are Lambda (A_tilde .* D) with A_tilde ~ |N(0, L_alpha^-1)|,
// lambda from the Gamma(1,1)/Gamma(10,10) mixture sorted ascending, and the
// squared mask columns Dirichlet(1/K). Rows are dense, so the instance's
// supports are the full node set.
struct PlateSample {
  SyntheticInstance instance;
  Vector lambda;  // ascending
  Matrix mask;    // K x N
  double sigma2;
};

PlateSample sample_plate_model(const Graph& graph, int k_components, int t_samples,
                               double pi_lambda, Rng& rng);

}  // namespace gcica
