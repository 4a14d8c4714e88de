#include "gcica/ica.hpp"

#include <cmath>
#include <limits>

#include "gcica/common.hpp"

namespace gcica {

namespace {

// W <- (W W^T)^{-1/2} W
Matrix symmetric_decorrelate(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w * w.transpose());
  const Vector inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

IcaResult vanilla_ica_warm_start(const TimeSeriesMatrix& y, int k_components, std::uint64_t seed,
                                 int max_iter, double tol) {
  if (!y.standardized) throw ValidationError("vanilla ICA expects standardized input");
  const int n = y.n_nodes();
  const double t = static_cast<double>(y.t_samples());
  if (k_components < 1 || k_components > n)
    throw ValidationError("k_components must lie in [1, N]");

  // Whiten on the top-K principal subspace: Z = Y U L^-1/2, Z^T Z / T = I.
  const Matrix corr = (y.data.transpose() * y.data) / t;
  Eigen::SelfAdjointEigenSolver<Matrix> es(corr);
  const Vector evals = es.eigenvalues().tail(k_components).cwiseMax(1e-12);
  const Matrix basis = es.eigenvectors().rightCols(k_components);
  const Matrix z = y.data * basis * evals.cwiseSqrt().cwiseInverse().asDiagonal();

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(k_components, k_components);
  for (int i = 0; i < k_components; ++i)
    for (int j = 0; j < k_components; ++j) w(i, j) = normal(rng);
  w = symmetric_decorrelate(w);

  Matrix best_w = w;
  double best_lim = std::numeric_limits<double>::infinity();
  bool converged = false;
  int it = 0;
  while (it < max_iter) {
    ++it;
    const Matrix g = (z * w.transpose()).array().tanh();
    const Eigen::ArrayXd g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    Matrix w_new = (g.transpose() * z) / t - g_prime_mean.matrix().asDiagonal() * w;
    w_new = symmetric_decorrelate(w_new);
    const Vector overlap = (w_new * w.transpose()).diagonal();
    const double lim = (overlap.cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_new;
    if (lim < best_lim) {
      best_lim = lim;
      best_w = w;
    }
    if (lim < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) w = best_w;

  // Rank-K reconstruction Y ~ (Z W^T)(W L^1/2 U^T): the mixing rows.
  const Matrix mixing = w * evals.cwiseSqrt().asDiagonal() * basis.transpose();
  return IcaResult{mixing.cwiseAbs(), converged, it};
}

}  // namespace gcica
