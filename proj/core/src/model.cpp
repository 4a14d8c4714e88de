#include "gcica/model.hpp"

#include <cmath>
#include <string>

#include "gcica/common.hpp"

namespace gcica {

TimeSeriesMatrix standardize(const Matrix& raw) {
  const auto t = raw.rows();
  const auto n = raw.cols();
  if (t < 2) throw ValidationError("standardize needs at least 2 samples");
  Matrix out(t, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mean = raw.col(j).mean();
    const Vector centered = raw.col(j).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(t);
    if (var < 1e-30)
      throw ValidationError("column " + std::to_string(j) + " is constant; cannot standardize");
    out.col(j) = centered / std::sqrt(var);
  }
  return TimeSeriesMatrix{std::move(out), true};
}

Matrix implied_correlation(const Matrix& loadings, const Vector& gamma) {
  if (loadings.cols() != gamma.size())
    throw ValidationError("loadings have " + std::to_string(loadings.cols()) +
                          " columns but gamma has " + std::to_string(gamma.size()) + " entries");
  Matrix sigma = loadings.transpose() * loadings;
  sigma.diagonal() += gamma;
  return sigma;
}

double stein_loss(const Matrix& sigma_hat, const Matrix& s) {
  if (sigma_hat.rows() != s.rows() || sigma_hat.cols() != s.cols())
    throw ValidationError("stein_loss requires matrices of equal shape");
  const auto n = static_cast<double>(s.rows());
  auto chol_s = CholeskyPD::compute(s);
  if (!chol_s) throw NumericalError("reference matrix is not positive definite");
  auto chol_hat = CholeskyPD::compute(sigma_hat);
  if (!chol_hat) throw NumericalError("model matrix is not positive definite");
  const double trace_term = chol_s->solve(sigma_hat).trace();
  const double log_det_ratio = chol_hat->log_det() - chol_s->log_det();
  return trace_term - log_det_ratio - n;
}

Matrix shrunk_correlation(const TimeSeriesMatrix& y, double shrink) {
  if (!y.standardized) throw ValidationError("shrunk_correlation expects standardized input");
  if (shrink < 0.0 || shrink > 1.0) throw ValidationError("shrink must lie in [0, 1]");
  const double t = static_cast<double>(y.t_samples());
  Matrix c = (y.data.transpose() * y.data) / t;
  c = (1.0 - shrink) * c;
  c.diagonal().array() += shrink;
  return c;
}

double resolve_shrink(const Matrix& sample_correlation, double shrink) {
  if (shrink != kAutoShrink) return shrink;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sample_correlation, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double kappa_limit = 1e6;
  if (lo > 0.0 && hi / lo < kappa_limit) return 0.0;
  for (double candidate : {1e-3, 1e-2, 1e-1}) {
    const double lo_c = (1.0 - candidate) * lo + candidate;
    const double hi_c = (1.0 - candidate) * hi + candidate;
    if (lo_c > 0.0 && hi_c / lo_c < kappa_limit) return candidate;
  }
  return 1e-1;
}

Vector variance_decomposition(const Vector& lambda, const Matrix& mask,
                              const Vector& sigma_a_diag, double sigma2) {
  const auto k = lambda.size();
  const auto n = sigma_a_diag.size();
  if (mask.rows() != k || mask.cols() != n)
    throw ValidationError("mask shape does not match lambda and node counts");
  Vector v = Vector::Constant(n, sigma2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      v[i] += lambda[c] * lambda[c] * mask(c, i) * mask(c, i) * sigma_a_diag[i];
  return v;
}

}  // namespace gcica
