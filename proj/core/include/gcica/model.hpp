#pragma once

#include "gcica/linalg.hpp"

namespace gcica {

// T x N multivariate series; standardized means every column has mean 0 and
// variance 1, with divisor T throughout.
struct TimeSeriesMatrix {
  Matrix data;
  bool standardized = false;

  int t_samples() const { return static_cast<int>(data.rows()); }
  int n_nodes() const { return static_cast<int>(data.cols()); }
};

TimeSeriesMatrix standardize(const Matrix& raw);

// Sigma_hat = A^T A + Diag(gamma).
Matrix implied_correlation(const Matrix& loadings, const Vector& gamma);

// tr(Sigma_hat S^-1) - log |Sigma_hat S^-1| - N for PD inputs.
double stein_loss(const Matrix& sigma_hat, const Matrix& s);

// (1 - shrink) * Y^T Y / T + shrink * I.
Matrix shrunk_correlation(const TimeSeriesMatrix& y, double shrink);

// Sentinel meaning "pick shrink automatically": 0 while the sample
// correlation has condition number below 1e6, else the smallest value in
// {1e-3, 1e-2, 1e-1} that brings it there.
inline constexpr double kAutoShrink = -1.0;
double resolve_shrink(const Matrix& sample_correlation, double shrink);

// v_i = sum_k lambda_k^2 D_ki^2 sigma_a_diag_i + sigma2.
Vector variance_decomposition(const Vector& lambda, const Matrix& mask,
                              const Vector& sigma_a_diag, double sigma2);

}  // namespace gcica
