#pragma once

#include <Eigen/Dense>
#include <optional>

namespace gcica {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cholesky factorization gated on pivot size: a matrix counts as positive
// definite only if the factorization succeeds with every diagonal entry of
// the factor above 1e-12.
class CholeskyPD {
 public:
  static std::optional<CholeskyPD> compute(const Matrix& m);

  double log_det() const;
  Matrix solve(const Matrix& rhs) const;
  Matrix inverse() const;

 private:
  explicit CholeskyPD(Eigen::LLT<Matrix> llt) : llt_(std::move(llt)) {}
  Eigen::LLT<Matrix> llt_;
};

bool is_positive_definite(const Matrix& m);

// Largest singular value, from the Gram matrix of the smaller side.
double spectral_norm(const Matrix& m);

// Pearson correlation; 0 when either side has zero variance.
double pearson(const Vector& x, const Vector& y);

}  // namespace gcica
