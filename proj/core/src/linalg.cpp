#include "gcica/linalg.hpp"

#include <cmath>

namespace gcica {

namespace {
constexpr double kPivotFloor = 1e-12;
}

std::optional<CholeskyPD> CholeskyPD::compute(const Matrix& m) {
  if (m.rows() != m.cols()) return std::nullopt;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  if (llt.matrixLLT().diagonal().minCoeff() <= kPivotFloor) return std::nullopt;
  return CholeskyPD(std::move(llt));
}

double CholeskyPD::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix CholeskyPD::solve(const Matrix& rhs) const { return llt_.solve(rhs); }

Matrix CholeskyPD::inverse() const {
  return llt_.solve(Matrix::Identity(llt_.rows(), llt_.rows()));
}

bool is_positive_definite(const Matrix& m) {
  return CholeskyPD::compute(m).has_value();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // ||M|| = sqrt(lambda_max(G)) with G the smaller of M M^T and M^T M.
  Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

double pearson(const Vector& x, const Vector& y) {
  const auto n = x.size();
  if (n != y.size() || n == 0) return 0.0;
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double sx = xc.norm();
  const double sy = yc.norm();
  if (sx == 0.0 || sy == 0.0) return 0.0;
  return xc.dot(yc) / (sx * sy);
}

}  // namespace gcica
