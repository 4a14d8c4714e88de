#pragma once

#include <cstdint>

#include "gcica/model.hpp"

namespace gcica {

struct IcaResult {
  Matrix loadings;  // K x N, entrywise absolute mixing rows
  bool converged = false;
  int iterations = 0;
};

// Fixed-point ICA with the log-cosh contrast and symmetric decorrelation,
// run on the top-K principal subspace of a standardized series. Returns the
// absolute value of the mixing rows; deterministic given the seed. On
// non-convergence the best iterate is returned with converged = false.
IcaResult vanilla_ica_warm_start(const TimeSeriesMatrix& y, int k_components,
                                 std::uint64_t seed, int max_iter = 200, double tol = 1e-4);

}  // namespace gcica
