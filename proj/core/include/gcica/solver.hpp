#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gcica/graph.hpp"
#include "gcica/model.hpp"

namespace gcica {

enum class WarmStart { kVanillaIca, kRandom, kProvided };

struct SolverConfig {
  int n_components = 12;
  double sparsity_weight = 0.0025;  // l1 weight s
  double connect_weight = 0.08;     // Laplacian smoothing weight rho
  double trust_radius = 0.4;        // per-row cap delta on the linearization step
  double alpha = kDefaultAlpha;
  int max_outer = 200;
  int inner_max = 500;
  double inner_tol = 1e-8;
  double outer_tol = 1e-6;
  double shrink = kAutoShrink;
  std::uint64_t seed = 0;
  WarmStart warm_start = WarmStart::kVanillaIca;
  Matrix provided_start;  // used when warm_start == kProvided

  void validate() const;
};

// Iterate of the outer linearization loop. Feasible states keep every row of
// x within the delta ball, gamma inside (0, 1), a_current non-negative with
// diag(A^T A) + gamma = 1, and t >= 1.
struct SolverState {
  Matrix a_current;
  Matrix x;
  Vector gamma;
  Matrix momentum_x;
  Vector momentum_gamma;
  Matrix momentum_a;
  double t = 1.0;
  std::vector<double> loss_history;
  double best_loss = 0.0;
  Matrix best_a;
  Vector best_gamma;
};

struct FitResult {
  Matrix loadings;
  Vector gamma;
  double final_loss = 0.0;
  int outer_iters = 0;
  bool converged = false;
  std::vector<double> loss_trace;  // Stein loss of the iterate after each outer step
  double shrink_used = 0.0;
  bool warm_start_converged = true;
  std::vector<std::string> warnings;
};

struct FitOptions {
  // Called after every outer iteration with the current feasible state.
  std::function<void(const SolverState&, int)> observer;
};

// Linearized objective around A:
//   g(X, gamma) = 2 tr(X S^-1 A^T) + tr(Diag(gamma) S^-1) - log |M|,
//   M = A^T A + A^T X + X^T A + Diag(gamma).
// Gradients throw NumericalError when M is not PD (trust region too large).
double linearized_objective(const Matrix& a, const Matrix& x, const Vector& gamma,
                            const Matrix& s_inv);
Matrix grad_x(const Matrix& a, const Matrix& x, const Vector& gamma, const Matrix& s_inv);
Vector grad_gamma(const Matrix& a, const Matrix& x, const Vector& gamma, const Matrix& s_inv);

// Step-size bounds: L_X = sqrt(8) ||A K^-1|| ||K^-1|| ||A|| with
// K = A^T A + Diag(gamma); L_gamma = max(diag(K2^-1))^2 with
// K2 = A^T A + A^T X + X^T A, falling back to K when K2 is singular;
// L_A = ||I + rho L||. Spectral norms.
struct LipschitzBounds {
  double l_x = 0.0;
  double l_gamma = 0.0;
  double l_a = 0.0;
  bool gamma_fallback = false;
};
LipschitzBounds lipschitz_bounds(const Matrix& a, const Matrix& x, const Vector& gamma,
                                 const Laplacian& l, double rho);

Matrix project_row_ball(const Matrix& x, double delta);

inline constexpr double kGammaMargin = 1e-6;
Vector project_box01(const Vector& gamma);

double fista_next_t(double t);

struct InnerResult {
  Matrix x;
  Vector gamma;
  double objective = 0.0;  // linearized objective at (x, gamma)
  int iterations = 0;
  int delta_halvings = 0;
  bool gamma_fallback = false;
  double t_final = 1.0;
};

// FISTA on the linearized problem: joint X / gamma steps with a shared
// momentum scalar starting at t = 1, best-so-far iterate returned. A
// non-finite objective halves delta and restarts (at most 5 times).
InnerResult inner_solve(const Matrix& a, const Vector& gamma0, const Matrix& s_inv,
                        const SolverConfig& cfg);

// A-step smooth part f(A) = 1/2 ||target - A||_F^2 + rho/2 tr(A L A^T) with
// target = a_prev + x; the l1 term is handled by its prox.
double a_step_objective(const Matrix& a, const Matrix& target, const Laplacian& l,
                        double rho, double sparsity);
Matrix a_step_grad(const Matrix& a, const Matrix& target, const Laplacian& l, double rho);

Matrix soft_threshold(const Matrix& m, double threshold);

// Rescales every column to norm sqrt(1 - gamma_i). An all-zero column gets
// the uniform direction so the constraint still holds exactly.
Matrix apply_variance_constraint(Matrix a, const Vector& gamma);

// One composed proximal step of the A update: gradient step of size 1/L_A
// on f at `from`, soft-threshold at s/L_A, clamp negatives, column-norm
// rescale. The FISTA loop over these steps runs across outer iterations
// inside fit, which carries momentum_a and t between calls.
Matrix update_a(const Matrix& a_prev, const Matrix& x, const Vector& gamma, const Laplacian& l,
                const SolverConfig& cfg);

// Full outer loop: warm start, repeat inner_solve + update_a, track the
// best Stein loss, stop when the relative best-loss change stays below
// outer_tol for 10 consecutive outer iterations.
FitResult fit(const TimeSeriesMatrix& y, const Graph& g, const SolverConfig& cfg,
              const FitOptions& options = {});

}  // namespace gcica
