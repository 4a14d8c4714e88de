#include "gcica/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gcica/common.hpp"
#include "gcica/ica.hpp"

namespace gcica {

namespace {

constexpr double kWarmGammaFloor = 0.15;

struct LinearizedEval {
  double objective = 0.0;
  Matrix grad_x;
  Vector grad_gamma;
};

void check_linearized_shapes(const Matrix& a, const Matrix& x, const Vector& gamma,
                             const Matrix& s_inv) {
  if (x.rows() != a.rows() || x.cols() != a.cols())
    throw ValidationError("X must have the same shape as A");
  if (gamma.size() != a.cols()) throw ValidationError("gamma length must match node count");
  if (s_inv.rows() != a.cols() || s_inv.cols() != a.cols())
    throw ValidationError("S^-1 must be N x N");
}

// Shared evaluation of the linearized objective and, optionally, both
// gradients from one factorization of M. Empty when M is not PD.
std::optional<LinearizedEval> eval_linearized(const Matrix& a, const Matrix& ata, const Matrix& x,
                                              const Vector& gamma, const Matrix& s_inv,
                                              bool want_grads) {
  const Matrix atx = a.transpose() * x;
  Matrix m = ata + atx + atx.transpose();
  m.diagonal() += gamma;
  auto chol = CholeskyPD::compute(m);
  if (!chol) return std::nullopt;
  LinearizedEval ev;
  ev.objective = 2.0 * (x * s_inv).cwiseProduct(a).sum() + gamma.dot(s_inv.diagonal()) -
                 chol->log_det();
  if (want_grads) {
    const Matrix diff = s_inv - chol->inverse();
    ev.grad_x = 2.0 * a * diff;
    ev.grad_gamma = diff.diagonal();
  }
  return ev;
}

struct StepBounds {
  double l_x = 0.0;
  double l_gamma = 0.0;
  bool gamma_fallback = false;
};

StepBounds step_bounds_xg(const Matrix& a, const Matrix& ata, const Matrix& x,
                          const Vector& gamma) {
  Matrix k = ata;
  k.diagonal() += gamma;
  auto chol_k = CholeskyPD::compute(k);
  if (!chol_k) throw NumericalError("K = A^T A + Diag(gamma) is not positive definite");
  const Matrix k_inv = chol_k->inverse();

  StepBounds b;
  b.l_x = std::sqrt(8.0) * spectral_norm(a * k_inv) * spectral_norm(k_inv) * spectral_norm(a);
  const Matrix atx = a.transpose() * x;
  const Matrix k2 = ata + atx + atx.transpose();
  if (auto chol_k2 = CholeskyPD::compute(k2)) {
    const double top = chol_k2->inverse().diagonal().maxCoeff();
    b.l_gamma = top * top;
  } else {
    const double top = k_inv.diagonal().maxCoeff();
    b.l_gamma = top * top;
    b.gamma_fallback = true;
  }
  return b;
}

}  // namespace

void SolverConfig::validate() const {
  if (n_components < 1) throw ValidationError("n_components must be positive");
  if (sparsity_weight < 0.0) throw ValidationError("sparsity_weight must be non-negative");
  if (connect_weight < 0.0) throw ValidationError("connect_weight must be non-negative");
  if (!(trust_radius > 0.0)) throw ValidationError("trust_radius must be positive");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (max_outer < 1 || inner_max < 1) throw ValidationError("iteration caps must be positive");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0))
    throw ValidationError("tolerances must be positive");
  if (shrink != kAutoShrink && (shrink < 0.0 || shrink > 1.0))
    throw ValidationError("shrink must lie in [0, 1] or be automatic");
  if (warm_start == WarmStart::kProvided && provided_start.size() == 0)
    throw ValidationError("provided warm start requires a loadings matrix");
}

double linearized_objective(const Matrix& a, const Matrix& x, const Vector& gamma,
                            const Matrix& s_inv) {
  check_linearized_shapes(a, x, gamma, s_inv);
  auto ev = eval_linearized(a, a.transpose() * a, x, gamma, s_inv, false);
  if (!ev) throw NumericalError("linearized model matrix M is not positive definite");
  return ev->objective;
}

Matrix grad_x(const Matrix& a, const Matrix& x, const Vector& gamma, const Matrix& s_inv) {
  check_linearized_shapes(a, x, gamma, s_inv);
  auto ev = eval_linearized(a, a.transpose() * a, x, gamma, s_inv, true);
  if (!ev)
    throw NumericalError("M is not positive definite; the trust region is too large");
  return ev->grad_x;
}

Vector grad_gamma(const Matrix& a, const Matrix& x, const Vector& gamma, const Matrix& s_inv) {
  check_linearized_shapes(a, x, gamma, s_inv);
  auto ev = eval_linearized(a, a.transpose() * a, x, gamma, s_inv, true);
  if (!ev)
    throw NumericalError("M is not positive definite; the trust region is too large");
  return ev->grad_gamma;
}

LipschitzBounds lipschitz_bounds(const Matrix& a, const Matrix& x, const Vector& gamma,
                                 const Laplacian& l, double rho) {
  if (rho < 0.0) throw ValidationError("rho must be non-negative");
  const Matrix ata = a.transpose() * a;
  const StepBounds xg = step_bounds_xg(a, ata, x, gamma);
  LipschitzBounds b;
  b.l_x = xg.l_x;
  b.l_gamma = xg.l_gamma;
  b.gamma_fallback = xg.gamma_fallback;
  const Matrix penalty = Matrix::Identity(l.matrix.rows(), l.matrix.cols()) + rho * l.matrix;
  b.l_a = spectral_norm(penalty);
  return b;
}

Matrix project_row_ball(const Matrix& x, double delta) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  Matrix out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > delta) out.row(r) *= delta / norm;
  }
  return out;
}

Vector project_box01(const Vector& gamma) {
  return gamma.cwiseMax(kGammaMargin).cwiseMin(1.0 - kGammaMargin);
}

double fista_next_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

InnerResult inner_solve(const Matrix& a, const Vector& gamma0, const Matrix& s_inv,
                        const SolverConfig& cfg) {
  check_linearized_shapes(a, Matrix::Zero(a.rows(), a.cols()), gamma0, s_inv);
  const Matrix ata = a.transpose() * a;
  double delta = cfg.trust_radius;

  for (int restart = 0;; ++restart) {
    Matrix x = Matrix::Zero(a.rows(), a.cols());
    Vector gamma = project_box01(gamma0);
    const StepBounds bounds = step_bounds_xg(a, ata, x, gamma);

    auto start = eval_linearized(a, ata, x, gamma, s_inv, false);
    if (!start) throw NumericalError("M is not positive definite at the trust-region center");

    Matrix prev_x = x;
    Vector prev_gamma = gamma;
    Matrix mom_x = x;
    Vector mom_gamma = gamma;
    double t = 1.0;

    InnerResult out;
    out.x = x;
    out.gamma = gamma;
    out.objective = start->objective;
    out.delta_halvings = restart;
    out.gamma_fallback = bounds.gamma_fallback;

    double last_obj = start->objective;
    bool blew_up = false;
    int it = 0;
    while (it < cfg.inner_max) {
      ++it;
      auto ev = eval_linearized(a, ata, mom_x, mom_gamma, s_inv, true);
      if (!ev || !std::isfinite(ev->objective)) {
        // Extrapolation left the PD cone; restart momentum from the last
        // iterate, which is always inside it.
        t = 1.0;
        mom_x = prev_x;
        mom_gamma = prev_gamma;
        ev = eval_linearized(a, ata, mom_x, mom_gamma, s_inv, true);
        if (!ev || !std::isfinite(ev->objective)) {
          blew_up = true;
          break;
        }
      }

      // Nominal step 1/L, backing off only while M leaves the PD cone
      // (the objective is +inf there).
      Matrix x_new;
      Vector gamma_new;
      double obj = std::numeric_limits<double>::infinity();
      double scale = 1.0;
      bool in_domain = false;
      for (int backtrack = 0; backtrack < 40; ++backtrack) {
        x_new = project_row_ball(mom_x - scale * ev->grad_x / bounds.l_x, delta);
        gamma_new = project_box01(mom_gamma - scale * ev->grad_gamma / bounds.l_gamma);
        auto at_iterate = eval_linearized(a, ata, x_new, gamma_new, s_inv, false);
        if (at_iterate && std::isfinite(at_iterate->objective)) {
          obj = at_iterate->objective;
          in_domain = true;
          break;
        }
        scale *= 0.5;
      }
      if (!in_domain) {
        blew_up = true;
        break;
      }
      if (obj < out.objective) {
        out.objective = obj;
        out.x = x_new;
        out.gamma = gamma_new;
      }

      const double t_next = fista_next_t(t);
      const double theta = (t - 1.0) / t_next;
      if (obj > last_obj) {
        // Objective went up: drop the momentum instead of extrapolating.
        t = 1.0;
        mom_x = x_new;
        mom_gamma = gamma_new;
      } else {
        t = t_next;
        mom_x = x_new + theta * (x_new - prev_x);
        // The gamma momentum point stays inside the box so M keeps a
        // positive diagonal at the evaluation point.
        mom_gamma = project_box01(gamma_new + theta * (gamma_new - prev_gamma));
      }
      prev_x = x_new;
      prev_gamma = gamma_new;

      const double rel = std::abs(obj - last_obj) / std::max(1.0, std::abs(last_obj));
      last_obj = obj;
      if (rel < cfg.inner_tol) break;
    }

    if (!blew_up) {
      out.iterations = it;
      out.t_final = t;
      return out;
    }
    if (restart >= 5)
      throw NumericalError("inner solve diverged after 5 trust-region halvings");
    delta *= 0.5;
  }
}

double a_step_objective(const Matrix& a, const Matrix& target, const Laplacian& l, double rho,
                        double sparsity) {
  const double quad = 0.5 * (target - a).squaredNorm();
  const double smooth = 0.5 * rho * (a * l.matrix).cwiseProduct(a).sum();
  return quad + smooth + sparsity * a.cwiseAbs().sum();
}

Matrix a_step_grad(const Matrix& a, const Matrix& target, const Laplacian& l, double rho) {
  return (a - target) + rho * (a * l.matrix);
}

Matrix soft_threshold(const Matrix& m, double threshold) {
  return m.unaryExpr([threshold](double v) {
    if (v > threshold) return v - threshold;
    if (v < -threshold) return v + threshold;
    return 0.0;
  });
}

Matrix apply_variance_constraint(Matrix a, const Vector& gamma) {
  if (a.cols() != gamma.size()) throw ValidationError("gamma length must match node count");
  const double k = static_cast<double>(a.rows());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    const double budget = 1.0 - gamma[i];
    if (budget <= 0.0)
      throw ValidationError("gamma_" + std::to_string(i) + " leaves no variance for loadings");
    const double norm2 = a.col(i).squaredNorm();
    if (norm2 == 0.0)
      a.col(i).setConstant(std::sqrt(budget / k));
    else
      a.col(i) *= std::sqrt(budget / norm2);
  }
  return a;
}

namespace {

// Proximal composition of one A step: descend f from `from` toward
// `target = A^(k) + X`, then apply the l1 prox, the non-negativity clamp
// and the variance rescale, in that order.
Matrix composed_a_step(const Matrix& from, const Matrix& target, const Vector& gamma,
                       const Laplacian& l, const SolverConfig& cfg, double l_a) {
  Matrix candidate = from - a_step_grad(from, target, l, cfg.connect_weight) / l_a;
  candidate = soft_threshold(candidate, cfg.sparsity_weight / l_a).cwiseMax(0.0);
  return apply_variance_constraint(std::move(candidate), gamma);
}

double a_step_bound(const Laplacian& l, double rho) {
  const Matrix penalty = Matrix::Identity(l.matrix.rows(), l.matrix.cols()) + rho * l.matrix;
  return spectral_norm(penalty);
}

}  // namespace

Matrix update_a(const Matrix& a_prev, const Matrix& x, const Vector& gamma, const Laplacian& l,
                const SolverConfig& cfg) {
  if (x.rows() != a_prev.rows() || x.cols() != a_prev.cols())
    throw ValidationError("X must have the same shape as A");
  return composed_a_step(a_prev, a_prev + x, gamma, l, cfg, a_step_bound(l, cfg.connect_weight));
}

FitResult fit(const TimeSeriesMatrix& y, const Graph& g, const SolverConfig& cfg,
              const FitOptions& options) {
  cfg.validate();
  if (!y.standardized) throw ValidationError("fit expects standardized input");
  if (g.n_nodes() != y.n_nodes())
    throw ValidationError("graph has " + std::to_string(g.n_nodes()) + " nodes but series has " +
                          std::to_string(y.n_nodes()) + " columns");
  const int n = y.n_nodes();
  const int k = cfg.n_components;

  FitResult result;
  if (k > std::min(y.t_samples(), n))
    result.warnings.push_back("n_components exceeds min(T, N); recovery may be unreliable");

  const Matrix sample_corr = shrunk_correlation(y, 0.0);
  const double shrink = resolve_shrink(sample_corr, cfg.shrink);
  const Matrix s = shrunk_correlation(y, shrink);
  auto chol_s = CholeskyPD::compute(s);
  if (!chol_s) {
    if (shrink == 0.0)
      throw ValidationError(
          "sample correlation is singular; set shrink > 0 (or leave it automatic)");
    throw NumericalError("shrunk correlation is not positive definite");
  }
  result.shrink_used = shrink;
  const Matrix s_inv = chol_s->inverse();

  const Laplacian l_alpha = regularized_laplacian(combinatorial_laplacian(g), cfg.alpha);

  Matrix a0;
  switch (cfg.warm_start) {
    case WarmStart::kVanillaIca: {
      IcaResult ica = vanilla_ica_warm_start(y, k, cfg.seed);
      a0 = std::move(ica.loadings);
      result.warm_start_converged = ica.converged;
      if (!ica.converged)
        result.warnings.push_back("vanilla ICA warm start stopped before reaching tolerance");
      break;
    }
    case WarmStart::kRandom: {
      Rng rng = make_rng(cfg.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      a0.resize(k, n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(k));
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < n; ++c) a0(r, c) = std::abs(normal(rng)) * scale;
      break;
    }
    case WarmStart::kProvided: {
      if (cfg.provided_start.rows() != k || cfg.provided_start.cols() != n)
        throw ValidationError("provided warm start must be K x N");
      if (cfg.provided_start.minCoeff() < 0.0)
        throw ValidationError("provided warm start must be non-negative");
      a0 = cfg.provided_start;
      break;
    }
  }

  // Start gamma away from its lower box edge: the warm start usually claims
  // almost all node variance, and growing loadings back from a modest budget
  // conditions K far better than shedding mass through tiny gamma steps.
  SolverState state;
  state.gamma.resize(n);
  for (int i = 0; i < n; ++i) {
    const double mass = a0.col(i).squaredNorm();
    state.gamma[i] = std::clamp(1.0 - mass, kWarmGammaFloor, 1.0 - kGammaMargin);
  }
  state.a_current = apply_variance_constraint(std::move(a0), state.gamma);
  state.x = Matrix::Zero(k, n);
  state.momentum_x = state.x;
  state.momentum_gamma = state.gamma;
  state.momentum_a = state.a_current;
  state.best_loss = stein_loss(implied_correlation(state.a_current, state.gamma), s);
  state.best_a = state.a_current;
  state.best_gamma = state.gamma;

  const double l_a = a_step_bound(l_alpha, cfg.connect_weight);

  int gamma_fallbacks = 0;
  int delta_halvings = 0;
  int consecutive_small = 0;
  bool converged = false;
  int outer = 0;
  double last_loss = state.best_loss;
  Matrix a_momentum_prev = state.a_current;
  while (outer < cfg.max_outer) {
    ++outer;
    InnerResult inner = inner_solve(state.a_current, state.gamma, s_inv, cfg);
    if (inner.gamma_fallback) ++gamma_fallbacks;
    delta_halvings += inner.delta_halvings;

    // One composed proximal A step per outer round, Algorithm-3 style: the
    // momentum point and scalar persist across outer iterations.
    Matrix a_next = composed_a_step(state.momentum_a, state.a_current + inner.x, inner.gamma,
                                    l_alpha, cfg, l_a);
    state.x = std::move(inner.x);
    state.gamma = std::move(inner.gamma);
    state.momentum_x = state.x;
    state.momentum_gamma = state.gamma;

    const double loss = stein_loss(implied_correlation(a_next, state.gamma), s);
    const double t_next = fista_next_t(state.t);
    const double theta = (state.t - 1.0) / t_next;
    if (loss > last_loss) {
      state.t = 1.0;
      state.momentum_a = a_next;
    } else {
      state.t = t_next;
      state.momentum_a = a_next + theta * (a_next - a_momentum_prev);
    }
    a_momentum_prev = a_next;
    last_loss = loss;
    state.a_current = std::move(a_next);

    state.loss_history.push_back(loss);
    const double prev_best = state.best_loss;
    if (loss < state.best_loss) {
      state.best_loss = loss;
      state.best_a = state.a_current;
      state.best_gamma = state.gamma;
    }
    if (options.observer) options.observer(state, outer);

    const double rel = (prev_best - state.best_loss) / std::max(1.0, std::abs(prev_best));
    if (rel < cfg.outer_tol) {
      if (++consecutive_small >= 10) {
        converged = true;
        break;
      }
    } else {
      consecutive_small = 0;
    }
  }

  result.loadings = std::move(state.best_a);
  result.gamma = std::move(state.best_gamma);
  result.final_loss = state.best_loss;
  result.outer_iters = outer;
  result.converged = converged;
  result.loss_trace = std::move(state.loss_history);
  if (gamma_fallbacks > 0)
    result.warnings.push_back("L_gamma fell back to K on " + std::to_string(gamma_fallbacks) +
                              " inner solves (K2 singular)");
  if (delta_halvings > 0)
    result.warnings.push_back("trust region halved " + std::to_string(delta_halvings) +
                              " times to keep M positive definite");
  return result;
}

}  // namespace gcica
