#include <cmath>
#include <functional>

#include "doctest.h"

#include "gcica/common.hpp"
#include "gcica/metrics.hpp"
#include "gcica/solver.hpp"
#include "gcica/synthetic.hpp"
#include "test_util.hpp"

using namespace gcica;

namespace {

// Central finite differences over every entry of a matrix argument.
Matrix fd_matrix_grad(const std::function<double(const Matrix&)>& f, const Matrix& at,
                      double h = 1e-5) {
  Matrix grad(at.rows(), at.cols());
  for (Eigen::Index r = 0; r < at.rows(); ++r)
    for (Eigen::Index c = 0; c < at.cols(); ++c) {
      Matrix hi = at, lo = at;
      hi(r, c) += h;
      lo(r, c) -= h;
      grad(r, c) = (f(hi) - f(lo)) / (2.0 * h);
    }
  return grad;
}

Vector fd_vector_grad(const std::function<double(const Vector&)>& f, const Vector& at,
                      double h = 1e-5) {
  Vector grad(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Vector hi = at, lo = at;
    hi[i] += h;
    lo[i] -= h;
    grad[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return grad;
}

double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-12);
}

struct SmallProblem {
  Matrix a;
  Matrix x;
  Vector gamma;
  Matrix s_inv;
};

SmallProblem random_problem(int k, int n, std::mt19937_64& rng) {
  SmallProblem p;
  p.a = testutil::random_matrix(k, n, 0.1, 1.0, rng);
  p.x = testutil::random_matrix(k, n, -0.05, 0.05, rng);
  p.gamma = testutil::random_vector(n, 0.3, 0.8, rng);
  const Matrix b = testutil::random_matrix(n, n, -0.5, 0.5, rng);
  p.s_inv = b * b.transpose() + 0.2 * Matrix::Identity(n, n);
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("gradients vanish when the model matches the target") {
  std::mt19937_64 rng(1);
  const Matrix a = testutil::random_matrix(2, 4, 0.1, 1.0, rng);
  const Vector gamma = testutil::random_vector(4, 0.2, 0.8, rng);
  Matrix s = a.transpose() * a;
  s.diagonal() += gamma;
  const Matrix s_inv = s.inverse();
  const Matrix x0 = Matrix::Zero(2, 4);

  CHECK(grad_x(a, x0, gamma, s_inv).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(grad_gamma(a, x0, gamma, s_inv).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + trial % 2;
    const int n = 4 + trial % 3;
    const SmallProblem p = random_problem(k, n, rng);

    const Matrix gx = grad_x(p.a, p.x, p.gamma, p.s_inv);
    const Matrix fd_gx = fd_matrix_grad(
        [&](const Matrix& x) { return linearized_objective(p.a, x, p.gamma, p.s_inv); }, p.x);
    CHECK(rel_err(gx, fd_gx) < 1e-5);
    CHECK(gx.rows() == p.x.rows());
    CHECK(gx.cols() == p.x.cols());

    const Vector gg = grad_gamma(p.a, p.x, p.gamma, p.s_inv);
    const Vector fd_gg = fd_vector_grad(
        [&](const Vector& g) { return linearized_objective(p.a, p.x, g, p.s_inv); }, p.gamma);
    CHECK(rel_err(gg, fd_gg) < 1e-5);
    CHECK(gg.size() == n);
  }
}

TEST_CASE("A-step gradient matches finite differences") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2, n = 5;
    const Matrix a = testutil::random_matrix(k, n, 0.1, 1.0, rng);
    const Matrix target = testutil::random_matrix(k, n, 0.1, 1.0, rng);
    const Graph g = testutil::random_graph(n, 0.6, rng);
    const Laplacian l = combinatorial_laplacian(g);
    const double rho = 0.7;

    const Matrix grad = a_step_grad(a, target, l, rho);
    const Matrix fd = fd_matrix_grad(
        [&](const Matrix& m) { return a_step_objective(m, target, l, rho, 0.0); }, a);
    CHECK(rel_err(grad, fd) < 1e-5);
  }
}

TEST_CASE("Lipschitz bounds") {
  std::mt19937_64 rng(4);
  const SmallProblem p = random_problem(2, 5, rng);
  const Graph g = testutil::random_graph(5, 0.5, rng);
  const Laplacian l = combinatorial_laplacian(g);

  const LipschitzBounds bounds = lipschitz_bounds(p.a, p.x, p.gamma, l, 1.3);
  CHECK(bounds.l_x > 0.0);
  CHECK(bounds.l_gamma > 0.0);
  CHECK(bounds.l_a > 0.0);

  const LipschitzBounds no_rho = lipschitz_bounds(p.a, p.x, p.gamma, l, 0.0);
  CHECK(no_rho.l_a == doctest::Approx(1.0).epsilon(1e-12));

  // Sampled gradient-difference ratios stay below L_X for nearby pairs.
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x1 = testutil::random_matrix(2, 5, -0.01, 0.01, rng);
    const Matrix x2 = x1 + testutil::random_matrix(2, 5, -0.002, 0.002, rng);
    const LipschitzBounds local = lipschitz_bounds(p.a, x1, p.gamma, l, 0.0);
    const Matrix g1 = grad_x(p.a, x1, p.gamma, p.s_inv);
    const Matrix g2 = grad_x(p.a, x2, p.gamma, p.s_inv);
    CHECK((g1 - g2).norm() <= local.l_x * (x1 - x2).norm() + 1e-12);
  }
}

TEST_CASE("projections") {
  Matrix x(2, 3);
  x << 2, 0, 0, 0, 0.05, 0;
  const Matrix projected = project_row_ball(x, 0.1);
  CHECK(projected.row(0).norm() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK((projected.row(1) - x.row(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((project_row_ball(projected, 0.1) - projected).cwiseAbs().maxCoeff() == 0.0);

  Vector gamma(3);
  gamma << 1.5, 0.5, -0.2;
  const Vector boxed = project_box01(gamma);
  CHECK(boxed[0] == doctest::Approx(1.0 - kGammaMargin));
  CHECK(boxed[1] == doctest::Approx(0.5));
  CHECK(boxed[2] == doctest::Approx(kGammaMargin));

  // Non-expansiveness on sampled pairs.
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix u = testutil::random_matrix(3, 4, -1.0, 1.0, rng);
    const Matrix v = testutil::random_matrix(3, 4, -1.0, 1.0, rng);
    CHECK((project_row_ball(u, 0.3) - project_row_ball(v, 0.3)).norm() <=
          (u - v).norm() + 1e-12);
    const Vector a = testutil::random_vector(6, -2.0, 2.0, rng);
    const Vector b = testutil::random_vector(6, -2.0, 2.0, rng);
    CHECK((project_box01(a) - project_box01(b)).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("momentum scalar sequence") {
  CHECK(fista_next_t(1.0) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
  CHECK(fista_next_t(1.0) == doctest::Approx(1.6180).epsilon(1e-4));
  double t = 1.0;
  for (int i = 0; i < 20; ++i) {
    const double next = fista_next_t(t);
    CHECK(next > t);
    t = next;
  }
}

TEST_CASE("inner solve improves the objective and stays feasible") {
  std::mt19937_64 rng(8);
  SyntheticConfig syn;
  syn.n_components = 2;
  syn.nodes_per_component = 4;
  syn.t_samples = 300;
  syn.seed = 3;
  const SyntheticInstance instance = make_instance(syn);
  const Matrix s = shrunk_correlation(instance.observations, 0.01);
  const Matrix s_inv = s.inverse();

  const int n = instance.graph.n_nodes();
  Matrix a = testutil::random_matrix(3, n, 0.05, 0.6, rng);
  Vector gamma(n);
  for (int i = 0; i < n; ++i)
    gamma[i] = std::clamp(1.0 - a.col(i).squaredNorm(), kGammaMargin, 1.0 - kGammaMargin);
  a = apply_variance_constraint(a, gamma);

  SolverConfig cfg;
  cfg.n_components = 3;
  const InnerResult inner = inner_solve(a, gamma, s_inv, cfg);

  CHECK(inner.objective <= linearized_objective(a, Matrix::Zero(3, n), gamma, s_inv) + 1e-9);
  for (int r = 0; r < inner.x.rows(); ++r)
    CHECK(inner.x.row(r).norm() <= cfg.trust_radius + 1e-10);
  CHECK(inner.gamma.minCoeff() >= kGammaMargin - 1e-15);
  CHECK(inner.gamma.maxCoeff() <= 1.0 - kGammaMargin + 1e-15);
  CHECK(inner.t_final >= 1.0);
}

TEST_CASE("A update obeys its constraint set") {
  std::mt19937_64 rng(9);
  const int k = 3, n = 6;
  const Matrix a_prev = testutil::random_matrix(k, n, 0.0, 0.7, rng);
  const Matrix x = testutil::random_matrix(k, n, -0.05, 0.05, rng);
  const Vector gamma = testutil::random_vector(n, 0.2, 0.7, rng);
  const Graph g = testutil::random_graph(n, 0.5, rng);
  const Laplacian l = regularized_laplacian(combinatorial_laplacian(g), 0.01);

  SolverConfig cfg;
  cfg.n_components = k;
  const Matrix a = update_a(a_prev, x, gamma, l, cfg);
  CHECK(a.minCoeff() >= 0.0);
  for (int i = 0; i < n; ++i)
    CHECK(a.col(i).squaredNorm() == doctest::Approx(1.0 - gamma[i]).epsilon(1e-9));

  // A sparsity weight above every entry annihilates the gradient step, and
  // the rescale then fills each column with the uniform direction.
  SolverConfig heavy = cfg;
  heavy.sparsity_weight = 1e7;
  const Matrix uniform = update_a(a_prev, x, gamma, l, heavy);
  for (int i = 0; i < n; ++i) {
    const double expected = std::sqrt((1.0 - gamma[i]) / k);
    for (int r = 0; r < k; ++r) CHECK(uniform(r, i) == doctest::Approx(expected).epsilon(1e-12));
  }

  // Plain soft-threshold behavior on both signs.
  Matrix signs(1, 3);
  signs << 0.5, -0.5, 0.05;
  const Matrix thresholded = soft_threshold(signs, 0.1);
  CHECK(thresholded(0, 0) == doctest::Approx(0.4));
  CHECK(thresholded(0, 1) == doctest::Approx(-0.4));
  CHECK(thresholded(0, 2) == 0.0);

  Vector full = gamma;
  full[0] = 1.0;
  CHECK_THROWS_AS(apply_variance_constraint(a_prev, full), ValidationError);
}

TEST_CASE("inner solve agrees with a projected-gradient reference") {
  // Smoke version of the brute-force comparison; the acceptance suite runs
  // the long one.
  std::mt19937_64 rng(12);
  const SmallProblem p = random_problem(2, 6, rng);
  SolverConfig cfg;
  cfg.n_components = 2;
  cfg.inner_max = 4000;
  const InnerResult inner = inner_solve(p.a, p.gamma, p.s_inv, cfg);

  Matrix x = Matrix::Zero(2, 6);
  Vector gamma = project_box01(p.gamma);
  const double step = 1e-4;
  for (int it = 0; it < 200000; ++it) {
    x = project_row_ball(x - step * grad_x(p.a, x, gamma, p.s_inv), cfg.trust_radius);
    gamma = project_box01(gamma - step * grad_gamma(p.a, x, gamma, p.s_inv));
  }
  const double reference = linearized_objective(p.a, x, gamma, p.s_inv);
  CHECK(std::abs(inner.objective - reference) < 1e-3);
}

TEST_CASE("fit returns a consistent, feasible, deterministic result") {
  SyntheticConfig syn;
  syn.n_components = 3;
  syn.nodes_per_component = 6;
  syn.t_samples = 300;
  syn.noise_sigma = 0.01;
  syn.seed = 11;
  const SyntheticInstance instance = make_instance(syn);

  SolverConfig cfg;
  cfg.n_components = 6;
  cfg.max_outer = 40;
  cfg.inner_max = 200;
  cfg.seed = 5;

  int observed = 0;
  FitOptions options;
  options.observer = [&](const SolverState& state, int) {
    ++observed;
    CHECK(state.a_current.minCoeff() >= 0.0);
    CHECK(state.gamma.minCoeff() >= kGammaMargin - 1e-15);
    CHECK(state.gamma.maxCoeff() <= 1.0 - kGammaMargin + 1e-15);
    CHECK(state.t >= 1.0);
    for (int r = 0; r < state.x.rows(); ++r)
      CHECK(state.x.row(r).norm() <= cfg.trust_radius + 1e-10);
    for (int i = 0; i < state.a_current.cols(); ++i)
      CHECK(state.a_current.col(i).squaredNorm() ==
            doctest::Approx(1.0 - state.gamma[i]).epsilon(1e-9));
  };

  const FitResult result = fit(instance.observations, instance.graph, cfg, options);
  CHECK(observed == result.outer_iters);
  CHECK(result.loadings.rows() == 6);
  CHECK(result.loadings.minCoeff() >= 0.0);

  // final_loss is the Stein loss of the returned pair.
  const Matrix s = shrunk_correlation(instance.observations, result.shrink_used);
  CHECK(std::abs(stein_loss(implied_correlation(result.loadings, result.gamma), s) -
                 result.final_loss) < 1e-9);

  // The best-so-far trace never rises.
  double best = result.loss_trace.front();
  for (double loss : result.loss_trace) {
    best = std::min(best, loss);
    CHECK(best <= result.loss_trace.front() + 1e-12);
  }
  CHECK(result.final_loss <= best + 1e-12);

  const FitResult again = fit(instance.observations, instance.graph, cfg);
  CHECK((again.loadings - result.loadings).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.gamma - result.gamma).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("raising rho does not raise the typical spread") {
  SolverConfig smooth_cfg;
  smooth_cfg.n_components = 4;
  smooth_cfg.max_outer = 30;
  smooth_cfg.inner_max = 120;
  smooth_cfg.connect_weight = 5.0;
  SolverConfig rough_cfg = smooth_cfg;
  rough_cfg.connect_weight = 0.1;

  int smooth_wins = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    SyntheticConfig syn;
    syn.n_components = 3;
    syn.nodes_per_component = 5;
    syn.t_samples = 200;
    syn.noise_sigma = 0.05;
    syn.seed = 100 + trial;
    const SyntheticInstance instance = make_instance(syn);
    const Laplacian l = combinatorial_laplacian(instance.graph);

    smooth_cfg.seed = rough_cfg.seed = 17 + trial;
    const FitResult hi = fit(instance.observations, instance.graph, smooth_cfg);
    const FitResult lo = fit(instance.observations, instance.graph, rough_cfg);
    if (spread(hi.loadings, l) <= spread(lo.loadings, l)) ++smooth_wins;
  }
  CHECK(smooth_wins > trials / 2);
}

TEST_CASE("redundant components shrink on an easy instance") {
  SyntheticConfig syn;
  syn.n_components = 2;
  syn.nodes_per_component = 6;
  syn.t_samples = 400;
  syn.noise_sigma = 0.01;
  syn.seed = 9;
  const SyntheticInstance instance = make_instance(syn);

  SolverConfig cfg;
  cfg.n_components = 4;  // twice the truth
  cfg.max_outer = 60;
  cfg.inner_max = 200;
  cfg.seed = 2;

  std::vector<double> first_norms, last_norms;
  FitOptions options;
  options.observer = [&](const SolverState& state, int outer) {
    std::vector<double> norms;
    for (int r = 0; r < state.a_current.rows(); ++r)
      norms.push_back(state.a_current.row(r).norm());
    std::sort(norms.begin(), norms.end());
    if (outer == 1) first_norms = norms;
    last_norms = norms;
  };
  fit(instance.observations, instance.graph, cfg, options);

  // The two weakest components lose mass relative to where they started.
  REQUIRE(first_norms.size() == 4);
  const double weak_start = first_norms[0] + first_norms[1];
  const double weak_end = last_norms[0] + last_norms[1];
  CHECK(weak_end < weak_start);
}

TEST_SUITE_END();
