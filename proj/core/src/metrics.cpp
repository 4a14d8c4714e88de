#include "gcica/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gcica/common.hpp"
#include "gcica/ica.hpp"

namespace gcica {

MatchResult match_components(const Matrix& recovered, const Matrix& truth) {
  if (recovered.cols() != truth.cols())
    throw ValidationError("recovered and truth must have the same node count");
  const int kr = static_cast<int>(recovered.rows());
  const int kt = static_cast<int>(truth.rows());

  struct Entry {
    double corr;
    int r;
    int t;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(kr) * kt);
  for (int r = 0; r < kr; ++r)
    for (int t = 0; t < kt; ++t) {
      const double c = std::min(1.0, std::abs(pearson(recovered.row(r), truth.row(t))));
      entries.push_back({c, r, t});
    }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.corr != b.corr) return a.corr > b.corr;
    if (a.r != b.r) return a.r < b.r;
    return a.t < b.t;
  });

  MatchResult out;
  std::vector<bool> used_r(kr, false), used_t(kt, false);
  for (const Entry& e : entries) {
    if (used_r[e.r] || used_t[e.t]) continue;
    used_r[e.r] = true;
    used_t[e.t] = true;
    out.pairs.push_back({e.r, e.t, e.corr});
  }
  for (int r = 0; r < kr; ++r)
    if (!used_r[r]) out.unmatched_recovered.push_back(r);
  for (int t = 0; t < kt; ++t)
    if (!used_t[t]) out.unmatched_truth.push_back(t);
  return out;
}

double spread(const Matrix& a, const Laplacian& l) {
  if (l.alpha != 0.0) throw ValidationError("spread expects the unregularized Laplacian");
  if (a.cols() != l.matrix.rows())
    throw ValidationError("loadings and Laplacian disagree on node count");
  if (a.rows() == 0) return 0.0;
  return (a * l.matrix).cwiseProduct(a).sum() / static_cast<double>(a.rows());
}

LocalizationResult localization(const Matrix& recovered,
                                const std::vector<std::vector<int>>& supports,
                                const MatchResult& match) {
  LocalizationResult out;
  for (const MatchPair& pair : match.pairs) {
    if (pair.truth < 0 || pair.truth >= static_cast<int>(supports.size()))
      throw ValidationError("match refers to a truth component without a support set");
    double inside = 0.0;
    for (int i : supports[pair.truth]) inside += recovered(pair.recovered, i) * recovered(pair.recovered, i);
    const double total = recovered.row(pair.recovered).squaredNorm();
    const double outside = std::max(0.0, total - inside);
    if (inside == 0.0)
      ++out.excluded;
    else
      out.value += outside / inside;
  }
  return out;
}

double l1_sparsity(const Matrix& a) { return a.cwiseAbs().sum(); }

RecoveryReport recovery_report(const MatchResult& match, double threshold) {
  RecoveryReport out;
  std::vector<double> corrs;
  corrs.reserve(match.pairs.size());
  for (const MatchPair& pair : match.pairs) {
    corrs.push_back(pair.correlation);
    if (pair.correlation > threshold) ++out.n_recovered;
  }
  std::sort(corrs.begin(), corrs.end(), std::greater<>());
  const std::size_t take = std::min<std::size_t>(5, corrs.size());
  if (take > 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += corrs[i];
    out.mean_top5 = sum / static_cast<double>(take);
  }
  return out;
}

MetricsReport compute_metrics(const Matrix& recovered, const Matrix& truth,
                              const std::vector<std::vector<int>>& supports, const Graph& g) {
  MetricsReport report;
  const MatchResult match = match_components(recovered, truth);
  const Laplacian l = combinatorial_laplacian(g);
  report.spread = spread(recovered, l);
  const LocalizationResult loc = localization(recovered, supports, match);
  report.localization = loc.value;
  report.localization_excluded = loc.excluded;
  report.l1_sparsity = l1_sparsity(recovered);
  const RecoveryReport recovery = recovery_report(match);
  report.n_recovered = recovery.n_recovered;
  report.mean_top5 = recovery.mean_top5;
  report.matches = match.pairs;
  return report;
}

std::string to_string(SweepSolver solver) {
  return solver == SweepSolver::kConstrained ? "constrained" : "vanilla_ica";
}

SweepSolver sweep_solver_from_string(const std::string& name) {
  if (name == "constrained") return SweepSolver::kConstrained;
  if (name == "vanilla_ica" || name == "vanilla") return SweepSolver::kVanillaIca;
  throw ValidationError("unknown solver '" + name + "'");
}

std::vector<SweepCell> noise_sweep(const SweepConfig& cfg) {
  if (cfg.sigmas.empty()) throw ValidationError("sweep needs at least one sigma");
  if (cfg.n_trials < 1) throw ValidationError("sweep needs at least one trial");
  if (cfg.solvers.empty()) throw ValidationError("sweep needs at least one solver");

  const std::size_t n_instances = cfg.sigmas.size() * static_cast<std::size_t>(cfg.n_trials);
  const std::size_t n_solvers = cfg.solvers.size();
  std::vector<SweepCell> cells(n_instances * n_solvers);

  parallel_for(n_instances, cfg.n_threads, [&](std::size_t idx) {
    const std::size_t sigma_idx = idx / cfg.n_trials;
    const int trial = static_cast<int>(idx % cfg.n_trials);
    const double sigma = cfg.sigmas[sigma_idx];
    const std::uint64_t instance_seed = derive_seed(cfg.master_seed, idx);

    for (std::size_t s = 0; s < n_solvers; ++s) {
      SweepCell& cell = cells[idx * n_solvers + s];
      cell.sigma = sigma;
      cell.solver = cfg.solvers[s];
      cell.trial = trial;
      cell.seed = instance_seed;
    }

    try {
      SyntheticConfig syn = cfg.synthetic;
      syn.noise_sigma = sigma;
      syn.seed = instance_seed;
      const SyntheticInstance instance = make_instance(syn);
      const std::uint64_t solver_seed = derive_seed(instance_seed, 0x50f17ULL);

      for (std::size_t s = 0; s < n_solvers; ++s) {
        SweepCell& cell = cells[idx * n_solvers + s];
        try {
          Matrix loadings;
          if (cfg.solvers[s] == SweepSolver::kConstrained) {
            SolverConfig solver_cfg = cfg.solver;
            solver_cfg.seed = solver_seed;
            loadings = fit(instance.observations, instance.graph, solver_cfg).loadings;
          } else {
            loadings = vanilla_ica_warm_start(instance.observations, cfg.solver.n_components,
                                              solver_seed)
                           .loadings;
          }
          cell.report = compute_metrics(loadings, instance.true_components,
                                        instance.component_supports, instance.graph);
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
        }
      }
    } catch (const std::exception& e) {
      for (std::size_t s = 0; s < n_solvers; ++s) {
        cells[idx * n_solvers + s].failed = true;
        cells[idx * n_solvers + s].error = e.what();
      }
    }
  });
  return cells;
}

}  // namespace gcica
