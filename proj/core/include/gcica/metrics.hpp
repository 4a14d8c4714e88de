#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcica/graph.hpp"
#include "gcica/solver.hpp"
#include "gcica/synthetic.hpp"

namespace gcica {

struct MatchPair {
  int recovered = 0;
  int truth = 0;
  double correlation = 0.0;  // absolute Pearson, in [0, 1]
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // descending correlation
  std::vector<int> unmatched_recovered;
  std::vector<int> unmatched_truth;
};

// Greedy one-to-one matching by descending absolute row correlation; ties
// break on (recovered index, truth index) ascending. Zero-variance rows
// correlate as 0.
MatchResult match_components(const Matrix& recovered, const Matrix& truth);

// Mean Laplacian quadratic form over rows; expects alpha = 0.
double spread(const Matrix& a, const Laplacian& l);

// Sum over matched components of outside-support energy over
// inside-support energy. Components with zero inside energy are excluded
// and counted instead of contributing +inf.
struct LocalizationResult {
  double value = 0.0;
  int excluded = 0;
};
LocalizationResult localization(const Matrix& recovered,
                                const std::vector<std::vector<int>>& supports,
                                const MatchResult& match);

double l1_sparsity(const Matrix& a);

inline constexpr double kRecoveryThreshold = 0.8;

struct RecoveryReport {
  int n_recovered = 0;    // matched pairs with correlation above the threshold
  double mean_top5 = 0.0;  // mean of the five largest pair correlations
};
RecoveryReport recovery_report(const MatchResult& match,
                               double threshold = kRecoveryThreshold);

struct MetricsReport {
  double spread = 0.0;
  double localization = 0.0;
  int localization_excluded = 0;
  double l1_sparsity = 0.0;
  int n_recovered = 0;
  double mean_top5 = 0.0;
  std::vector<MatchPair> matches;
};

MetricsReport compute_metrics(const Matrix& recovered, const Matrix& truth,
                              const std::vector<std::vector<int>>& supports, const Graph& g);

enum class SweepSolver { kConstrained, kVanillaIca };

std::string to_string(SweepSolver solver);
SweepSolver sweep_solver_from_string(const std::string& name);

struct SweepCell {
  double sigma = 0.0;
  SweepSolver solver = SweepSolver::kConstrained;
  int trial = 0;
  std::uint64_t seed = 0;
  MetricsReport report;
  bool failed = false;
  std::string error;
};

struct SweepConfig {
  std::vector<double> sigmas;
  int n_trials = 10;
  std::vector<SweepSolver> solvers = {SweepSolver::kConstrained, SweepSolver::kVanillaIca};
  SyntheticConfig synthetic;  // noise_sigma and seed overridden per cell
  SolverConfig solver;        // seed overridden per cell
  std::uint64_t master_seed = 0;
  int n_threads = 1;
};

// One generated instance per (sigma, trial) cell, shared by every solver so
// comparisons are paired. Failed cells are recorded and the sweep continues.
std::vector<SweepCell> noise_sweep(const SweepConfig& cfg);

}  // namespace gcica
