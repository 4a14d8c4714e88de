#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gcica/linalg.hpp"

namespace gcica {

// Components stacked from many fits, with per-row provenance labels.
// Constant rows are dropped at ingest and counted.
struct ComponentBank {
  Matrix components;  // M x N
  std::vector<std::string> subject_labels;
  std::vector<std::string> scan_labels;
  std::vector<std::string> fit_ids;
  int dropped_constant_rows = 0;
};

ComponentBank make_bank(const Matrix& components, std::vector<std::string> subject_labels,
                        std::vector<std::string> scan_labels, std::vector<std::string> fit_ids);

// Pairwise row correlations with unit diagonal.
Matrix correlation_bank(const ComponentBank& bank);

// s_k: sum of the correlations of each row's k nearest neighbors restricted
// to pairs that share a label. Directed selection; every selected ordered
// pair counts once.
double knn_statistic(const Matrix& corr, const std::vector<std::string>& labels, int k);

enum class PermutationMode { kSubject, kSessionWithinSubject };

struct PermutationTestResult {
  double observed = 0.0;
  double p_value = 1.0;
  std::vector<double> null_samples;
  // The plain count of label-matching selected pairs, with its own p-value.
  int observed_count = 0;
  double count_p_value = 1.0;
};

// Subject mode permutes subject labels uniformly. Session mode restricts the
// neighbor selection to same-subject pairs, scores pairs spanning different
// scans, and permutes scan labels within each subject.
// p = (1 + #{null >= observed}) / (1 + n_perm).
PermutationTestResult permutation_test(const Matrix& corr,
                                       const std::vector<std::string>& subject_labels,
                                       const std::vector<std::string>& scan_labels, int k,
                                       int n_perm, std::uint64_t seed, PermutationMode mode,
                                       int n_threads = 1);

struct ClusterReport {
  double eta = 0.0;
  std::vector<int> assignments;            // cluster id per row, ids ordered by size
  std::vector<int> sizes;                  // descending
  std::vector<std::vector<int>> clusters;  // members per cluster, same order as sizes
};

// Edge iff the raw signed correlation is >= eta; connected components of the
// resulting graph, largest first.
ClusterReport threshold_clusters(const Matrix& corr, double eta);

std::vector<Vector> cluster_means(const ComponentBank& bank, const ClusterReport& report,
                                  int top_n);

// Largest cluster size per threshold; non-increasing in eta.
std::vector<std::pair<double, int>> eta_sweep(const Matrix& corr,
                                              const std::vector<double>& grid);

}  // namespace gcica
