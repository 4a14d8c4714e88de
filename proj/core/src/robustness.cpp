#include "gcica/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gcica/common.hpp"
#include "gcica/graph.hpp"

namespace gcica {

namespace {

struct SelectedPair {
  int i;
  int j;
  double rho;
};

// Directed top-k selection per source row; candidate ties break on the
// lower column index.
std::vector<SelectedPair> knn_pairs(const Matrix& corr, int k,
                                    const std::vector<std::string>* restrict_labels) {
  const int m = static_cast<int>(corr.rows());
  std::vector<SelectedPair> pairs;
  pairs.reserve(static_cast<std::size_t>(m) * k);
  std::vector<int> candidates;
  for (int i = 0; i < m; ++i) {
    candidates.clear();
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      if (restrict_labels && (*restrict_labels)[j] != (*restrict_labels)[i]) continue;
      candidates.push_back(j);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if (corr(i, a) != corr(i, b)) return corr(i, a) > corr(i, b);
      return a < b;
    });
    const int take = std::min<int>(k, static_cast<int>(candidates.size()));
    for (int q = 0; q < take; ++q) pairs.push_back({i, candidates[q], corr(i, candidates[q])});
  }
  return pairs;
}

int count_distinct(const std::vector<std::string>& labels) {
  return static_cast<int>(std::set<std::string>(labels.begin(), labels.end()).size());
}

ClusterReport clusters_impl(const Matrix& corr, double eta) {
  const int m = static_cast<int>(corr.rows());
  Matrix adjacency = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (corr(i, j) >= eta) {
        adjacency(i, j) = 1.0;
        adjacency(j, i) = 1.0;
      }
  auto components = connected_components(Graph::from_dense(adjacency));
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  ClusterReport report;
  report.eta = eta;
  report.assignments.assign(m, -1);
  for (int c = 0; c < static_cast<int>(components.size()); ++c) {
    report.sizes.push_back(static_cast<int>(components[c].size()));
    for (int row : components[c]) report.assignments[row] = c;
  }
  report.clusters = std::move(components);
  return report;
}

}  // namespace

ComponentBank make_bank(const Matrix& components, std::vector<std::string> subject_labels,
                        std::vector<std::string> scan_labels, std::vector<std::string> fit_ids) {
  const auto m = components.rows();
  if (static_cast<Eigen::Index>(subject_labels.size()) != m ||
      static_cast<Eigen::Index>(scan_labels.size()) != m ||
      static_cast<Eigen::Index>(fit_ids.size()) != m)
    throw ValidationError("label vectors must match the component row count");

  std::vector<int> keep;
  keep.reserve(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Vector row = components.row(r);
    const Vector centered = row.array() - row.mean();
    if (centered.norm() > 0.0) keep.push_back(static_cast<int>(r));
  }

  ComponentBank bank;
  bank.dropped_constant_rows = static_cast<int>(m) - static_cast<int>(keep.size());
  bank.components.resize(keep.size(), components.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    bank.components.row(r) = components.row(keep[r]);
    bank.subject_labels.push_back(std::move(subject_labels[keep[r]]));
    bank.scan_labels.push_back(std::move(scan_labels[keep[r]]));
    bank.fit_ids.push_back(std::move(fit_ids[keep[r]]));
  }
  return bank;
}

Matrix correlation_bank(const ComponentBank& bank) {
  const auto m = bank.components.rows();
  Matrix z(m, bank.components.cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const Vector centered = bank.components.row(r).array() - bank.components.row(r).mean();
    z.row(r) = centered / centered.norm();
  }
  Matrix corr = z * z.transpose();
  corr.diagonal().setOnes();
  return corr;
}

double knn_statistic(const Matrix& corr, const std::vector<std::string>& labels, int k) {
  const int m = static_cast<int>(corr.rows());
  if (static_cast<int>(labels.size()) != m)
    throw ValidationError("labels must match the correlation matrix size");
  if (k < 1 || k > m - 1) throw ValidationError("k must lie in [1, M-1]");
  double s = 0.0;
  for (const SelectedPair& p : knn_pairs(corr, k, nullptr))
    if (labels[p.i] == labels[p.j]) s += p.rho;
  return s;
}

PermutationTestResult permutation_test(const Matrix& corr,
                                       const std::vector<std::string>& subject_labels,
                                       const std::vector<std::string>& scan_labels, int k,
                                       int n_perm, std::uint64_t seed, PermutationMode mode,
                                       int n_threads) {
  const int m = static_cast<int>(corr.rows());
  if (static_cast<int>(subject_labels.size()) != m)
    throw ValidationError("subject labels must match the correlation matrix size");
  if (k < 1 || k > m - 1) throw ValidationError("k must lie in [1, M-1]");
  if (n_perm < 100) throw ValidationError("n_perm must be at least 100");

  PermutationTestResult result;
  result.null_samples.assign(n_perm, 0.0);

  if (mode == PermutationMode::kSubject) {
    if (count_distinct(subject_labels) < 2)
      throw ValidationError("permutation test needs at least 2 distinct subject labels");
    const auto pairs = knn_pairs(corr, k, nullptr);
    for (const SelectedPair& p : pairs)
      if (subject_labels[p.i] == subject_labels[p.j]) {
        result.observed += p.rho;
        ++result.observed_count;
      }

    std::vector<int> count_null(n_perm, 0);
    parallel_for(static_cast<std::size_t>(n_perm), n_threads, [&](std::size_t r) {
      Rng rng = make_rng(derive_seed(seed, r));
      std::vector<std::string> permuted = subject_labels;
      std::shuffle(permuted.begin(), permuted.end(), rng);
      double s = 0.0;
      int c = 0;
      for (const SelectedPair& p : pairs)
        if (permuted[p.i] == permuted[p.j]) {
          s += p.rho;
          ++c;
        }
      result.null_samples[r] = s;
      count_null[r] = c;
    });
    int ge = 0, ge_count = 0;
    for (int r = 0; r < n_perm; ++r) {
      if (result.null_samples[r] >= result.observed) ++ge;
      if (count_null[r] >= result.observed_count) ++ge_count;
    }
    result.p_value = (1.0 + ge) / (1.0 + n_perm);
    result.count_p_value = (1.0 + ge_count) / (1.0 + n_perm);
    return result;
  }

  // Session mode: neighbors restricted to same-subject pairs; score pairs
  // spanning different scans; permute scan labels within each subject.
  if (static_cast<int>(scan_labels.size()) != m)
    throw ValidationError("scan labels must match the correlation matrix size");
  if (count_distinct(scan_labels) < 2)
    throw ValidationError("permutation test needs at least 2 distinct scan labels");
  const auto pairs = knn_pairs(corr, k, &subject_labels);
  for (const SelectedPair& p : pairs)
    if (scan_labels[p.i] != scan_labels[p.j]) {
      result.observed += p.rho;
      ++result.observed_count;
    }

  std::vector<std::vector<int>> subject_groups;
  {
    std::vector<std::pair<std::string, int>> order;
    for (int i = 0; i < m; ++i) order.emplace_back(subject_labels[i], i);
    std::sort(order.begin(), order.end());
    for (int i = 0; i < m;) {
      int j = i;
      subject_groups.emplace_back();
      while (j < m && order[j].first == order[i].first)
        subject_groups.back().push_back(order[j++].second);
      i = j;
    }
  }

  std::vector<int> count_null(n_perm, 0);
  parallel_for(static_cast<std::size_t>(n_perm), n_threads, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(seed, r));
    std::vector<std::string> permuted = scan_labels;
    for (const auto& group : subject_groups) {
      std::vector<std::string> values;
      values.reserve(group.size());
      for (int idx : group) values.push_back(permuted[idx]);
      std::shuffle(values.begin(), values.end(), rng);
      for (std::size_t q = 0; q < group.size(); ++q) permuted[group[q]] = std::move(values[q]);
    }
    double s = 0.0;
    int c = 0;
    for (const SelectedPair& p : pairs)
      if (permuted[p.i] != permuted[p.j]) {
        s += p.rho;
        ++c;
      }
    result.null_samples[r] = s;
    count_null[r] = c;
  });
  int ge = 0, ge_count = 0;
  for (int r = 0; r < n_perm; ++r) {
    if (result.null_samples[r] >= result.observed) ++ge;
    if (count_null[r] >= result.observed_count) ++ge_count;
  }
  result.p_value = (1.0 + ge) / (1.0 + n_perm);
  result.count_p_value = (1.0 + ge_count) / (1.0 + n_perm);
  return result;
}

ClusterReport threshold_clusters(const Matrix& corr, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("eta must lie in (0, 1)");
  return clusters_impl(corr, eta);
}

std::vector<Vector> cluster_means(const ComponentBank& bank, const ClusterReport& report,
                                  int top_n) {
  if (static_cast<Eigen::Index>(report.assignments.size()) != bank.components.rows())
    throw ValidationError("cluster report does not match the bank");
  std::vector<Vector> means;
  const int take = std::min<int>(top_n, static_cast<int>(report.clusters.size()));
  for (int c = 0; c < take; ++c) {
    Vector mean = Vector::Zero(bank.components.cols());
    for (int row : report.clusters[c]) mean += bank.components.row(row).transpose();
    mean /= static_cast<double>(report.clusters[c].size());
    means.push_back(std::move(mean));
  }
  return means;
}

std::vector<std::pair<double, int>> eta_sweep(const Matrix& corr,
                                              const std::vector<double>& grid) {
  std::vector<std::pair<double, int>> out;
  out.reserve(grid.size());
  for (double eta : grid) {
    const ClusterReport report = clusters_impl(corr, eta);
    out.emplace_back(eta, report.sizes.empty() ? 0 : report.sizes.front());
  }
  return out;
}

}  // namespace gcica
