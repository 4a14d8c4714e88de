#include <random>
#include <string>
#include <vector>

#include "benchmark/benchmark.h"

#include "gcica/robustness.hpp"

namespace {

gcica::ComponentBank make_bank_of(int rows, int cols) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  gcica::Matrix components(rows, cols);
  std::vector<std::string> subjects, scans, ids;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) components(r, c) = normal(rng);
    subjects.push_back("s" + std::to_string(r % 10));
    scans.push_back(std::to_string(r % 3));
    ids.push_back("f" + std::to_string(r));
  }
  return gcica::make_bank(components, subjects, scans, ids);
}

void BM_CorrelationBank(benchmark::State& state) {
  const auto bank = make_bank_of(static_cast<int>(state.range(0)), 64);
  for (auto _ : state) benchmark::DoNotOptimize(gcica::correlation_bank(bank));
}
BENCHMARK(BM_CorrelationBank)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_KnnStatistic(benchmark::State& state) {
  const auto bank = make_bank_of(static_cast<int>(state.range(0)), 64);
  const gcica::Matrix corr = gcica::correlation_bank(bank);
  for (auto _ : state)
    benchmark::DoNotOptimize(gcica::knn_statistic(corr, bank.subject_labels, 5));
}
BENCHMARK(BM_KnnStatistic)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_PermutationTest(benchmark::State& state) {
  const auto bank = make_bank_of(200, 64);
  const gcica::Matrix corr = gcica::correlation_bank(bank);
  for (auto _ : state)
    benchmark::DoNotOptimize(gcica::permutation_test(corr, bank.subject_labels, bank.scan_labels,
                                                     3, 200, 7,
                                                     gcica::PermutationMode::kSubject));
}
BENCHMARK(BM_PermutationTest)->Unit(benchmark::kMillisecond);

}  // namespace
