#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace gcica {

// Invalid user input: bad shapes, out-of-range parameters, malformed files.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical operation could not complete: Cholesky breakdown, divergence.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for stream `stream` of a master seed. Trials, sweep cells and
// permutation replicates each get their own stream so they reproduce
// bit-identically regardless of execution order or thread count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Runs fn(i) for i in [0, n). fn must only write state owned by its index.
void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn);

}  // namespace gcica
