#pragma once

#include <string>

#include "json.hpp"

#include "gcica/solver.hpp"

namespace gcica::cli {

// Entry point behind the gcica executable. Subcommands: generate, fit,
// metrics, sweep, robustness. Returns 0 on success, 1 on validation errors
// (including unknown flags), 2 on numerical failures.
int run(int argc, const char* const* argv);

// Writes a manifest JSON atomically with sorted keys and trailing newline.
void save_manifest(const nlohmann::json& manifest, const std::string& path);

// Writes loadings, gamma, the optional loss trace and the fit.json manifest
// under out_dir (created if missing). The manifest echoes the effective
// config, lists every emitted file and carries the given timestamp, so
// saving the same result twice produces identical bytes.
nlohmann::json write_fit_outputs(const FitResult& result, const nlohmann::json& config_echo,
                                 const std::string& out_dir, bool write_trace,
                                 const std::string& timestamp);

std::string utc_timestamp();

}  // namespace gcica::cli
