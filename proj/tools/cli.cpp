#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gcica/common.hpp"
#include "gcica/ica.hpp"
#include "gcica/io.hpp"
#include "gcica/metrics.hpp"
#include "gcica/robustness.hpp"
#include "gcica/synthetic.hpp"

namespace gcica::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

AdjacencyFormat adjacency_format_from_string(const std::string& name) {
  if (name == "auto") return AdjacencyFormat::kAuto;
  if (name == "dense") return AdjacencyFormat::kDense;
  if (name == "edges") return AdjacencyFormat::kEdgeList;
  throw ValidationError("unknown adjacency format '" + name + "'");
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ValidationError("'" + token + "' is not a number");
    }
  }
  if (out.empty()) throw ValidationError("expected a comma-separated list of numbers");
  return out;
}

// Values from --config override flag values; unknown keys are rejected.
void apply_config_overrides(json& params, const std::string& config_path) {
  if (config_path.empty()) return;
  std::ifstream in(config_path);
  if (!in) throw ValidationError("cannot open config '" + config_path + "'");
  json overrides;
  try {
    in >> overrides;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + config_path + "' is not valid JSON: " + e.what());
  }
  if (!overrides.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (!params.contains(key))
      throw ValidationError("config key '" + key + "' is not recognized for this command");
    params[key] = value;
  }
}

double j_double(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) throw ValidationError("config key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int j_int(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer())
    throw ValidationError("config key '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::uint64_t j_seed(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer())
    throw ValidationError("config key '" + key + "' must be an integer");
  return j.at(key).get<std::uint64_t>();
}

std::string j_str(const json& j, const std::string& key) {
  if (!j.at(key).is_string()) throw ValidationError("config key '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

bool j_bool(const json& j, const std::string& key) {
  if (!j.at(key).is_boolean()) throw ValidationError("config key '" + key + "' must be a bool");
  return j.at(key).get<bool>();
}

double parse_shrink(const std::string& text) {
  if (text == "auto") return kAutoShrink;
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw ValidationError("shrink must be a number in [0, 1] or 'auto'");
  }
}

WarmStart warm_start_from_string(const std::string& name) {
  if (name == "vanilla_ica") return WarmStart::kVanillaIca;
  if (name == "random") return WarmStart::kRandom;
  if (name == "provided") return WarmStart::kProvided;
  throw ValidationError("unknown warm start '" + name + "'");
}

json supports_to_json(const std::vector<std::vector<int>>& supports) {
  json out = json::array();
  for (const auto& s : supports) out.push_back(s);
  return out;
}

SolverConfig solver_config_from_params(const json& params) {
  SolverConfig cfg;
  cfg.n_components = j_int(params, "components");
  cfg.sparsity_weight = j_double(params, "sparsity_weight");
  cfg.connect_weight = j_double(params, "connect_weight");
  cfg.trust_radius = j_double(params, "trust_radius");
  cfg.alpha = j_double(params, "alpha");
  cfg.max_outer = j_int(params, "max_outer");
  cfg.inner_max = j_int(params, "inner_max");
  cfg.inner_tol = j_double(params, "inner_tol");
  cfg.outer_tol = j_double(params, "outer_tol");
  cfg.shrink = parse_shrink(j_str(params, "shrink"));
  cfg.seed = j_seed(params, "seed");
  cfg.warm_start = warm_start_from_string(j_str(params, "warm_start"));
  return cfg;
}

void add_solver_params(json& params, const SolverConfig& defaults) {
  params["components"] = defaults.n_components;
  params["sparsity_weight"] = defaults.sparsity_weight;
  params["connect_weight"] = defaults.connect_weight;
  params["trust_radius"] = defaults.trust_radius;
  params["alpha"] = defaults.alpha;
  params["max_outer"] = defaults.max_outer;
  params["inner_max"] = defaults.inner_max;
  params["inner_tol"] = defaults.inner_tol;
  params["outer_tol"] = defaults.outer_tol;
  params["shrink"] = "auto";
  params["warm_start"] = "vanilla_ica";
}

SyntheticConfig synthetic_config_from_params(const json& params) {
  SyntheticConfig cfg;
  cfg.n_components = j_int(params, "true_components");
  cfg.nodes_per_component = j_int(params, "nodes_per_component");
  cfg.n_shared_nodes = j_int(params, "shared_nodes");
  cfg.t_samples = j_int(params, "t_samples");
  cfg.noise_sigma = j_double(params, "noise_sigma");
  cfg.weight_low = j_double(params, "weight_low");
  cfg.weight_high = j_double(params, "weight_high");
  cfg.alpha = j_double(params, "generative_alpha");
  cfg.seed = j_seed(params, "seed");
  return cfg;
}

void add_synthetic_params(json& params, const SyntheticConfig& defaults) {
  params["true_components"] = defaults.n_components;
  params["nodes_per_component"] = defaults.nodes_per_component;
  params["shared_nodes"] = defaults.n_shared_nodes;
  params["t_samples"] = defaults.t_samples;
  params["noise_sigma"] = defaults.noise_sigma;
  params["weight_low"] = defaults.weight_low;
  params["weight_high"] = defaults.weight_high;
  params["generative_alpha"] = defaults.alpha;
}

// ---------------------------------------------------------------- generate

int run_generate(const json& params) {
  const std::string out_dir = j_str(params, "out");
  const std::string timestamp = utc_timestamp();
  json manifest;
  manifest["command"] = "generate";
  manifest["config"] = params;
  manifest["seed"] = j_seed(params, "seed");
  manifest["timestamp"] = timestamp;

  SyntheticConfig cfg = synthetic_config_from_params(params);
  std::vector<std::string> files;

  if (j_bool(params, "plate")) {
    Rng rng = make_rng(cfg.seed);
    Backbone backbone = generate_backbone(cfg, rng);
    PlateSample sample = sample_plate_model(backbone.graph, cfg.n_components, cfg.t_samples,
                                            j_double(params, "pi_lambda"), rng);
    save_matrix(sample.instance.graph.weights(), out_dir + "/adjacency.txt");
    save_matrix(sample.instance.true_components, out_dir + "/true_components.txt");
    save_matrix(sample.instance.observations.data, out_dir + "/observations.txt");
    save_matrix(sample.mask, out_dir + "/mask.txt");
    files = {"adjacency.txt", "true_components.txt", "observations.txt", "mask.txt"};
    manifest["supports"] = supports_to_json(sample.instance.component_supports);
    manifest["lambda"] = std::vector<double>(sample.lambda.begin(), sample.lambda.end());
    manifest["sigma2"] = sample.sigma2;
  } else {
    SyntheticInstance instance = make_instance(cfg);
    save_matrix(instance.graph.weights(), out_dir + "/adjacency.txt");
    save_matrix(instance.true_components, out_dir + "/true_components.txt");
    save_matrix(instance.observations.data, out_dir + "/observations.txt");
    files = {"adjacency.txt", "true_components.txt", "observations.txt"};
    manifest["supports"] = supports_to_json(instance.component_supports);
  }
  manifest["files"] = files;
  save_manifest(manifest, out_dir + "/manifest.json");
  std::printf("generate: wrote %zu files to %s\n", files.size() + 1, out_dir.c_str());
  return 0;
}

// --------------------------------------------------------------------- fit

int run_fit(const json& params) {
  const std::string out_dir = j_str(params, "out");
  SolverConfig cfg = solver_config_from_params(params);
  if (cfg.warm_start == WarmStart::kProvided) {
    const std::string path = j_str(params, "warm_start_path");
    if (path.empty()) throw ValidationError("warm_start 'provided' requires warm_start_path");
    cfg.provided_start = load_matrix(path);
  }

  const TimeSeriesMatrix y = standardize(load_matrix(j_str(params, "timeseries")));
  const Graph g = load_graph(j_str(params, "adjacency"),
                             adjacency_format_from_string(j_str(params, "adjacency_format")));

  const FitResult result = fit(y, g, cfg);
  for (const std::string& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  const json manifest =
      write_fit_outputs(result, params, out_dir, j_bool(params, "trace"), utc_timestamp());
  std::printf("fit: final Stein loss %.6g after %d outer iterations (%s)\n", result.final_loss,
              result.outer_iters, result.converged ? "converged" : "iteration cap");
  return 0;
}

// ----------------------------------------------------------------- metrics

int run_metrics(const json& params) {
  const std::string out_dir = j_str(params, "out");
  const Matrix recovered = load_matrix(j_str(params, "recovered"));
  const Matrix truth = load_matrix(j_str(params, "truth"));
  const Graph g = load_graph(j_str(params, "adjacency"),
                             adjacency_format_from_string(j_str(params, "adjacency_format")));

  // Ground-truth supports are the nonzero entries of the truth rows.
  std::vector<std::vector<int>> supports(truth.rows());
  for (Eigen::Index r = 0; r < truth.rows(); ++r)
    for (Eigen::Index c = 0; c < truth.cols(); ++c)
      if (truth(r, c) != 0.0) supports[r].push_back(static_cast<int>(c));

  const MetricsReport report = compute_metrics(recovered, truth, supports, g);

  json manifest;
  manifest["command"] = "metrics";
  manifest["config"] = params;
  manifest["timestamp"] = utc_timestamp();
  manifest["spread"] = report.spread;
  manifest["localization"] = report.localization;
  manifest["localization_excluded"] = report.localization_excluded;
  manifest["l1_sparsity"] = report.l1_sparsity;
  manifest["n_recovered"] = report.n_recovered;
  manifest["mean_top5"] = report.mean_top5;
  json matches = json::array();
  for (const MatchPair& p : report.matches)
    matches.push_back({{"recovered", p.recovered}, {"truth", p.truth}, {"correlation", p.correlation}});
  manifest["matches"] = matches;
  manifest["files"] = json::array();
  save_manifest(manifest, out_dir + "/metrics.json");
  std::printf("metrics: n_recovered=%d mean_top5=%.4f spread=%.4f localization=%.4f l1=%.4f\n",
              report.n_recovered, report.mean_top5, report.spread, report.localization,
              report.l1_sparsity);
  return 0;
}

// ------------------------------------------------------------------- sweep

int run_sweep(const json& params) {
  const std::string out_dir = j_str(params, "out");
  SweepConfig cfg;
  cfg.sigmas = parse_double_list(j_str(params, "sigmas"));
  cfg.n_trials = j_int(params, "trials");
  cfg.solvers.clear();
  {
    std::stringstream ss(j_str(params, "solvers"));
    std::string token;
    while (std::getline(ss, token, ',')) cfg.solvers.push_back(sweep_solver_from_string(token));
  }
  cfg.synthetic = synthetic_config_from_params(params);
  cfg.solver = solver_config_from_params(params);
  cfg.master_seed = j_seed(params, "seed");
  cfg.n_threads = j_int(params, "threads");

  const std::vector<SweepCell> cells = noise_sweep(cfg);

  std::string csv =
      "sigma,solver,trial,seed,spread,localization,l1_sparsity,n_recovered,mean_top5,failed\n";
  int failures = 0;
  for (const SweepCell& cell : cells) {
    csv += format_double(cell.sigma) + "," + to_string(cell.solver) + "," +
           std::to_string(cell.trial) + "," + std::to_string(cell.seed) + ",";
    if (cell.failed) {
      csv += ",,,,,1\n";
      ++failures;
    } else {
      csv += format_double(cell.report.spread) + "," + format_double(cell.report.localization) +
             "," + format_double(cell.report.l1_sparsity) + "," +
             std::to_string(cell.report.n_recovered) + "," +
             format_double(cell.report.mean_top5) + ",0\n";
    }
  }
  write_text_atomic(out_dir + "/sweep.csv", csv);

  json manifest;
  manifest["command"] = "sweep";
  manifest["config"] = params;
  manifest["seed"] = cfg.master_seed;
  manifest["timestamp"] = utc_timestamp();
  manifest["files"] = {"sweep.csv"};
  manifest["n_cells"] = cells.size();
  manifest["n_failed"] = failures;
  if (failures > 0) {
    json errors = json::array();
    for (const SweepCell& cell : cells)
      if (cell.failed)
        errors.push_back({{"sigma", cell.sigma},
                          {"solver", to_string(cell.solver)},
                          {"trial", cell.trial},
                          {"error", cell.error}});
    manifest["failures"] = errors;
  }
  save_manifest(manifest, out_dir + "/sweep.json");
  std::printf("sweep: %zu cells (%d failed) -> %s/sweep.csv\n", cells.size(), failures,
              out_dir.c_str());
  return 0;
}

// -------------------------------------------------------------- robustness

int run_robustness(const json& params) {
  const std::string out_dir = j_str(params, "out");
  const std::string fits_dir = j_str(params, "fits");
  const std::string labels_path = j_str(params, "labels");

  std::ifstream in(labels_path);
  if (!in) throw ValidationError("cannot open labels manifest '" + labels_path + "'");
  json labels_json;
  try {
    in >> labels_json;
  } catch (const json::exception& e) {
    throw ValidationError("labels manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!labels_json.contains("items") || !labels_json["items"].is_array())
    throw ValidationError("labels manifest needs an 'items' array");

  std::vector<Matrix> blocks;
  std::vector<std::string> subjects, scans, ids;
  Eigen::Index n_cols = -1;
  for (const json& item : labels_json["items"]) {
    const std::string file = item.at("file").get<std::string>();
    const std::string subject = item.at("subject").get<std::string>();
    const std::string scan = item.at("scan").get<std::string>();
    const fs::path path = fs::path(file).is_absolute() ? fs::path(file) : fs::path(fits_dir) / file;
    Matrix block = load_matrix(path.string());
    if (n_cols < 0) n_cols = block.cols();
    if (block.cols() != n_cols)
      throw ValidationError("'" + file + "' has " + std::to_string(block.cols()) +
                            " columns, expected " + std::to_string(n_cols));
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      subjects.push_back(subject);
      scans.push_back(scan);
      ids.push_back(file + ":" + std::to_string(r));
    }
    blocks.push_back(std::move(block));
  }
  if (blocks.empty()) throw ValidationError("labels manifest lists no component files");

  Eigen::Index total_rows = 0;
  for (const Matrix& b : blocks) total_rows += b.rows();
  Matrix stacked(total_rows, n_cols);
  Eigen::Index at = 0;
  for (const Matrix& b : blocks) {
    stacked.middleRows(at, b.rows()) = b;
    at += b.rows();
  }

  const ComponentBank bank = make_bank(stacked, subjects, scans, ids);
  const Matrix corr = correlation_bank(bank);
  const int m = static_cast<int>(corr.rows());
  if (m < 2) throw ValidationError("component bank needs at least 2 usable rows");

  const int k_max = std::min(j_int(params, "k_max"), m - 1);
  const int n_perm = j_int(params, "n_perm");
  const std::uint64_t seed = j_seed(params, "seed");
  const int threads = j_int(params, "threads");

  std::set<std::string> distinct_scans(bank.scan_labels.begin(), bank.scan_labels.end());
  const bool session_possible = distinct_scans.size() >= 2;

  json s_k_rows = json::array();
  for (int k = 1; k <= k_max; ++k) {
    json row;
    row["k"] = k;
    row["s_k"] = knn_statistic(corr, bank.subject_labels, k);
    const auto subject_test =
        permutation_test(corr, bank.subject_labels, bank.scan_labels, k, n_perm,
                         derive_seed(seed, static_cast<std::uint64_t>(k)),
                         PermutationMode::kSubject, threads);
    row["subject_p"] = subject_test.p_value;
    row["subject_count_p"] = subject_test.count_p_value;
    if (session_possible) {
      const auto session_test =
          permutation_test(corr, bank.subject_labels, bank.scan_labels, k, n_perm,
                           derive_seed(seed, 1000 + static_cast<std::uint64_t>(k)),
                           PermutationMode::kSessionWithinSubject, threads);
      row["session_observed"] = session_test.observed;
      row["session_p"] = session_test.p_value;
    }
    s_k_rows.push_back(row);
  }

  const double eta_start = j_double(params, "eta_start");
  const double eta_stop = j_double(params, "eta_stop");
  const double eta_step = j_double(params, "eta_step");
  if (!(eta_step > 0.0)) throw ValidationError("eta_step must be positive");
  std::vector<double> grid;
  for (double eta = eta_start; eta <= eta_stop + 1e-12; eta += eta_step) grid.push_back(eta);
  json eta_rows = json::array();
  for (const auto& [eta, largest] : eta_sweep(corr, grid))
    eta_rows.push_back({{"eta", eta}, {"largest_cluster", largest}});

  const double cluster_eta = j_double(params, "cluster_eta");
  const ClusterReport clusters = threshold_clusters(corr, cluster_eta);
  const auto means = cluster_means(bank, clusters, j_int(params, "top_means"));
  std::vector<std::string> files;
  for (std::size_t c = 0; c < means.size(); ++c) {
    char name[64];
    std::snprintf(name, sizeof(name), "cluster_mean_%02zu.txt", c + 1);
    save_matrix(means[c].transpose(), out_dir + "/" + name);
    files.push_back(name);
  }

  json manifest;
  manifest["command"] = "robustness";
  manifest["config"] = params;
  manifest["seed"] = seed;
  manifest["timestamp"] = utc_timestamp();
  manifest["n_rows"] = m;
  manifest["n_dropped_constant"] = bank.dropped_constant_rows;
  manifest["s_k"] = s_k_rows;
  manifest["eta_sweep"] = eta_rows;
  manifest["cluster_eta"] = cluster_eta;
  manifest["cluster_sizes"] = clusters.sizes;
  if (!session_possible)
    manifest["warnings"] = {"single scan label; session permutation test skipped"};
  manifest["files"] = files;
  save_manifest(manifest, out_dir + "/robustness.json");
  std::printf("robustness: %d components from %zu fits -> %s/robustness.json\n", m,
              labels_json["items"].size(), out_dir.c_str());
  return 0;
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void save_manifest(const json& manifest, const std::string& path) {
  write_text_atomic(path, manifest.dump(2) + "\n");
}

json write_fit_outputs(const FitResult& result, const json& config_echo,
                       const std::string& out_dir, bool write_trace,
                       const std::string& timestamp) {
  std::vector<std::string> files = {"loadings.txt", "gamma.txt"};
  save_matrix(result.loadings, out_dir + "/loadings.txt");
  save_matrix(result.gamma.transpose(), out_dir + "/gamma.txt");
  if (write_trace) {
    std::string trace;
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
      trace += std::to_string(i + 1) + "," + format_double(result.loss_trace[i]) + "\n";
    write_text_atomic(out_dir + "/trace.txt", trace);
    files.push_back("trace.txt");
  }

  json manifest;
  manifest["command"] = "fit";
  manifest["config"] = config_echo;
  manifest["timestamp"] = timestamp;
  manifest["final_loss"] = result.final_loss;
  manifest["outer_iters"] = result.outer_iters;
  manifest["converged"] = result.converged;
  manifest["shrink_used"] = result.shrink_used;
  manifest["warm_start_converged"] = result.warm_start_converged;
  manifest["warnings"] = result.warnings;
  manifest["files"] = files;
  save_manifest(manifest, out_dir + "/fit.json");
  return manifest;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Graph-constrained sparse non-negative ICA for time series on graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON file whose keys override flags");

  // generate
  auto* generate = app.add_subcommand("generate", "Generate a synthetic instance");
  SyntheticConfig syn_defaults;
  json gen;
  add_synthetic_params(gen, syn_defaults);
  gen["seed"] = 0;
  gen["plate"] = false;
  gen["pi_lambda"] = 0.5;
  gen["out"] = "out";
  int gen_true_components = syn_defaults.n_components;
  int gen_nodes = syn_defaults.nodes_per_component;
  int gen_shared = syn_defaults.n_shared_nodes;
  int gen_t = syn_defaults.t_samples;
  double gen_sigma = syn_defaults.noise_sigma;
  double gen_wlow = syn_defaults.weight_low;
  double gen_whigh = syn_defaults.weight_high;
  double gen_alpha = syn_defaults.alpha;
  std::uint64_t gen_seed = 0;
  bool gen_plate = false;
  double gen_pi = 0.5;
  std::string gen_out = "out";
  generate->add_option("--components", gen_true_components, "Number of planted components");
  generate->add_option("--nodes-per-component", gen_nodes, "Nodes per component subgraph");
  generate->add_option("--shared-nodes", gen_shared, "Nodes shared between consecutive components");
  generate->add_option("--t-samples", gen_t, "Number of time points");
  generate->add_option("--noise-sigma", gen_sigma, "Observation noise sigma");
  generate->add_option("--weight-low", gen_wlow, "Lower edge-weight bound");
  generate->add_option("--weight-high", gen_whigh, "Upper edge-weight bound");
  generate->add_option("--generative-alpha", gen_alpha, "Laplacian regularization of the priors");
  generate->add_option("--seed", gen_seed, "Master seed");
  generate->add_flag("--plate", gen_plate, "Sample the full hierarchical model");
  generate->add_option("--pi-lambda", gen_pi, "Mixture weight of the lambda prior (plate mode)");
  generate->add_option("--out", gen_out, "Output directory");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit graph-constrained components");
  SolverConfig solver_defaults;
  json fit_params;
  add_solver_params(fit_params, solver_defaults);
  fit_params["seed"] = 0;
  fit_params["timeseries"] = "";
  fit_params["adjacency"] = "";
  fit_params["adjacency_format"] = "auto";
  fit_params["warm_start_path"] = "";
  fit_params["trace"] = false;
  fit_params["out"] = "out";
  std::string fit_timeseries, fit_adjacency, fit_adjacency_format = "auto";
  std::string fit_out = "out", fit_shrink = "auto", fit_warm = "vanilla_ica", fit_warm_path;
  bool fit_trace = false;
  std::uint64_t fit_seed = 0;
  int fit_components = solver_defaults.n_components;
  int fit_max_outer = solver_defaults.max_outer;
  int fit_inner_max = solver_defaults.inner_max;
  double fit_sparsity = solver_defaults.sparsity_weight;
  double fit_connect = solver_defaults.connect_weight;
  double fit_delta = solver_defaults.trust_radius;
  double fit_alpha = solver_defaults.alpha;
  double fit_inner_tol = solver_defaults.inner_tol;
  double fit_outer_tol = solver_defaults.outer_tol;
  fit_cmd->add_option("--timeseries", fit_timeseries, "T x N observation matrix file")
      ->required();
  fit_cmd->add_option("--adjacency", fit_adjacency, "Adjacency matrix or edge list file")
      ->required();
  fit_cmd->add_option("--adjacency-format", fit_adjacency_format, "auto | dense | edges");
  fit_cmd->add_option("--components", fit_components, "Number of components K");
  fit_cmd->add_option("--sparsity-weight", fit_sparsity, "l1 weight s");
  fit_cmd->add_option("--connect-weight", fit_connect, "Laplacian penalty weight rho");
  fit_cmd->add_option("--trust-radius", fit_delta, "Linearization trust radius delta");
  fit_cmd->add_option("--alpha", fit_alpha, "Laplacian regularization alpha");
  fit_cmd->add_option("--max-outer", fit_max_outer, "Outer iteration cap");
  fit_cmd->add_option("--inner-max", fit_inner_max, "Inner iteration cap");
  fit_cmd->add_option("--inner-tol", fit_inner_tol, "Inner relative tolerance");
  fit_cmd->add_option("--outer-tol", fit_outer_tol, "Outer relative tolerance");
  fit_cmd->add_option("--shrink", fit_shrink, "Correlation shrinkage in [0,1] or 'auto'");
  fit_cmd->add_option("--seed", fit_seed, "Seed for the warm start");
  fit_cmd->add_option("--warm-start", fit_warm, "vanilla_ica | random | provided");
  fit_cmd->add_option("--warm-start-path", fit_warm_path, "Loadings file for warm_start=provided");
  fit_cmd->add_flag("--trace", fit_trace, "Write per-iteration loss trace");
  fit_cmd->add_option("--out", fit_out, "Output directory");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Score recovered against truth");
  std::string met_recovered, met_truth, met_adjacency, met_adjacency_format = "auto";
  std::string met_out = "out";
  metrics_cmd->add_option("--recovered", met_recovered, "Recovered loadings file")->required();
  metrics_cmd->add_option("--truth", met_truth, "Ground-truth loadings file")->required();
  metrics_cmd->add_option("--adjacency", met_adjacency, "Adjacency file")->required();
  metrics_cmd->add_option("--adjacency-format", met_adjacency_format, "auto | dense | edges");
  metrics_cmd->add_option("--out", met_out, "Output directory");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Noise sweep over seeded trials");
  std::string sweep_sigmas = "0,0.01,0.1,0.5,1";
  std::string sweep_solvers = "constrained,vanilla_ica";
  std::string sweep_out = "out";
  int sweep_trials = 10;
  int sweep_threads = 1;
  std::uint64_t sweep_seed = 0;
  int sw_true_components = syn_defaults.n_components;
  int sw_nodes = syn_defaults.nodes_per_component;
  int sw_shared = syn_defaults.n_shared_nodes;
  int sw_t = syn_defaults.t_samples;
  double sw_wlow = syn_defaults.weight_low;
  double sw_whigh = syn_defaults.weight_high;
  double sw_gen_alpha = syn_defaults.alpha;
  int sw_components = solver_defaults.n_components;
  double sw_sparsity = solver_defaults.sparsity_weight;
  double sw_connect = solver_defaults.connect_weight;
  double sw_delta = solver_defaults.trust_radius;
  double sw_alpha = solver_defaults.alpha;
  int sw_max_outer = solver_defaults.max_outer;
  int sw_inner_max = solver_defaults.inner_max;
  double sw_inner_tol = solver_defaults.inner_tol;
  double sw_outer_tol = solver_defaults.outer_tol;
  std::string sw_shrink = "auto";
  std::string sw_warm = "vanilla_ica";
  sweep_cmd->add_option("--sigmas", sweep_sigmas, "Comma-separated noise levels");
  sweep_cmd->add_option("--trials", sweep_trials, "Trials per noise level");
  sweep_cmd->add_option("--solvers", sweep_solvers, "Comma-separated: constrained,vanilla_ica");
  sweep_cmd->add_option("--true-components", sw_true_components, "Planted components");
  sweep_cmd->add_option("--nodes-per-component", sw_nodes, "Nodes per component subgraph");
  sweep_cmd->add_option("--shared-nodes", sw_shared, "Shared nodes between components");
  sweep_cmd->add_option("--t-samples", sw_t, "Time points per trial");
  sweep_cmd->add_option("--weight-low", sw_wlow, "Lower edge-weight bound");
  sweep_cmd->add_option("--weight-high", sw_whigh, "Upper edge-weight bound");
  sweep_cmd->add_option("--generative-alpha", sw_gen_alpha, "Generative Laplacian alpha");
  sweep_cmd->add_option("--components", sw_components, "Solver components K");
  sweep_cmd->add_option("--sparsity-weight", sw_sparsity, "l1 weight s");
  sweep_cmd->add_option("--connect-weight", sw_connect, "Laplacian penalty weight rho");
  sweep_cmd->add_option("--trust-radius", sw_delta, "Trust radius delta");
  sweep_cmd->add_option("--alpha", sw_alpha, "Solver Laplacian alpha");
  sweep_cmd->add_option("--max-outer", sw_max_outer, "Outer iteration cap");
  sweep_cmd->add_option("--inner-max", sw_inner_max, "Inner iteration cap");
  sweep_cmd->add_option("--inner-tol", sw_inner_tol, "Inner tolerance");
  sweep_cmd->add_option("--outer-tol", sw_outer_tol, "Outer tolerance");
  sweep_cmd->add_option("--shrink", sw_shrink, "Shrinkage in [0,1] or 'auto'");
  sweep_cmd->add_option("--warm-start", sw_warm, "vanilla_ica | random");
  sweep_cmd->add_option("--seed", sweep_seed, "Master seed");
  sweep_cmd->add_option("--threads", sweep_threads, "Parallel trial workers");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");

  // robustness
  auto* robust_cmd = app.add_subcommand("robustness", "Cross-fit component statistics");
  std::string rob_fits, rob_labels, rob_out = "out";
  int rob_kmax = 10, rob_nperm = 1000, rob_top = 5, rob_threads = 1;
  double rob_eta_start = 0.45, rob_eta_stop = 0.95, rob_eta_step = 0.05, rob_cluster_eta = 0.8;
  std::uint64_t rob_seed = 0;
  robust_cmd->add_option("--fits", rob_fits, "Directory holding fit outputs")->required();
  robust_cmd->add_option("--labels", rob_labels, "JSON mapping files to subject/scan")->required();
  robust_cmd->add_option("--k-max", rob_kmax, "Largest neighbor count k");
  robust_cmd->add_option("--n-perm", rob_nperm, "Permutation replicates");
  robust_cmd->add_option("--eta-start", rob_eta_start, "Threshold grid start");
  robust_cmd->add_option("--eta-stop", rob_eta_stop, "Threshold grid stop");
  robust_cmd->add_option("--eta-step", rob_eta_step, "Threshold grid step");
  robust_cmd->add_option("--cluster-eta", rob_cluster_eta, "Threshold for cluster means");
  robust_cmd->add_option("--top-means", rob_top, "Cluster means to write");
  robust_cmd->add_option("--seed", rob_seed, "Permutation seed");
  robust_cmd->add_option("--threads", rob_threads, "Permutation workers");
  robust_cmd->add_option("--out", rob_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) {
      gen["true_components"] = gen_true_components;
      gen["nodes_per_component"] = gen_nodes;
      gen["shared_nodes"] = gen_shared;
      gen["t_samples"] = gen_t;
      gen["noise_sigma"] = gen_sigma;
      gen["weight_low"] = gen_wlow;
      gen["weight_high"] = gen_whigh;
      gen["generative_alpha"] = gen_alpha;
      gen["seed"] = gen_seed;
      gen["plate"] = gen_plate;
      gen["pi_lambda"] = gen_pi;
      gen["out"] = gen_out;
      apply_config_overrides(gen, config_path);
      return run_generate(gen);
    }
    if (fit_cmd->parsed()) {
      fit_params["timeseries"] = fit_timeseries;
      fit_params["adjacency"] = fit_adjacency;
      fit_params["adjacency_format"] = fit_adjacency_format;
      fit_params["components"] = fit_components;
      fit_params["sparsity_weight"] = fit_sparsity;
      fit_params["connect_weight"] = fit_connect;
      fit_params["trust_radius"] = fit_delta;
      fit_params["alpha"] = fit_alpha;
      fit_params["max_outer"] = fit_max_outer;
      fit_params["inner_max"] = fit_inner_max;
      fit_params["inner_tol"] = fit_inner_tol;
      fit_params["outer_tol"] = fit_outer_tol;
      fit_params["shrink"] = fit_shrink;
      fit_params["seed"] = fit_seed;
      fit_params["warm_start"] = fit_warm;
      fit_params["warm_start_path"] = fit_warm_path;
      fit_params["trace"] = fit_trace;
      fit_params["out"] = fit_out;
      apply_config_overrides(fit_params, config_path);
      return run_fit(fit_params);
    }
    if (metrics_cmd->parsed()) {
      json params;
      params["recovered"] = met_recovered;
      params["truth"] = met_truth;
      params["adjacency"] = met_adjacency;
      params["adjacency_format"] = met_adjacency_format;
      params["out"] = met_out;
      apply_config_overrides(params, config_path);
      return run_metrics(params);
    }
    if (sweep_cmd->parsed()) {
      json params;
      params["sigmas"] = sweep_sigmas;
      params["trials"] = sweep_trials;
      params["solvers"] = sweep_solvers;
      params["true_components"] = sw_true_components;
      params["nodes_per_component"] = sw_nodes;
      params["shared_nodes"] = sw_shared;
      params["t_samples"] = sw_t;
      params["noise_sigma"] = 0.0;  // overridden per cell
      params["weight_low"] = sw_wlow;
      params["weight_high"] = sw_whigh;
      params["generative_alpha"] = sw_gen_alpha;
      params["components"] = sw_components;
      params["sparsity_weight"] = sw_sparsity;
      params["connect_weight"] = sw_connect;
      params["trust_radius"] = sw_delta;
      params["alpha"] = sw_alpha;
      params["max_outer"] = sw_max_outer;
      params["inner_max"] = sw_inner_max;
      params["inner_tol"] = sw_inner_tol;
      params["outer_tol"] = sw_outer_tol;
      params["shrink"] = sw_shrink;
      params["warm_start"] = sw_warm;
      params["seed"] = sweep_seed;
      params["threads"] = sweep_threads;
      params["out"] = sweep_out;
      apply_config_overrides(params, config_path);
      return run_sweep(params);
    }
    if (robust_cmd->parsed()) {
      json params;
      params["fits"] = rob_fits;
      params["labels"] = rob_labels;
      params["k_max"] = rob_kmax;
      params["n_perm"] = rob_nperm;
      params["eta_start"] = rob_eta_start;
      params["eta_stop"] = rob_eta_stop;
      params["eta_step"] = rob_eta_step;
      params["cluster_eta"] = rob_cluster_eta;
      params["top_means"] = rob_top;
      params["seed"] = rob_seed;
      params["threads"] = rob_threads;
      params["out"] = rob_out;
      apply_config_overrides(params, config_path);
      return run_robustness(params);
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

}  // namespace gcica::cli
