#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cli.hpp"
#include "gcica/common.hpp"
#include "gcica/io.hpp"
#include "test_util.hpp"

using namespace gcica;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gcica_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"gcica"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("matrix round trip is bit identical") {
  TempDir dir;
  std::mt19937_64 rng(1);
  Matrix m = testutil::random_matrix(7, 5, -10.0, 10.0, rng);
  m(0, 0) = 1.0 / 3.0;
  m(1, 1) = 1e-17;
  m(2, 2) = -12345.678901234567;
  save_matrix(m, dir.file("m.txt"));
  const Matrix back = load_matrix(dir.file("m.txt"));
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix parser errors and comments") {
  TempDir dir;
  write_file(dir.file("ragged.txt"), "1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(load_matrix(dir.file("ragged.txt")), doctest::Contains(":2"),
                       ValidationError);

  write_file(dir.file("bad.txt"), "1,2\n3,hello\n");
  CHECK_THROWS_WITH_AS(load_matrix(dir.file("bad.txt")), doctest::Contains("field 2"),
                       ValidationError);

  write_file(dir.file("commented.txt"), "# header line\n1,2\n# middle\n3,4\n");
  const Matrix m = load_matrix(dir.file("commented.txt"));
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 4.0);

  CHECK_THROWS_AS(load_matrix(dir.file("missing.txt")), ValidationError);
  write_file(dir.file("empty.txt"), "# nothing\n");
  CHECK_THROWS_AS(load_matrix(dir.file("empty.txt")), ValidationError);
}

TEST_CASE("graph loading handles dense and edge-list inputs") {
  TempDir dir;
  write_file(dir.file("dense.txt"), "0,1,0\n1,0,0.5\n0,0.5,0\n");
  const Graph dense = load_graph(dir.file("dense.txt"));
  CHECK(dense.n_nodes() == 3);
  CHECK(dense.weights()(1, 2) == 0.5);

  write_file(dir.file("edges.txt"), "# i,j,w\n0,1,1\n1,2,1\n2,3,1\n3,4,0.25\n");
  const Graph edges = load_graph(dir.file("edges.txt"));
  CHECK(edges.n_nodes() == 5);
  CHECK(edges.weights()(3, 4) == 0.25);
  CHECK(edges.weights()(4, 3) == 0.25);

  // A square 3-column file reads as dense unless told otherwise.
  write_file(dir.file("three.txt"), "0,1,0\n1,0,0\n0,0,0\n");
  CHECK(load_graph(dir.file("three.txt")).n_nodes() == 3);
  CHECK(load_graph(dir.file("three.txt"), AdjacencyFormat::kEdgeList).n_nodes() == 2);

  write_file(dir.file("frac.txt"), "0,1.5,1\n1,2,1\n2,0,1\n3,1,1\n");
  CHECK_THROWS_AS(load_graph(dir.file("frac.txt"), AdjacencyFormat::kEdgeList), ValidationError);
}

TEST_CASE("fit outputs are atomic, complete and reproducible") {
  TempDir dir;
  FitResult result;
  result.loadings = Matrix::Constant(2, 3, 0.25);
  result.gamma = Vector::Constant(3, 0.5);
  result.final_loss = 1.25;
  result.outer_iters = 7;
  result.converged = true;
  result.loss_trace = {3.0, 2.0, 1.25};
  result.shrink_used = 0.01;

  nlohmann::json config;
  config["components"] = 2;

  const std::string out = dir.file("missing/nested/run");
  const auto manifest = cli::write_fit_outputs(result, config, out, true, "2026-01-01T00:00:00Z");
  CHECK(fs::exists(out + "/loadings.txt"));
  CHECK(fs::exists(out + "/gamma.txt"));
  CHECK(fs::exists(out + "/trace.txt"));
  CHECK(fs::exists(out + "/fit.json"));

  // The manifest lists every emitted file.
  std::vector<std::string> files = manifest.at("files");
  for (const std::string& f : files) CHECK(fs::exists(out + "/" + f));
  CHECK(files.size() == 3);

  // Saving the identical result again produces identical bytes.
  const std::string before = read_file(out + "/fit.json");
  cli::write_fit_outputs(result, config, out, true, "2026-01-01T00:00:00Z");
  CHECK(read_file(out + "/fit.json") == before);
}

TEST_CASE("cli rejects unknown flags with usage") {
  CHECK(run_cli({"fit", "--no-such-flag"}) == 1);
  CHECK(run_cli({"definitely-not-a-command"}) == 1);
  CHECK(run_cli({}) == 1);
}

TEST_CASE("generate then fit then metrics round trip") {
  TempDir dir;
  const std::string gen = dir.file("gen");
  const std::string fit_out = dir.file("fit");
  const std::string met = dir.file("met");

  CHECK(run_cli({"generate", "--components", "2", "--nodes-per-component", "5", "--t-samples",
                 "200", "--noise-sigma", "0.01", "--seed", "7", "--out", gen}) == 0);
  CHECK(fs::exists(gen + "/adjacency.txt"));
  CHECK(fs::exists(gen + "/true_components.txt"));
  CHECK(fs::exists(gen + "/observations.txt"));
  CHECK(fs::exists(gen + "/manifest.json"));

  CHECK(run_cli({"fit", "--timeseries", gen + "/observations.txt", "--adjacency",
                 gen + "/adjacency.txt", "--components", "4", "--max-outer", "30", "--inner-max",
                 "120", "--seed", "3", "--trace", "--out", fit_out}) == 0);
  CHECK(fs::exists(fit_out + "/loadings.txt"));
  CHECK(fs::exists(fit_out + "/gamma.txt"));
  CHECK(fs::exists(fit_out + "/trace.txt"));

  CHECK(run_cli({"metrics", "--recovered", fit_out + "/loadings.txt", "--truth",
                 gen + "/true_components.txt", "--adjacency", gen + "/adjacency.txt", "--out",
                 met}) == 0);
  CHECK(fs::exists(met + "/metrics.json"));

  nlohmann::json report;
  std::ifstream in(met + "/metrics.json");
  in >> report;
  CHECK(report.at("n_recovered").get<int>() >= 0);
  CHECK(report.at("mean_top5").get<double>() >= 0.0);
  CHECK(report.at("mean_top5").get<double>() <= 1.0);
}

TEST_CASE("config file overrides flags") {
  TempDir dir;
  const std::string gen = dir.file("gen");
  write_file(dir.file("config.json"), R"({"t_samples": 150, "seed": 9})");

  CHECK(run_cli({"generate", "--components", "2", "--nodes-per-component", "4", "--t-samples",
                 "99", "--seed", "1", "--config", dir.file("config.json"), "--out", gen}) == 0);
  const Matrix y = load_matrix(gen + "/observations.txt");
  CHECK(y.rows() == 150);

  nlohmann::json manifest;
  std::ifstream in(gen + "/manifest.json");
  in >> manifest;
  CHECK(manifest.at("config").at("seed").get<int>() == 9);

  write_file(dir.file("bad.json"), R"({"no_such_key": 1})");
  CHECK(run_cli({"generate", "--config", dir.file("bad.json"), "--out", gen}) == 1);
}

TEST_CASE("plate generation writes the mask and lambda") {
  TempDir dir;
  const std::string gen = dir.file("plate");
  CHECK(run_cli({"generate", "--plate", "--components", "3", "--nodes-per-component", "5",
                 "--t-samples", "100", "--seed", "2", "--out", gen}) == 0);
  CHECK(fs::exists(gen + "/mask.txt"));
  nlohmann::json manifest;
  std::ifstream in(gen + "/manifest.json");
  in >> manifest;
  REQUIRE(manifest.contains("lambda"));
  const std::vector<double> lambda = manifest.at("lambda");
  CHECK(lambda.size() == 3);
  CHECK(std::is_sorted(lambda.begin(), lambda.end()));
}

TEST_SUITE_END();
