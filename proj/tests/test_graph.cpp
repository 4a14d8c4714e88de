#include "doctest.h"

#include "gcica/common.hpp"
#include "gcica/graph.hpp"
#include "test_util.hpp"

using namespace gcica;

namespace {

Graph unit_path3() {
  return Graph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("edge list construction symmetrizes") {
  const Graph g = unit_path3();
  CHECK(g.weights()(0, 1) == 1.0);
  CHECK(g.weights()(1, 0) == 1.0);
  CHECK(g.weights()(1, 2) == 1.0);
  CHECK(g.weights()(2, 1) == 1.0);
  CHECK(g.weights()(0, 2) == 0.0);
  CHECK(g.weights()(0, 0) == 0.0);
}

TEST_CASE("construction rejects bad input") {
  Matrix w = Matrix::Zero(2, 2);
  w(0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(Graph::from_dense(w), ValidationError);

  CHECK_THROWS_AS(Graph::from_edges(2, {{0, 1, -0.5}}), ValidationError);
  CHECK_THROWS_AS(Graph::from_edges(2, {{1, 1, 0.3}}), ValidationError);
  CHECK_THROWS_AS(Graph::from_edges(2, {{0, 2, 1.0}}), ValidationError);
  CHECK_THROWS_AS(Graph::from_dense(Matrix::Zero(2, 3)), ValidationError);

  // A zero-weight self loop is allowed (it is no loop at all).
  CHECK_NOTHROW(Graph::from_edges(2, {{1, 1, 0.0}}));
}

TEST_CASE("combinatorial Laplacian of the unit path") {
  const Laplacian l = combinatorial_laplacian(unit_path3());
  Matrix expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((l.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(l.alpha == 0.0);
}

TEST_CASE("Laplacian of a single weighted edge") {
  const Graph g = Graph::from_edges(2, {{0, 1, 0.3}});
  const Laplacian l = combinatorial_laplacian(g);
  Matrix expected(2, 2);
  expected << 0.3, -0.3, -0.3, 0.3;
  CHECK((l.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Laplacian row sums vanish and the matrix is PSD") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testutil::random_graph(2 + trial % 12, 0.4, rng);
    const Laplacian l = combinatorial_laplacian(g);
    CHECK((l.matrix.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(l.matrix, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("regularized Laplacian") {
  const Laplacian l = combinatorial_laplacian(unit_path3());
  const Laplacian la = regularized_laplacian(l, 0.01);
  CHECK(la.matrix(0, 0) == doctest::Approx(1.01));
  CHECK(la.matrix(1, 1) == doctest::Approx(2.01));
  CHECK(la.matrix(2, 2) == doctest::Approx(1.01));
  CHECK(la.alpha == 0.01);

  // Inverse of the construction, up to one rounding of the diagonal.
  Matrix back = la.matrix;
  back.diagonal().array() -= 0.01;
  CHECK((back - l.matrix).cwiseAbs().maxCoeff() < 2e-15);
  CHECK((la.matrix - l.matrix).cwiseAbs().minCoeff() == 0.0);  // off-diagonal untouched

  // Smallest eigenvalue of a connected graph's L_alpha equals alpha.
  Eigen::SelfAdjointEigenSolver<Matrix> es(la.matrix, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(0.01).epsilon(1e-10));

  CHECK_THROWS_AS(regularized_laplacian(l, 0.0), ValidationError);
  CHECK_THROWS_AS(regularized_laplacian(l, -1.0), ValidationError);
  CHECK_THROWS_AS(regularized_laplacian(la, 0.01), ValidationError);
}

TEST_CASE("smoothness penalty matches the edge-sum expansion") {
  const Graph path = unit_path3();
  const Laplacian l = combinatorial_laplacian(path);

  Vector constant = Vector::Constant(3, 2.5);
  CHECK(smoothness_penalty(constant, l) == doctest::Approx(0.0).epsilon(1e-12));

  Vector spike(3);
  spike << 1, 0, 0;
  CHECK(smoothness_penalty(spike, l) == doctest::Approx(1.0));
  CHECK(testutil::edge_sum_penalty(spike, path, 0.0) == doctest::Approx(1.0));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 10;
    const Graph g = testutil::random_graph(n, 0.5, rng);
    const Vector a = testutil::random_vector(n, -2.0, 2.0, rng);
    const Laplacian lg = combinatorial_laplacian(g);
    CHECK(smoothness_penalty(a, lg) ==
          doctest::Approx(testutil::edge_sum_penalty(a, g, 0.0)).epsilon(1e-10));

    const double alpha = 0.05;
    const Laplacian lga = regularized_laplacian(lg, alpha);
    CHECK(smoothness_penalty(a, lga) ==
          doctest::Approx(smoothness_penalty(a, lg) + alpha * a.squaredNorm()).epsilon(1e-10));
  }

  CHECK_THROWS_AS(smoothness_penalty(Vector::Zero(4), l), ValidationError);
}

TEST_CASE("connected components") {
  const Graph two = Graph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  auto comps = connected_components(two);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0] == std::vector<int>{0, 1});
  CHECK(comps[1] == std::vector<int>{2, 3});

  Matrix complete = Matrix::Constant(5, 5, 0.2);
  complete.diagonal().setZero();
  CHECK(connected_components(Graph::from_dense(complete)).size() == 1);

  const Graph isolated = Graph::from_edges(3, {});
  CHECK(connected_components(isolated).size() == 3);
}

TEST_CASE("component count equals the nullity of L") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 19;
    const Graph g = testutil::random_graph(n, 0.15, rng);
    const Laplacian l = combinatorial_laplacian(g);
    Eigen::SelfAdjointEigenSolver<Matrix> es(l.matrix, Eigen::EigenvaluesOnly);
    const int nullity = static_cast<int>((es.eigenvalues().array() < 1e-9).count());
    CHECK(static_cast<int>(connected_components(g).size()) == nullity);
  }
}

TEST_SUITE_END();
