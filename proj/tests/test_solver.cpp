#include <doctest.h>

#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "quarklet/solver.hpp"
#include "support.hpp"

using namespace quarklet;
using support::close;

namespace {

Eigen::SparseMatrix<double> sparse(const Eigen::MatrixXd &dense) { return dense.sparseView(0.0, 0.0); }

Eigen::MatrixXd random_psd(std::mt19937_64 &rng, int n, int rank) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd B(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) B(i, j) = normal(rng);
  return B * B.transpose();
}

Eigen::VectorXd random_vector(std::mt19937_64 &rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("richardson on a 1x1 system") {
  SolverConfig config;
  config.omega = 1.0;
  config.tol = 1e-14;
  const RichardsonResult result = richardson(sparse(Eigen::MatrixXd::Identity(1, 1)), Eigen::VectorXd::Constant(1, 0.5), config);
  CHECK(result.iterations == 1);
  CHECK(result.c[0] == 0.5);
  CHECK(result.converged);
}

TEST_CASE("richardson with zero load") {
  std::mt19937_64 rng(51);
  const RichardsonResult result = richardson(sparse(random_psd(rng, 4, 4)), Eigen::VectorXd::Zero(4), SolverConfig{});
  CHECK(result.c == Eigen::VectorXd::Zero(4));
  CHECK(result.converged);
  CHECK(result.iterations == 0);
}

TEST_CASE("richardson residuals follow the iteration matrix") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd G = random_psd(rng, 5, 5);
    const Eigen::VectorXd b = random_vector(rng, 5);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    SolverConfig config;
    config.omega = 1.0 / eig.eigenvalues().maxCoeff();
    config.tol = 0.0;
    config.max_iterations = 25;
    const RichardsonResult result = richardson(sparse(G), b, config);
    REQUIRE(result.residuals.size() == 26);
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(5, 5) - *config.omega * G;
    Eigen::VectorXd r = b;
    for (int k = 0; k <= 25; ++k) {
      CHECK(std::abs(result.residuals[k] - r.norm()) <= 1e-10 * std::max(1.0, b.norm()));
      r = M * r;
    }
    CHECK(result.monotone);
  }
}

TEST_CASE("richardson rejects a bad damping") {
  const auto I = sparse(Eigen::MatrixXd::Identity(3, 3));
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
  for (double omega : {0.0, -1.0, 2.0, 2.5}) {
    SolverConfig config;
    config.omega = omega;
    CHECK_THROWS_AS(richardson(I, b, config), std::invalid_argument);
  }
  SolverConfig config;
  config.omega = 1.9;
  CHECK_NOTHROW(richardson(I, b, config));
  CHECK_THROWS_AS(richardson(sparse(Eigen::MatrixXd::Zero(2, 2)), Eigen::VectorXd::Ones(2), SolverConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(richardson(I, Eigen::VectorXd::Ones(2), SolverConfig{}), std::invalid_argument);
}

TEST_CASE("richardson reports non-convergence") {
  std::mt19937_64 rng(55);
  SolverConfig config;
  config.max_iterations = 3;
  config.tol = 1e-14;
  const RichardsonResult result = richardson(sparse(random_psd(rng, 6, 6)), random_vector(rng, 6), config);
  CHECK_FALSE(result.converged);
  CHECK(result.iterations == 3);
}

TEST_CASE("residual_norm") {
  const auto I = sparse(Eigen::MatrixXd::Identity(2, 2));
  CHECK(residual_norm(I, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0)) == 1.0);
  CHECK(residual_norm(I, Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 4)) == 0.0);
  CHECK(residual_norm(I, Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)) == 5.0);
  CHECK_THROWS_AS(residual_norm(I, Eigen::Vector3d(0, 0, 0), Eigen::Vector2d(3, 4)), std::invalid_argument);
}

TEST_CASE("kernel directions do not change the residual") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd G = random_psd(rng, 6, 3);
    const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(G).kernel();
    REQUIRE(kernel.cols() == 3);
    const Eigen::VectorXd b = G * random_vector(rng, 6);
    const Eigen::VectorXd c = random_vector(rng, 6);
    for (int k = 0; k < kernel.cols(); ++k)
      CHECK(std::abs(residual_norm(sparse(G), c + 10.0 * kernel.col(k), b) - residual_norm(sparse(G), c, b)) <= 1e-9);

    SolverConfig config;
    config.tol = 1e-10;
    const Eigen::VectorXd start = 3.0 * kernel.col(0);
    const RichardsonResult result = richardson(sparse(G), b, config, start);
    CHECK(result.converged);
    CHECK(std::abs(kernel.col(0).dot(result.c - start)) <= 1e-8);
  }

  const WeightRule rule{};
  const Eigen::MatrixXd twice(assemble_gramian({{1, 0, 0}, {1, 0, 0}}, rule));
  const Eigen::Vector2d null(1.0, -1.0);
  CHECK((twice * null).norm() == 0.0);
}

TEST_CASE("tree_closure") {
  CHECK(tree_closure({{0, 0, 0}}) == std::vector<QuarkletIndex>{{0, -1, 0}, {0, 0, 0}});
  CHECK(tree_closure({{2, 2, 1}}) == std::vector<QuarkletIndex>{{0, -1, 0}, {0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 2, 0},
                                                                {0, 2, 1}, {1, 2, 1}, {2, 2, 1}});
  CHECK(tree_closure({{1, -1, 0}}) == std::vector<QuarkletIndex>{{0, -1, 0}, {1, -1, 0}, {0, 0, 0}, {1, 0, 0}});

  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<QuarkletIndex> seed;
    for (int i = 0; i < 1 + trial % 6; ++i) {
      const int j = static_cast<int>(rng() % 6) - 1;
      const std::int64_t k = j < 0 ? 0 : static_cast<std::int64_t>(rng() % (std::uint64_t{1} << j));
      seed.push_back({static_cast<int>(rng() % 4), j, k});
    }
    const auto closed = tree_closure(seed);
    CHECK(tree_closure(closed) == closed);
    std::set<WaveletIndex> nodes;
    for (const auto &index : closed) nodes.insert(index.node());
    CHECK(WaveletTree::is_complete_tree(nodes));
    for (const auto &index : closed) {
      if (index.j < 0) continue;
      if (index.node().is_root())
        CHECK(std::find(closed.begin(), closed.end(), QuarkletIndex{index.p, -1, 0}) != closed.end());
      for (int q = 0; q < index.p; ++q)
        CHECK(std::find(closed.begin(), closed.end(), QuarkletIndex{q, index.j, index.k}) != closed.end());
    }
    for (const auto &index : seed) CHECK(std::find(closed.begin(), closed.end(), index) != closed.end());
  }
}

TEST_CASE("adaptive_coefficients for a single quarklet") {
  TargetFunction psi;
  psi.eval = [](double x) { return quarklet_eval(0, 0, 0, x); };
  psi.singular_points = {0.5};
  SolverConfig config;
  config.initial_level = 0;
  config.initial_degree = 0;
  const SolveReport report = adaptive_coefficients(psi, 4, 2, config);
  CHECK(report.converged);
  CHECK(report.rounds.size() == 1);
  CHECK(report.coefficients.size() == 1);
  CHECK(close(report.coefficients.get({0, 0, 0}), 1.0, 1e-12));
}

TEST_CASE("adaptive_coefficients for the zero function") {
  TargetFunction zero;
  zero.eval = [](double) { return 0.0; };
  const SolveReport report = adaptive_coefficients(zero, 4, 2);
  CHECK(report.converged);
  CHECK(report.coefficients.empty());
  CHECK(report.rounds.size() == 1);
  CHECK(report.final_residual() == 0.0);
}

TEST_CASE("adaptive_coefficients invariants on a small system") {
  const GramianSystem system = assemble_system(power_target(0.75), truncated_index_set(5, 3), WeightRule{});
  SolverConfig config;
  config.tol = 1e-5;
  const SolveReport report = adaptive_coefficients(system, config);
  CHECK(report.monotone);
  CHECK(tree_closure(report.active) == report.active);
  for (const auto &[index, value] : report.coefficients.values())
    CHECK(std::find(report.active.begin(), report.active.end(), index) != report.active.end());
  for (std::size_t i = 1; i < report.rounds.size(); ++i)
    CHECK(report.rounds[i].active_size > report.rounds[i - 1].active_size);
  if (!report.converged) CHECK(report.final_residual() > config.tol);

  std::ostringstream log;
  write_solver_log_csv(log, report);
  CHECK(log.str().rfind("round,active_size,residual\n1,", 0) == 0);
}

TEST_CASE("adaptive_coefficients reproduces x^(3/4)") {
  const TargetFunction f = power_target(0.75);
  const SolveReport report = adaptive_coefficients(f, 10, 5);
  MESSAGE("rounds " << report.rounds.size() << ", active " << report.active.size() << ", residual "
                    << report.final_residual() << ", converged " << report.converged);
  CHECK(report.monotone);
  CHECK(l2_error(f, report.coefficients, WeightRule{}) <= 1e-3);
}
