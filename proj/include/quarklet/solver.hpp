#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "quarklet/error_engine.hpp"
#include "quarklet/haar.hpp"
#include "quarklet/index.hpp"

namespace quarklet {

struct SolverConfig {
  /// Damping; unset means 1 / lambda_max(G) from power iteration.
  std::optional<double> omega;
  /// Target for ||Gc - b||_2 over the full truncated index set.
  double tol = 1e-6;
  /// Iteration cap for one Richardson phase.
  int max_iterations = 5000;
  /// Indices added per outer round, before closure.
  int batch = 10;
  /// Initial active set: every index with j <= initial_level and
  /// p <= initial_degree, generator slots included.
  int initial_level = 2;
  int initial_degree = 0;
  int max_rounds = 100000;
  int power_iterations = 50;
  std::uint64_t seed = 20240601;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from a
/// seeded random start. Returns 0 for the zero matrix.
double estimate_largest_eigenvalue(const Eigen::SparseMatrix<double> &G, int iterations, std::uint64_t seed);

/// ||Gc - b||_2. Throws std::invalid_argument on a dimension mismatch.
double residual_norm(const Eigen::SparseMatrix<double> &G, const Eigen::VectorXd &c, const Eigen::VectorXd &b);

struct RichardsonResult {
  Eigen::VectorXd c;
  double omega = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Residual never increased between consecutive iterates.
  bool monotone = true;
  std::vector<double> residuals;  // residuals[0] is the start residual
};

/// c <- c + omega (b - Gc) from `start` (zero if empty) until the residual is
/// at most `tol` or max_iterations is reached.
/// Throws std::invalid_argument if omega is outside (0, 2 / lambda_max).
RichardsonResult richardson(const Eigen::SparseMatrix<double> &G, const Eigen::VectorXd &b, const SolverConfig &config,
                            const Eigen::VectorXd &start = {});
RichardsonResult richardson(const Eigen::SparseMatrix<double> &G, const Eigen::VectorXd &b, const SolverConfig &config,
                            double tol, const Eigen::VectorXd &start);

struct SolveRound {
  int round = 0;
  std::size_t active_size = 0;
  double residual = 0.0;  // full residual after this round's solve
  int iterations = 0;
  bool monotone = true;
};

struct SolveReport {
  /// Final coefficients (unweighted frame coordinates), zero entries omitted.
  CoefficientSequence coefficients;
  /// Active indices in the order of the truncated index set.
  std::vector<QuarkletIndex> active;
  std::vector<SolveRound> rounds;
  bool converged = false;
  /// Every Richardson phase had a nonincreasing residual.
  bool monotone = true;

  double final_residual() const { return rounds.empty() ? 0.0 : rounds.back().residual; }
};

/// Adds ancestors (p = 0), siblings and lower degrees at the same node so the
/// set describes a complete tree with degree-complete nodes; generator slots
/// and root slots are kept in step.
std::vector<QuarkletIndex> tree_closure(const std::vector<QuarkletIndex> &indices);

/// Growth loop over the truncated index set for (j_max, p_max).
SolveReport adaptive_coefficients(const TargetFunction &f, int j_max, int p_max, const SolverConfig &config = {},
                                  const WeightRule &rule = WeightRule{});
/// Same loop on an assembled system.
SolveReport adaptive_coefficients(const GramianSystem &system, const SolverConfig &config = {});

/// "round,active_size,residual".
void write_solver_log_csv(std::ostream &out, const SolveReport &report);

}  // namespace quarklet
