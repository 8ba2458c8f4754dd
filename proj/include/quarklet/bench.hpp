#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "quarklet/haar.hpp"
#include "quarklet/solver.hpp"

namespace quarklet {

struct TestFunction {
  enum class Kind { singularity, reflected, boundary_layer, spike };

  Kind kind = Kind::singularity;
  double alpha = 0.75;  // singularity, reflected
  double a = 5.0;       // boundary_layer

  /// Throws std::invalid_argument for unknown names or alpha <= 1/2.
  static TestFunction parse(const std::string &name);
  std::string name() const;
  double operator()(double x) const;
  TargetFunction target() const;
};

/// Throws std::invalid_argument unless 0 <= x <= 1.
double test_function_eval(const TestFunction &tf, double x);

struct ExperimentConfig {
  TestFunction function;
  int j_max = 10;
  int p_max = 5;
  int N_max = 50;
  WeightRule weights{};
  /// Starts from the full polynomial space on the root.
  SolverConfig solver = hp_seed_solver();

  static SolverConfig hp_seed_solver() {
    SolverConfig config;
    config.initial_level = 0;
    config.initial_degree = 30;
    return config;
  }
};

struct ExperimentRecord {
  int N = 0;
  std::int64_t dofs = 0;
  double l2_error = 0.0;
  double estimator = 0.0;
  double q_N = 0.0;
  bool cardinality_ok = true;
  int max_degree = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  SolveReport solve;
  /// Set when the coefficient solver did not reach its tolerance.
  bool solver_warning = false;
};

/// Coefficients, error oracle, one record per N = 0..N_max (fewer if the run stops).
ExperimentResult run_experiment(const ExperimentConfig &config);
/// Same with precomputed coefficients.
ExperimentResult run_experiment(const ExperimentConfig &config, const CoefficientSequence &c);

struct RateFit {
  enum class Model { exponential, algebraic };

  Model model = Model::exponential;
  double beta = 0.0;   // error ~ C exp(-beta n^gamma)
  double gamma = 0.0;
  double s = 0.0;      // error ~ C n^{-s}
  double log_constant = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Linearized least squares; the exponential model picks the best gamma on
/// {0.1, 0.2, ..., 1.0}. Needs at least 8 points with n > 0 and error > 0,
/// and nonconstant data; throws std::invalid_argument otherwise.
RateFit fit_exponential(const std::vector<double> &n, const std::vector<double> &error);
RateFit fit_algebraic(const std::vector<double> &n, const std::vector<double> &error);
/// Fits l2_error against dofs over records with N >= 1.
RateFit fit_rate(const std::vector<ExperimentRecord> &records, RateFit::Model model);

/// "N,dofs,l2_error,estimator,qN".
void write_experiment_csv(std::ostream &out, const std::vector<ExperimentRecord> &records);

}  // namespace quarklet
