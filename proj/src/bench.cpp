#include "quarklet/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "quarklet/nearbest.hpp"

namespace quarklet {

TestFunction TestFunction::parse(const std::string &name) {
  TestFunction tf;
  if (name == "singularity")
    tf.kind = Kind::singularity;
  else if (name == "reflected")
    tf.kind = Kind::reflected;
  else if (name == "boundary_layer")
    tf.kind = Kind::boundary_layer;
  else if (name == "spike")
    tf.kind = Kind::spike;
  else
    throw std::invalid_argument("unknown test function '" + name + "'");
  return tf;
}

std::string TestFunction::name() const {
  switch (kind) {
    case Kind::singularity: return "singularity";
    case Kind::reflected: return "reflected";
    case Kind::boundary_layer: return "boundary_layer";
    case Kind::spike: return "spike";
  }
  return "";
}

double TestFunction::operator()(double x) const {
  switch (kind) {
    case Kind::singularity: return x <= 0.0 ? 0.0 : std::pow(x, alpha);
    case Kind::reflected: return x >= 1.0 ? 0.0 : std::pow(1.0 - x, alpha);
    case Kind::boundary_layer: {
      const double scale = std::expm1(a);
      const double u = std::expm1(a * x) / scale;
      const double v = (scale - std::expm1(a * x)) / scale;
      return 4.0 * u * v;
    }
    case Kind::spike: {
      const double d = x - 1.0 / 3.0;
      return x * (1.0 - x) / (1.0 + 1e4 * d * d);
    }
  }
  return 0.0;
}

TargetFunction TestFunction::target() const {
  if ((kind == Kind::singularity || kind == Kind::reflected) && !(alpha > 0.5))
    throw std::invalid_argument("TestFunction: alpha must exceed 1/2");
  if (kind == Kind::singularity) return power_target(alpha);
  if (kind == Kind::reflected) return reflected_power_target(alpha);
  TargetFunction f;
  const TestFunction copy = *this;
  f.eval = [copy](double x) { return copy(x); };
  return f;
}

double test_function_eval(const TestFunction &tf, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("test_function_eval: x outside [0,1]");
  return tf(x);
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
  const SolveReport solve =
      adaptive_coefficients(config.function.target(), config.j_max, config.p_max, config.solver, config.weights);
  ExperimentResult result = run_experiment(config, solve.coefficients);
  result.solve = solve;
  result.solver_warning = !solve.converged;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig &config, const CoefficientSequence &c) {
  if (config.N_max < 0) throw std::invalid_argument("run_experiment: negative N_max");
  const TargetFunction target = config.function.target();
  const CoefficientErrorOracle oracle(c);
  RunConfig run_config;
  run_config.j_max = config.j_max;
  if (config.j_max < 62 && config.N_max > (std::int64_t{1} << config.j_max) - 1)
    throw std::out_of_range("run_experiment: N_max exceeds the refinements available below j_max");
  NearBestTree run(oracle, run_config);

  ExperimentResult result;
  for (int N = 0; N <= config.N_max; ++N) {
    if (N > 0 && !run.step()) break;
    const RunState &state = run.state();
    const QuarkletTree trimmed = trim(state);
    ExperimentRecord record;
    record.N = state.steps;
    record.dofs = quarklet_cardinality(trimmed);
    record.estimator = std::sqrt(trimmed_global_error(state, trimmed));
    record.l2_error = l2_error(target, c.restricted_to(trimmed.active_indices()), config.weights);
    record.q_N = state.threshold();
    record.cardinality_ok = cardinality_check(trimmed, state.steps);
    for (const auto &[node, p] : trimmed.pmax) record.max_degree = std::max(record.max_degree, p);
    result.records.push_back(record);
  }
  return result;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double> &x, const std::vector<double> &y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("rate fit: degenerate data");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = sxy * sxy / (sxx * syy);
  return fit;
}

std::vector<double> checked_logs(const std::vector<double> &n, const std::vector<double> &error) {
  if (n.size() != error.size()) throw std::invalid_argument("rate fit: size mismatch");
  if (n.size() < 8) throw std::invalid_argument("rate fit: need at least 8 points");
  std::vector<double> logs;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(error[i] > 0.0) || !std::isfinite(error[i]))
      throw std::invalid_argument("rate fit: n and error must be positive");
    logs.push_back(std::log(error[i]));
  }
  return logs;
}

}  // namespace

RateFit fit_exponential(const std::vector<double> &n, const std::vector<double> &error) {
  const std::vector<double> logs = checked_logs(n, error);
  RateFit best;
  best.r2 = -1.0;
  for (int step = 1; step <= 10; ++step) {
    const double gamma = step / 10.0;
    std::vector<double> x;
    for (double v : n) x.push_back(std::pow(v, gamma));
    const LineFit line = least_squares(x, logs);
    if (line.r2 > best.r2) {
      best.gamma = gamma;
      best.beta = -line.slope;
      best.log_constant = line.intercept;
      best.r2 = line.r2;
    }
  }
  best.model = RateFit::Model::exponential;
  best.points = n.size();
  return best;
}

RateFit fit_algebraic(const std::vector<double> &n, const std::vector<double> &error) {
  const std::vector<double> logs = checked_logs(n, error);
  std::vector<double> x;
  for (double v : n) x.push_back(std::log(v));
  const LineFit line = least_squares(x, logs);
  RateFit fit;
  fit.model = RateFit::Model::algebraic;
  fit.s = -line.slope;
  fit.log_constant = line.intercept;
  fit.r2 = line.r2;
  fit.points = n.size();
  return fit;
}

RateFit fit_rate(const std::vector<ExperimentRecord> &records, RateFit::Model model) {
  std::vector<double> n, error;
  for (const auto &record : records) {
    if (record.N < 1) continue;
    n.push_back(static_cast<double>(record.dofs));
    error.push_back(record.l2_error);
  }
  return model == RateFit::Model::exponential ? fit_exponential(n, error) : fit_algebraic(n, error);
}

void write_experiment_csv(std::ostream &out, const std::vector<ExperimentRecord> &records) {
  out << "N,dofs,l2_error,estimator,qN\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto &r : records) out << r.N << ',' << r.dofs << ',' << r.l2_error << ',' << r.estimator << ',' << r.q_N << '\n';
}

}  // namespace quarklet
