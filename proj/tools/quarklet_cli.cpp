#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "quarklet/bench.hpp"
#include "quarklet/error_engine.hpp"
#include "quarklet/haar.hpp"
#include "quarklet/nearbest.hpp"
#include "quarklet/solver.hpp"

using namespace quarklet;

namespace {

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Near-best adaptive Haar quarklet tree approximation"};
  app.require_subcommand(1);

  // coeffs
  auto *coeffs = app.add_subcommand("coeffs", "Compute frame coefficients of a test function");
  std::string coeffs_function, coeffs_out, coeffs_log;
  int coeffs_jmax = 10, coeffs_pmax = 5, coeffs_level = 2, coeffs_degree = 0;
  double coeffs_tol = 1e-6, coeffs_delta = 1.0;
  coeffs->add_option("--function", coeffs_function, "singularity | reflected | boundary_layer | spike")->required();
  coeffs->add_option("--jmax", coeffs_jmax, "Maximal level")->check(CLI::Range(0, 20));
  coeffs->add_option("--pmax", coeffs_pmax, "Maximal degree")->check(CLI::Range(0, 30));
  coeffs->add_option("--tol", coeffs_tol, "Residual tolerance")->check(CLI::PositiveNumber);
  coeffs->add_option("--delta", coeffs_delta, "Weight exponent, w_p = (p+1)^-delta");
  coeffs->add_option("--out", coeffs_out, "Coefficient CSV")->required();
  coeffs->add_option("--log", coeffs_log, "Solver log CSV");
  coeffs->add_option("--initial-level", coeffs_level, "Initial active set: levels up to this one");
  coeffs->add_option("--initial-degree", coeffs_degree, "Initial active set: degrees up to this one");

  // approximate
  auto *approximate = app.add_subcommand("approximate", "Run the near-best tree algorithm on a coefficient file");
  std::string approx_coeffs, approx_tree, approx_csv;
  int approx_steps = 0, approx_jmax = 30;
  approximate->add_option("--coeffs", approx_coeffs, "Coefficient CSV")->required()->check(CLI::ExistingFile);
  approximate->add_option("--steps", approx_steps, "Number of subdivisions N")->required()->check(CLI::NonNegativeNumber);
  approximate->add_option("--jmax", approx_jmax, "Leaves on this level are not subdivided")->check(CLI::Range(0, 60));
  approximate->add_option("--out-tree", approx_tree, "Trimmed tree JSON")->required();
  approximate->add_option("--out-csv", approx_csv, "Run log CSV")->required();

  // bench
  auto *bench = app.add_subcommand("bench", "Convergence experiment");
  std::string bench_function, bench_out, bench_coeffs;
  bool wavelet_only = false;
  int bench_steps = 50, bench_jmax = 10, bench_pmax = 5;
  bench->add_option("--function", bench_function, "singularity | reflected | boundary_layer | spike")->required();
  bench->add_flag("--wavelet-only", wavelet_only, "Restrict to p_max = 0");
  bench->add_option("--steps", bench_steps, "N_max")->check(CLI::NonNegativeNumber);
  bench->add_option("--jmax", bench_jmax, "Maximal level")->check(CLI::Range(0, 20));
  bench->add_option("--pmax", bench_pmax, "Maximal degree")->check(CLI::Range(0, 30));
  bench->add_option("--out", bench_out, "Experiment CSV")->required();
  bench->add_option("--coeffs-out", bench_coeffs, "Also write the coefficients used");

  // certify
  auto *certify_cmd = app.add_subcommand("certify", "Check the near-best bounds against an exact best tree search");
  std::string cert_coeffs;
  int cert_steps = 0, cert_n = 1, cert_depth = 4, cert_degree = -1, cert_jmax = 30;
  certify_cmd->add_option("--coeffs", cert_coeffs, "Coefficient CSV")->required()->check(CLI::ExistingFile);
  certify_cmd->add_option("--steps", cert_steps, "N")->required()->check(CLI::PositiveNumber);
  certify_cmd->add_option("--n", cert_n, "Comparison budget n, 1 <= n <= N")->required();
  certify_cmd->add_option("--depth-bound", cert_depth, "Depth bound of the exhaustive search")->required()->check(CLI::NonNegativeNumber);
  certify_cmd->add_option("--degree-bound", cert_degree, "Degree bound of the search (default n)");
  certify_cmd->add_option("--jmax", cert_jmax, "Leaves on this level are not subdivided")->check(CLI::Range(0, 60));

  // sample
  auto *sample = app.add_subcommand("sample", "Sample a coefficient expansion or a test function");
  std::string sample_coeffs, sample_function, sample_out;
  int sample_count = 1024;
  double sample_delta = 1.0;
  auto *sample_source = sample->add_option("--coeffs", sample_coeffs, "Coefficient CSV")->check(CLI::ExistingFile);
  sample->add_option("--function", sample_function, "Test function name")->excludes(sample_source);
  sample->add_option("--count", sample_count, "Number of points")->check(CLI::PositiveNumber);
  sample->add_option("--delta", sample_delta, "Weight exponent");
  sample->add_option("--out", sample_out, "Samples CSV")->required();

  // gramian
  auto *gramian = app.add_subcommand("gramian", "Dump the Gramian system");
  std::string gramian_function = "singularity", gramian_out;
  int gramian_jmax = 2, gramian_pmax = 1;
  gramian->add_option("--function", gramian_function, "Test function for the load vector");
  gramian->add_option("--jmax", gramian_jmax, "Maximal level")->check(CLI::Range(0, 8));
  gramian->add_option("--pmax", gramian_pmax, "Maximal degree")->check(CLI::Range(0, 10));
  gramian->add_option("--out", gramian_out, "Gramian CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*coeffs) {
      const TestFunction tf = TestFunction::parse(coeffs_function);
      SolverConfig config;
      config.tol = coeffs_tol;
      config.initial_level = coeffs_level;
      config.initial_degree = coeffs_degree;
      const SolveReport report = adaptive_coefficients(tf.target(), coeffs_jmax, coeffs_pmax, config, WeightRule(coeffs_delta));
      auto out = open_output(coeffs_out);
      write_coefficients_csv(out, report.coefficients);
      if (!coeffs_log.empty()) {
        auto log = open_output(coeffs_log);
        write_solver_log_csv(log, report);
      }
      if (!report.converged)
        std::cerr << "warning: solver stopped at residual " << report.final_residual() << " above tolerance\n";
    } else if (*approximate) {
      const CoefficientSequence c = load_coefficients(approx_coeffs);
      const CoefficientErrorOracle oracle(c);
      RunConfig config;
      config.j_max = approx_jmax;
      const RunState run = nearbest_tree(oracle, approx_steps, config);
      const QuarkletTree trimmed = trim(run);
      auto tree = open_output(approx_tree);
      tree << tree_to_json(trimmed) << '\n';
      auto csv = open_output(approx_csv);
      write_run_log_csv(csv, run);
    } else if (*bench) {
      ExperimentConfig config;
      config.function = TestFunction::parse(bench_function);
      config.j_max = bench_jmax;
      config.p_max = wavelet_only ? 0 : bench_pmax;
      config.N_max = bench_steps;
      const ExperimentResult result = run_experiment(config);
      auto out = open_output(bench_out);
      write_experiment_csv(out, result.records);
      if (!bench_coeffs.empty()) {
        auto c = open_output(bench_coeffs);
        write_coefficients_csv(c, result.solve.coefficients);
      }
      if (result.solver_warning)
        std::cerr << "warning: solver stopped at residual " << result.solve.final_residual() << " above tolerance\n";
    } else if (*certify_cmd) {
      const CoefficientSequence c = load_coefficients(cert_coeffs);
      const CoefficientErrorOracle oracle(c);
      RunConfig config;
      config.j_max = cert_jmax;
      config.stop_on_zero_threshold = false;
      const RunState run = nearbest_tree(oracle, cert_steps, config);
      const QuarkletTree trimmed = trim(run);
      const double sigma = brute_force_sigma(oracle, cert_n, cert_depth, cert_degree < 0 ? cert_n : cert_degree);
      const Certificate certificate = certify(run, trimmed, cert_n, sigma);
      std::cout << certificate_to_json(certificate) << '\n';
      return certificate.all_ok() ? 0 : 2;
    } else if (*sample) {
      auto out = open_output(sample_out);
      if (!sample_coeffs.empty()) {
        const Expansion expansion(load_coefficients(sample_coeffs), WeightRule(sample_delta));
        write_samples_csv(out, [&](double x) { return expansion(x); }, sample_count);
      } else if (!sample_function.empty()) {
        const TestFunction tf = TestFunction::parse(sample_function);
        write_samples_csv(out, [&](double x) { return tf(x); }, sample_count);
      } else {
        throw std::invalid_argument("sample: need --coeffs or --function");
      }
    } else if (*gramian) {
      const TestFunction tf = TestFunction::parse(gramian_function);
      const GramianSystem system = assemble_system(tf.target(), truncated_index_set(gramian_jmax, gramian_pmax), WeightRule{});
      auto out = open_output(gramian_out);
      write_gramian_csv(out, system);
    }
  } catch (const std::exception &error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return 0;
}
