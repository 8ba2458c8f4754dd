#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "quarklet/error_engine.hpp"
#include "quarklet/index.hpp"

namespace quarklet {

/// w_p = (p+1)^{-delta}; delta > 1/2 keeps w_p (p+1)^{-1/2} summable.
struct WeightRule {
  double delta = 1.0;

  /// Throws std::invalid_argument unless delta > 1/2.
  explicit WeightRule(double delta_ = 1.0);
  double operator()(int p) const;
};

double weight(int p, const WeightRule &rule);

/// scale * ((x - a) / (b - a))^degree on [a, b).
struct MonomialPiece {
  double a = 0.0;
  double b = 0.0;
  double scale = 1.0;
  int degree = 0;

  double operator()(double x) const;
};

/// Unweighted Haar quarklet as explicit pieces: one for a quark slot, two otherwise.
struct QuarkletFunction {
  QuarkletIndex index;
  std::vector<MonomialPiece> pieces;

  double operator()(double x) const;
};

QuarkletFunction quarklet_function(const QuarkletIndex &index);

/// phi_p(x) = x^p on [0,1), 0 elsewhere.
double quark_eval(int p, double x);

/// psi_{p,j,k}(x) = 2^{j/2} psi_p(2^j x - k) with psi_p(y) = (2y)^p on [0,1/2),
/// -(2y-1)^p on [1/2,1); j = -1 gives phi_p(x - k).
double quarklet_eval(int p, int j, std::int64_t k, double x);

/// Exact L2 inner product of two unweighted quarklets.
double inner_product(const QuarkletIndex &lambda, const QuarkletIndex &mu);

/// Every index with -1 <= j <= j_max, 0 <= p <= p_max on [0,1], ordered by
/// (j, k, p) with the quark slots first.
std::vector<QuarkletIndex> truncated_index_set(int j_max, int p_max);

/// Function to be represented, with optional structure used for exact loads
/// and graded quadrature.
struct TargetFunction {
  std::function<double(double)> eval;
  /// Points of [0,1] where the function is not smooth.
  std::vector<double> singular_points;
  /// f(x) = x^alpha.
  std::optional<double> power;
  /// f(x) = (1 - x)^alpha.
  std::optional<double> reflected_power;

  double operator()(double x) const { return eval(x); }
};

TargetFunction power_target(double alpha);
TargetFunction reflected_power_target(double alpha);
/// f = sum c_lambda w_p psi_lambda, evaluated exactly.
TargetFunction expansion_target(const CoefficientSequence &c, const WeightRule &rule);

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string &what, std::optional<QuarkletIndex> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}
  const std::optional<QuarkletIndex> &index() const { return index_; }

 private:
  std::optional<QuarkletIndex> index_;
};

struct GramianSystem {
  std::vector<QuarkletIndex> indices;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd b;

  std::unordered_map<QuarkletIndex, std::size_t> positions() const;
};

/// G[a][b] = w_{p_a} w_{p_b} <psi_a, psi_b>; only nested supports are stored.
Eigen::SparseMatrix<double> assemble_gramian(const std::vector<QuarkletIndex> &indices, const WeightRule &rule);

/// b[a] = w_{p_a} <f, psi_a>.
Eigen::VectorXd assemble_rhs(const TargetFunction &f, const std::vector<QuarkletIndex> &indices,
                             const WeightRule &rule);

GramianSystem assemble_system(const TargetFunction &f, std::vector<QuarkletIndex> indices, const WeightRule &rule);

/// Pointwise evaluation of sum c_lambda w_p psi_lambda, O(levels * degrees) per point.
class Expansion {
 public:
  Expansion(const CoefficientSequence &c, const WeightRule &rule);

  double operator()(double x) const;
  /// Sorted breakpoints of all active pieces, including 0 and 1.
  const std::vector<double> &breakpoints() const { return breakpoints_; }

 private:
  struct Term {
    int p;
    double weighted;
  };
  std::unordered_map<WaveletIndex, std::vector<Term>, WaveletIndexHash> terms_;
  std::vector<Term> generator_;
  int max_level_ = -1;
  std::vector<double> breakpoints_;
};

double synthesize(const CoefficientSequence &c, const WeightRule &rule, double x);

/// ||f - sum c w psi||_{L2(0,1)} by composite Gauss-Legendre on the breakpoints
/// of the expansion, graded toward the target's singular points.
double l2_error(const TargetFunction &f, const CoefficientSequence &c, const WeightRule &rule);

/// Row-major dense dump with an index legend header; meant for small systems.
void write_gramian_csv(std::ostream &out, const GramianSystem &system);
/// "x,value" samples at `count` equispaced points of [0,1).
void write_samples_csv(std::ostream &out, const std::function<double(double)> &f, int count);

}  // namespace quarklet
