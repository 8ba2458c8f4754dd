#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "quarklet/index.hpp"

namespace quarklet {

/// Finitely supported coefficients c_{p,j,k} of f = sum c_{p,j,k} w_p psi_{p,j,k}.
class CoefficientSequence {
 public:
  CoefficientSequence() = default;

  /// Throws std::invalid_argument for an invalid index.
  void set(const QuarkletIndex &index, double value);
  void add(const QuarkletIndex &index, double value);
  double get(const QuarkletIndex &index) const;
  void erase(const QuarkletIndex &index) { values_.erase(index); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::map<QuarkletIndex, double> &values() const { return values_; }

  int max_level() const;
  int max_degree() const;
  double squared_norm() const;

  /// The sequence restricted to the given indices.
  CoefficientSequence restricted_to(const std::vector<QuarkletIndex> &indices) const;

  bool operator==(const CoefficientSequence &) const = default;

 private:
  std::map<QuarkletIndex, double> values_;
};

/// "p,j,k,c" rows; a leading "p,j,k,c" header is written and tolerated on read.
void write_coefficients_csv(std::ostream &out, const CoefficientSequence &c);
CoefficientSequence read_coefficients_csv(std::istream &in);
void save_coefficients(const std::string &path, const CoefficientSequence &c);
CoefficientSequence load_coefficients(const std::string &path);

/// Source of local errors e_p(lambda) >= 0. Implementations must be
/// subadditive in space at p = 0 and nonincreasing in p.
class LocalErrorOracle {
 public:
  virtual ~LocalErrorOracle() = default;
  virtual double local_error(const WaveletIndex &lambda, int p) const = 0;
};

/// Coefficient-based local errors:
///   e_p(lambda) = sum_{mu in upsilon(lambda)} sum_{q>p} |c_{q,mu}|^2
///               + sum_{mu strictly below lambda} sum_{q>=0} |c_{q,mu}|^2,
/// where the quark slots (q,-1,0) count as part of the root.
///
/// Per-node degree tails and subtree masses are tabulated once, so a query
/// costs O(|upsilon(lambda)|).
class CoefficientErrorOracle final : public LocalErrorOracle {
 public:
  explicit CoefficientErrorOracle(const CoefficientSequence &c);

  double local_error(const WaveletIndex &lambda, int p) const override;

  /// Squared l2 norm of the whole sequence.
  double total_mass() const { return total_; }

 private:
  struct NodeMass {
    std::vector<double> tail;  // tail[p] = sum_{q>p} |c_q|^2
    double own = 0.0;
    double subtree = 0.0;
  };
  double tail(const WaveletIndex &node, int p) const;
  double subtree(const WaveletIndex &node) const;

  std::unordered_map<WaveletIndex, NodeMass, WaveletIndexHash> nodes_;
  double total_ = 0.0;
};

double local_error(const WaveletIndex &lambda, int p, const CoefficientSequence &c);

/// Penalized error e*t/(e+t) of a child given the parent's value; 0 when both vanish.
double tilde_e(double e_lambda, double tilde_e_parent);
/// The root has no parent: tilde_e(R) = e(R).
inline double tilde_e_root(double e_root) { return e_root; }

/// min{E(eta1) + E(eta2), e_r(lambda)}.
double combine_E(double E_child1, double E_child2, double e_r);

/// E_j * tE_{j-1} / (E_j + tE_{j-1}); 0 when both vanish.
double combine_tilde_E(double E_j, double tilde_E_prev);

struct PenaltyChoice {
  double q = 0.0;
  WaveletIndex s;
  bool operator==(const PenaltyChoice &) const = default;
};

/// q = min{max(q1,q2), tE_r}, s follows the larger child; ties go to the first child.
PenaltyChoice combine_q_s(double q1, const WaveletIndex &s1, double q2, const WaveletIndex &s2,
                          double tilde_E_r);

/// Sum of e_{p_max(lambda)}(lambda) over the leaves.
double global_error(const QuarkletTree &tree, const LocalErrorOracle &oracle);

/// Per-node record kept by the near-best run.
struct NodeState {
  double e = 0.0;        // e_0
  double tilde_e = 0.0;
  int r = 0;
  std::vector<double> e_by_degree;  // e_k for k = 0..r, pulled from the oracle once
  std::vector<double> E;            // E_k for k = 0..r
  std::vector<double> tilde_E;      // tE_k for k = 0..r
  double q = 0.0;
  WaveletIndex s;

  double E_current() const { return E.back(); }
  double tilde_E_current() const { return tilde_E.back(); }
  double e_current() const { return e_by_degree.back(); }
};

}  // namespace quarklet
