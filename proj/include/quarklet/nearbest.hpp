#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quarklet/error_engine.hpp"
#include "quarklet/index.hpp"

namespace quarklet {

struct RunConfig {
  /// Leaves on this level are never subdivided (their q is forced to 0).
  int j_max = 30;
  /// Stop as soon as q(R) == 0; the trimmed tree then has zero global error.
  bool stop_on_zero_threshold = true;
};

struct StepRecord {
  int N = 0;
  WaveletIndex lambda;  // the subdivided leaf
  double q_N = 0.0;
  double E_root = 0.0;
  /// Some node on the update path saw q(eta1) == q(eta2) == 0; s went left.
  bool zero_tie = false;
};

/// Everything NEARBEST_TREE maintains: the tree T'_N and per-node state.
struct RunState {
  WaveletTree tree;
  std::map<WaveletIndex, NodeState> nodes;
  int steps = 0;
  /// Node initializations plus inner-loop (rootward walk) iterations.
  std::int64_t work = 0;
  std::vector<StepRecord> log;

  double threshold() const { return nodes.at(kRoot).q; }
  const NodeState &at(const WaveletIndex &node) const { return nodes.at(node); }
};

/// Incremental NEARBEST_TREE. Holds a reference to the oracle.
class NearBestTree {
 public:
  explicit NearBestTree(const LocalErrorOracle &oracle, RunConfig config = {});

  /// Subdivides s(R) and updates the path back to the root.
  /// Returns false (and changes nothing) when the stopping rule applies.
  bool step();

  const RunState &state() const { return state_; }
  RunState release() && { return std::move(state_); }

 private:
  NodeState make_leaf(const WaveletIndex &node, double parent_tilde_e);
  double pull(NodeState &node, const WaveletIndex &index);

  const LocalErrorOracle *oracle_;
  RunConfig config_;
  RunState state_;
};

/// Runs up to max_steps steps. Throws std::out_of_range if max_steps exceeds
/// the 2^j_max - 1 subdivisions representable below config.j_max.
RunState nearbest_tree(const LocalErrorOracle &oracle, int max_steps, RunConfig config = {});

/// Minimal subtree with E(lambda) == e_{r(lambda)}(lambda) on its leaves,
/// degrees p_max = r(lambda, T'_N). Uses stored values only.
QuarkletTree trim(const RunState &run);

/// Global error of the trimmed tree from stored state: sum of e_r over its leaves.
double trimmed_global_error(const RunState &run, const QuarkletTree &trimmed);

/// Exact sigma_n = min global error over quarklet trees with #T <= n,
/// depth <= depth_bound and leaf degrees <= degree_bound.
/// Throws std::length_error when the memo table would exceed state_budget.
double brute_force_sigma(const LocalErrorOracle &oracle, int n, int depth_bound, int degree_bound,
                         std::size_t state_budget = 4'000'000);

struct Certificate {
  int N = 0;
  int n = 0;
  double global_error = 0.0;
  double sigma_n = 0.0;
  double bound = 0.0;  // (2N+1)/(N-n+1) * sigma_n
  double q_N = 0.0;
  double lower = 0.0;  // q_N * (N-n+1) <= sigma_n
  double upper = 0.0;  // global_error <= q_N * (2N+1)
  bool near_best_ok = false;
  bool lower_ok = false;
  bool upper_ok = false;

  bool all_ok() const { return near_best_ok && lower_ok && upper_ok; }
};

/// Throws std::invalid_argument unless 1 <= n <= run.steps.
Certificate certify(const RunState &run, const QuarkletTree &trimmed, int n, double sigma_n);

std::string certificate_to_json(const Certificate &certificate, int indent = 2);

/// N+1 <= #T <= (N^2+6N+5)/4 and #T <= (depth+1) N + 1.
bool cardinality_check(const QuarkletTree &trimmed, int N);

/// "N,lambda_j,lambda_k,qN,EN_root", one row per step.
void write_run_log_csv(std::ostream &out, const RunState &run);

}  // namespace quarklet
