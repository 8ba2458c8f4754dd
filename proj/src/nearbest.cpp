#include "quarklet/nearbest.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <optional>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace quarklet {

NearBestTree::NearBestTree(const LocalErrorOracle &oracle, RunConfig config)
    : oracle_(&oracle), config_(config) {
  if (config_.j_max < 0) throw std::invalid_argument("RunConfig: j_max must be nonnegative");
  NodeState root;
  root.e = oracle_->local_error(kRoot, 0);
  root.tilde_e = tilde_e_root(root.e);
  root.e_by_degree = {root.e};
  root.E = {root.e};
  root.tilde_E = {root.tilde_e};
  root.q = config_.j_max == 0 ? 0.0 : root.tilde_e;
  root.s = kRoot;
  state_.nodes.emplace(kRoot, std::move(root));
  state_.work = 1;
}

NodeState NearBestTree::make_leaf(const WaveletIndex &node, double parent_tilde_e) {
  NodeState leaf;
  leaf.e = oracle_->local_error(node, 0);
  leaf.tilde_e = tilde_e(leaf.e, parent_tilde_e);
  leaf.e_by_degree = {leaf.e};
  leaf.E = {leaf.e};
  leaf.tilde_E = {leaf.tilde_e};
  leaf.q = node.j >= config_.j_max ? 0.0 : leaf.tilde_e;
  leaf.s = node;
  return leaf;
}

double NearBestTree::pull(NodeState &node, const WaveletIndex &index) {
  while (static_cast<int>(node.e_by_degree.size()) <= node.r)
    node.e_by_degree.push_back(oracle_->local_error(index, static_cast<int>(node.e_by_degree.size())));
  return node.e_by_degree[node.r];
}

bool NearBestTree::step() {
  const NodeState &root = state_.nodes.at(kRoot);
  if (config_.stop_on_zero_threshold && root.q == 0.0) return false;
  const WaveletIndex target = root.s;
  if (target.j >= config_.j_max) return false;

  state_.tree.refine(target);
  const auto [first, second] = children(target);
  const double parent_tilde_e = state_.nodes.at(target).tilde_e;
  state_.nodes.emplace(first, make_leaf(first, parent_tilde_e));
  state_.nodes.emplace(second, make_leaf(second, parent_tilde_e));
  state_.work += 2;

  bool zero_tie = false;
  std::optional<WaveletIndex> current = target;
  while (current) {
    NodeState &node = state_.nodes.at(*current);
    ++node.r;
    const double e_r = pull(node, *current);
    const auto [left, right] = children(*current);
    const NodeState &a = state_.nodes.at(left);
    const NodeState &b = state_.nodes.at(right);
    const double E = combine_E(a.E_current(), b.E_current(), e_r);
    node.E.push_back(E);
    node.tilde_E.push_back(combine_tilde_E(E, node.tilde_E.back()));
    if (a.q == 0.0 && b.q == 0.0) zero_tie = true;
    const PenaltyChoice choice = combine_q_s(a.q, a.s, b.q, b.s, node.tilde_E.back());
    node.q = choice.q;
    node.s = choice.s;
    ++state_.work;
    current = parent(*current);
  }

  ++state_.steps;
  const NodeState &updated_root = state_.nodes.at(kRoot);
  state_.log.push_back({state_.steps, target, updated_root.q, updated_root.E_current(), zero_tie});
  return true;
}

RunState nearbest_tree(const LocalErrorOracle &oracle, int max_steps, RunConfig config) {
  if (max_steps < 0) throw std::invalid_argument("nearbest_tree: negative step count");
  if (config.j_max < 62 && static_cast<std::int64_t>(max_steps) > (std::int64_t{1} << config.j_max) - 1)
    throw std::out_of_range("nearbest_tree: " + std::to_string(max_steps) + " steps exceed the refinements available below level " +
                            std::to_string(config.j_max));
  NearBestTree run(oracle, config);
  for (int step = 0; step < max_steps; ++step)
    if (!run.step()) break;
  return std::move(run).release();
}

QuarkletTree trim(const RunState &run) {
  std::set<WaveletIndex> kept;
  std::vector<WaveletIndex> pending{kRoot};
  while (!pending.empty()) {
    const WaveletIndex node = pending.back();
    pending.pop_back();
    kept.insert(node);
    const NodeState &state = run.at(node);
    if (state.E_current() == state.e_current()) continue;
    const auto [left, right] = children(node);
    pending.push_back(left);
    pending.push_back(right);
  }
  return derive_pmax(WaveletTree::from_nodes(kept), run.tree);
}

double trimmed_global_error(const RunState &run, const QuarkletTree &trimmed) {
  double sum = 0.0;
  for (const auto &leaf : trimmed.base.leaves()) {
    const NodeState &state = run.at(leaf);
    if (state.r != trimmed.degree(leaf))
      throw std::invalid_argument("trimmed_global_error: tree does not stem from this run");
    sum += state.e_current();
  }
  return sum;
}

// ---------------------------------------------------------------------------

namespace {

class BestTreeSearch {
 public:
  BestTreeSearch(const LocalErrorOracle &oracle, int depth_bound, int degree_bound, std::size_t budget)
      : oracle_(oracle), depth_bound_(depth_bound), degree_bound_(degree_bound), budget_(budget) {}

  // Smallest global error of a quarklet subtree rooted at `node` whose node
  // count plus degree cost stays within `budget`.
  double best(const WaveletIndex &node, int budget) {
    if (budget < 1) return kInfinity;
    const Key key{node, budget};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= budget_) throw std::length_error("brute_force_sigma: search state budget exhausted");

    const int chain = static_cast<int>(upsilon(node).size());
    double result = kInfinity;
    for (int p = 0; p <= degree_bound_ && 1 + p * chain <= budget; ++p)
      result = std::min(result, oracle_.local_error(node, p));
    if (node.j < depth_bound_ && budget >= 3) {
      const auto [left, right] = children(node);
      for (int left_budget = 1; left_budget <= budget - 2; ++left_budget) {
        const double left_error = best(left, left_budget);
        if (left_error >= result) continue;
        result = std::min(result, left_error + best(right, budget - 1 - left_budget));
      }
    }
    memo_.emplace(key, result);
    return result;
  }

 private:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();
  struct Key {
    WaveletIndex node;
    int budget;
    bool operator==(const Key &) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key &key) const {
      return WaveletIndexHash{}(key.node) * 1315423911u + static_cast<std::size_t>(key.budget);
    }
  };

  const LocalErrorOracle &oracle_;
  int depth_bound_;
  int degree_bound_;
  std::size_t budget_;
  std::unordered_map<Key, double, KeyHash> memo_;
};

bool at_most(double a, double b) {
  return a <= b + 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

double brute_force_sigma(const LocalErrorOracle &oracle, int n, int depth_bound, int degree_bound,
                         std::size_t state_budget) {
  if (n < 1) throw std::invalid_argument("brute_force_sigma: n must be positive");
  if (depth_bound < 0 || degree_bound < 0) throw std::invalid_argument("brute_force_sigma: negative bound");
  BestTreeSearch search(oracle, depth_bound, degree_bound, state_budget);
  return search.best(kRoot, n);
}

Certificate certify(const RunState &run, const QuarkletTree &trimmed, int n, double sigma_n) {
  const int N = run.steps;
  if (n < 1 || n > N)
    throw std::invalid_argument("certify: need 1 <= n <= N, got n=" + std::to_string(n) + ", N=" + std::to_string(N));
  Certificate c;
  c.N = N;
  c.n = n;
  c.global_error = trimmed_global_error(run, trimmed);
  c.sigma_n = sigma_n;
  c.bound = (2.0 * N + 1.0) / (N - n + 1.0) * sigma_n;
  c.q_N = run.threshold();
  c.lower = c.q_N * (N - n + 1.0);
  c.upper = c.q_N * (2.0 * N + 1.0);
  c.near_best_ok = at_most(c.global_error, c.bound);
  c.lower_ok = at_most(c.lower, c.sigma_n);
  c.upper_ok = at_most(c.global_error, c.upper);
  return c;
}

std::string certificate_to_json(const Certificate &c, int indent) {
  nlohmann::ordered_json out;
  out["N"] = c.N;
  out["n"] = c.n;
  out["global_error"] = c.global_error;
  out["sigma_n"] = c.sigma_n;
  out["bound"] = c.bound;
  out["q_N"] = c.q_N;
  out["lower"] = c.lower;
  out["upper"] = c.upper;
  out["near_best_ok"] = c.near_best_ok;
  out["lower_ok"] = c.lower_ok;
  out["upper_ok"] = c.upper_ok;
  return out.dump(indent);
}

bool cardinality_check(const QuarkletTree &trimmed, int N) {
  const std::int64_t count = quarklet_cardinality(trimmed);
  const std::int64_t n = N;
  const std::int64_t depth = trimmed.base.depth();
  return n + 1 <= count && 4 * count <= n * n + 6 * n + 5 && count <= (depth + 1) * n + 1;
}

void write_run_log_csv(std::ostream &out, const RunState &run) {
  out << "N,lambda_j,lambda_k,qN,EN_root\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto &record : run.log)
    out << record.N << ',' << record.lambda.j << ',' << record.lambda.k << ',' << record.q_N << ','
        << record.E_root << '\n';
}

}  // namespace quarklet
