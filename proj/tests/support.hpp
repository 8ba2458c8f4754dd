#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "quarklet/error_engine.hpp"
#include "quarklet/index.hpp"
#include "quarklet/nearbest.hpp"

namespace support {

using namespace quarklet;

inline bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

// |c|^2 values of the three-node example sequence.
inline CoefficientSequence worked_sequence() {
  CoefficientSequence c;
  c.set({0, -1, 0}, 1.0);
  c.set({0, 0, 0}, 1.0);
  c.set({0, 1, 0}, 0.5);
  c.set({0, 1, 1}, 0.5);
  c.set({1, -1, 0}, std::sqrt(0.5));
  c.set({1, 0, 0}, std::sqrt(0.5));
  c.set({1, 1, 0}, std::sqrt(0.1));
  c.set({1, 1, 1}, std::sqrt(0.1));
  return c;
}

// Random sparse sequence on j <= j_max, p <= p_max; some entries are exact zeros.
inline CoefficientSequence random_sequence(std::mt19937_64 &rng, int j_max, int p_max, double density = 0.6) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  CoefficientSequence c;
  for (int p = 0; p <= p_max; ++p)
    for (int j = -1; j <= j_max; ++j)
      for (std::int64_t k = 0; k < (j < 0 ? 1 : std::int64_t{1} << j); ++k) {
        if (unit(rng) > density) continue;
        const double scale = std::pow(2.0, -0.5 * std::max(j, 0)) / (p + 1.0);
        c.set({p, j, k}, unit(rng) < 0.1 ? 0.0 : scale * normal(rng));
      }
  return c;
}

inline WaveletTree random_tree(std::mt19937_64 &rng, int refinements, int j_max) {
  WaveletTree tree;
  for (int i = 0; i < refinements; ++i) {
    std::vector<WaveletIndex> leaves;
    for (const auto &leaf : tree.leaves())
      if (leaf.j < j_max) leaves.push_back(leaf);
    if (leaves.empty()) break;
    tree.refine(leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)]);
  }
  return tree;
}

// Every complete tree with at most max_nodes nodes and depth at most max_depth.
inline std::vector<WaveletTree> all_trees(std::size_t max_nodes, int max_depth) {
  std::vector<WaveletTree> out{WaveletTree{}};
  std::set<std::set<WaveletIndex>> seen{{kRoot}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const WaveletTree current = out[i];
    if (current.size() + 2 > max_nodes) continue;
    for (const auto &leaf : current.leaves()) {
      if (leaf.j >= max_depth) continue;
      WaveletTree next = current;
      next.refine(leaf);
      if (seen.insert(next.nodes()).second) out.push_back(next);
    }
  }
  return out;
}

// e_p straight from the definition, by scanning every coefficient.
inline double naive_local_error(const WaveletIndex &lambda, int p, const CoefficientSequence &c) {
  const std::vector<WaveletIndex> chain = upsilon(lambda);
  double sum = 0.0;
  for (const auto &[index, value] : c.values()) {
    const WaveletIndex node = index.node();
    const bool on_chain = std::find(chain.begin(), chain.end(), node) != chain.end();
    if ((on_chain && index.p > p) || is_descendant(node, lambda)) sum += value * value;
  }
  return sum;
}

// Oracle given by a table; missing entries fall back to a generator.
class TableOracle final : public LocalErrorOracle {
 public:
  explicit TableOracle(std::function<double(const WaveletIndex &, int)> f) : f_(std::move(f)) {}
  double local_error(const WaveletIndex &lambda, int p) const override { return f_(lambda, p); }

 private:
  std::function<double(const WaveletIndex &, int)> f_;
};

// sigma_n by enumerating every tree and every leaf degree assignment.
inline double enumerate_sigma(const LocalErrorOracle &oracle, int n, int max_depth) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &tree : all_trees(static_cast<std::size_t>(n), max_depth)) {
    const std::vector<WaveletIndex> leaves = tree.leaves();
    std::map<WaveletIndex, int> degrees;
    for (const auto &leaf : leaves) degrees[leaf] = 0;
    std::function<void(std::size_t)> assign = [&](std::size_t i) {
      if (i == leaves.size()) {
        const QuarkletTree candidate = QuarkletTree::from_leaf_degrees(tree, degrees);
        if (quarklet_cardinality(candidate) <= n) best = std::min(best, global_error(candidate, oracle));
        return;
      }
      for (int p = 0; p <= n; ++p) {
        degrees[leaves[i]] = p;
        assign(i + 1);
      }
      degrees[leaves[i]] = 0;
    };
    assign(0);
  }
  return best;
}

// NEARBEST_TREE recomputed from scratch after every subdivision.
struct ReplayStep {
  WaveletIndex lambda;
  double q = 0.0;
  double E_root = 0.0;
};

inline std::vector<ReplayStep> replay(const LocalErrorOracle &oracle, int steps, int j_max) {
  WaveletTree tree;
  std::map<WaveletIndex, std::vector<double>> history;  // E_k per node, k = 0..r
  std::vector<ReplayStep> out;

  auto harmonic = [](double a, double b) { return a + b == 0.0 ? 0.0 : a * b / (a + b); };
  std::function<double(const WaveletIndex &)> tilde_e = [&](const WaveletIndex &node) -> double {
    const double e = oracle.local_error(node, 0);
    if (node.is_root()) return e;
    return harmonic(e, tilde_e(*parent(node)));
  };
  std::function<double(const WaveletIndex &)> E = [&](const WaveletIndex &node) -> double {
    if (tree.is_leaf(node)) return oracle.local_error(node, 0);
    const auto [a, b] = children(node);
    return std::min(E(a) + E(b), oracle.local_error(node, refinement_count(node, tree)));
  };
  auto record = [&]() {
    for (const auto &node : tree.nodes()) {
      auto &values = history[node];
      const int r = refinement_count(node, tree);
      if (static_cast<int>(values.size()) == r) values.push_back(E(node));
    }
  };
  struct Choice {
    double q;
    WaveletIndex s;
  };
  std::function<Choice(const WaveletIndex &)> choose = [&](const WaveletIndex &node) -> Choice {
    if (tree.is_leaf(node)) return {node.j >= j_max ? 0.0 : tilde_e(node), node};
    double tilde_E = tilde_e(node);
    const auto &values = history.at(node);
    for (std::size_t k = 1; k < values.size(); ++k) tilde_E = harmonic(values[k], tilde_E);
    const auto [a, b] = children(node);
    const Choice left = choose(a);
    const Choice right = choose(b);
    const Choice larger = right.q > left.q ? right : left;
    return {std::min(larger.q, tilde_E), larger.s};
  };

  record();
  for (int step = 0; step < steps; ++step) {
    const Choice root = choose(kRoot);
    if (root.s.j >= j_max) break;
    tree.refine(root.s);
    record();
    out.push_back({root.s, choose(kRoot).q, E(kRoot)});
  }
  return out;
}

}  // namespace support
