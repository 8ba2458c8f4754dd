#include <doctest.h>

#include <sstream>

#include "quarklet/error_engine.hpp"
#include "quarklet/nearbest.hpp"
#include "support.hpp"

using namespace quarklet;
using support::close;

namespace {
WaveletTree three_node() { return refine_space(WaveletTree{}, kRoot); }
}  // namespace

TEST_CASE("local_error on the worked sequence") {
  const CoefficientSequence w = support::worked_sequence();
  CHECK(close(local_error(kRoot, 0, w), 1.7, 1e-12));
  CHECK(close(local_error(kRoot, 1, w), 0.7, 1e-12));
  CHECK(close(local_error({1, 0}, 0, w), 1.1, 1e-12));
  CHECK(close(local_error({1, 1}, 0, w), 0.1, 1e-12));
  CHECK(local_error({1, 1}, 1, w) == 0.0);
  CHECK(local_error({2, 1}, 0, w) == 0.0);
  CHECK(close(local_error({2, 0}, 0, w), 1.1, 1e-12));
}

TEST_CASE("tilde_e") {
  CHECK(tilde_e(0.0, 0.0) == 0.0);
  CHECK(close(tilde_e(1.1, 1.7), 1.87 / 2.8, 1e-14));
  CHECK(tilde_e(0.1, 1.7) == doctest::Approx(0.09444).epsilon(1e-4));
  CHECK(tilde_e_root(1.7) == 1.7);
}

TEST_CASE("combine_E") {
  CHECK(close(combine_E(1.1, 0.1, 0.7), 0.7, 1e-15));
  CHECK(combine_E(0.0, 0.0, 0.0) == 0.0);
  CHECK(close(combine_E(0.2, 0.3, 0.9), 0.5, 1e-15));
}

TEST_CASE("combine_tilde_E") {
  CHECK(combine_tilde_E(0.7, 1.7) == doctest::Approx(0.495833).epsilon(1e-6));
  CHECK(close(combine_tilde_E(0.7, 1.7), 1.19 / 2.4, 1e-14));
  CHECK(combine_tilde_E(0.0, 0.0) == 0.0);
  CHECK(combine_tilde_E(2.0, 2.0) == 1.0);
}

TEST_CASE("combine_q_s") {
  const WaveletIndex a{1, 0}, b{1, 1};
  const PenaltyChoice first = combine_q_s(0.66786, a, 0.09444, b, 0.49583);
  CHECK(first.q == 0.49583);
  CHECK(first.s == a);
  CHECK(combine_q_s(0.3, a, 0.3, b, 1.0) == PenaltyChoice{0.3, a});
  CHECK(combine_q_s(0.5, a, 0.2, b, 0.7) == PenaltyChoice{0.5, a});
  CHECK(combine_q_s(0.2, a, 0.5, b, 0.7) == PenaltyChoice{0.5, b});
}

TEST_CASE("global_error") {
  const CoefficientErrorOracle oracle(support::worked_sequence());
  CHECK(close(global_error(QuarkletTree::from_leaf_degrees(WaveletTree{}, {{kRoot, 0}}), oracle), 1.7, 1e-12));
  CHECK(close(global_error(QuarkletTree::from_leaf_degrees(WaveletTree{}, {{kRoot, 1}}), oracle), 0.7, 1e-12));
  CHECK(close(global_error(QuarkletTree::from_leaf_degrees(three_node(), {{{1, 0}, 0}, {{1, 1}, 0}}), oracle), 1.2,
              1e-12));
}

TEST_CASE("oracle agrees with direct summation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const CoefficientSequence c = support::random_sequence(rng, 4, 3);
    const CoefficientErrorOracle oracle(c);
    CHECK(close(oracle.total_mass(), c.squared_norm(), 1e-12));
    for (int j = 0; j <= 5; ++j)
      for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
        for (int p = 0; p <= 4; ++p) {
          const double expected = support::naive_local_error({j, k}, p, c);
          CHECK(std::abs(oracle.local_error({j, k}, p) - expected) <= 1e-12 * std::max(expected, 1e-300) + 1e-300);
        }
  }
}

TEST_CASE("local error axioms") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const CoefficientErrorOracle oracle(support::random_sequence(rng, 4, 3));
    for (int j = 0; j <= 4; ++j)
      for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
        const auto [a, b] = children({j, k});
        const double split = oracle.local_error(a, 0) + oracle.local_error(b, 0);
        CHECK(oracle.local_error({j, k}, 0) >= split * (1.0 - 1e-12));
        for (int p = 0; p <= 4; ++p)
          CHECK(oracle.local_error({j, k}, p) >= oracle.local_error({j, k}, p + 1) * (1.0 - 1e-12));
      }
  }
}

TEST_CASE("global error does not grow under refinement") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const CoefficientErrorOracle oracle(support::random_sequence(rng, 4, 3));
    const WaveletTree tree = support::random_tree(rng, trial % 7, 4);
    std::map<WaveletIndex, int> degrees;
    for (const auto &leaf : tree.leaves()) degrees[leaf] = 0;
    const double base = global_error(QuarkletTree::from_leaf_degrees(tree, degrees), oracle);

    const auto leaves = tree.leaves();
    const WaveletIndex leaf = leaves[rng() % leaves.size()];
    auto raised = degrees;
    raised[leaf] = 1 + static_cast<int>(rng() % 3);
    CHECK(global_error(QuarkletTree::from_leaf_degrees(tree, raised), oracle) <= base * (1.0 + 1e-12));

    if (leaf.j < 5) {
      auto split = degrees;
      split.erase(leaf);
      const auto [a, b] = children(leaf);
      split[a] = 0;
      split[b] = 0;
      CHECK(global_error(QuarkletTree::from_leaf_degrees(refine_space(tree, leaf), split), oracle) <=
            base * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("harmonic identities on run states") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const CoefficientErrorOracle oracle(support::random_sequence(rng, 4, 3, 0.9));
    RunConfig config;
    config.j_max = 5;
    const RunState run = nearbest_tree(oracle, 8, config);
    for (const auto &[node, state] : run.nodes) {
      double chain = 0.0;
      bool zero = state.e == 0.0;
      for (std::optional<WaveletIndex> mu = parent(node); mu; mu = parent(*mu)) {
        const double e = run.at(*mu).e;
        if (e == 0.0) zero = true;
        chain += 1.0 / e;
      }
      if (zero) {
        CHECK(state.tilde_e == 0.0);
        continue;
      }
      CHECK(close(1.0 / state.tilde_e, chain + 1.0 / state.e, 1e-10));
      double sum = chain;
      for (std::size_t k = 0; k < state.E.size(); ++k) {
        if (state.E[k] == 0.0) break;
        sum += 1.0 / state.E[k];
        CHECK(close(1.0 / state.tilde_E[k], sum, 1e-10));
      }
    }
  }
}

TEST_CASE("coefficient CSV round trip") {
  std::mt19937_64 rng(17);
  const CoefficientSequence c = support::random_sequence(rng, 3, 2);
  std::stringstream buffer;
  write_coefficients_csv(buffer, c);
  CHECK(buffer.str().rfind("p,j,k,c\n", 0) == 0);
  CHECK(read_coefficients_csv(buffer) == c);

  std::istringstream bad("p,j,k,c\n0,1,2,0.5\n");
  CHECK_THROWS_AS(read_coefficients_csv(bad), std::invalid_argument);
}

TEST_CASE("invalid indices are rejected") {
  CoefficientSequence c;
  CHECK_THROWS_AS(c.set({-1, 0, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(c.set({0, 2, 4}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(c.set({0, -1, 1}, 1.0), std::invalid_argument);
}
