#include "quarklet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace quarklet {

namespace {

// Truncated index set order: quark slots first, then (j, k, p).
bool set_order(const QuarkletIndex &a, const QuarkletIndex &b) {
  return std::tie(a.j, a.k, a.p) < std::tie(b.j, b.k, b.p);
}

Eigen::SparseMatrix<double> principal_submatrix(const Eigen::SparseMatrix<double> &G,
                                                const std::vector<std::size_t> &rows) {
  std::vector<Eigen::Index> local(static_cast<std::size_t>(G.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) local[rows[i]] = static_cast<Eigen::Index>(i);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t col = 0; col < rows.size(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(G, static_cast<Eigen::Index>(rows[col])); it; ++it) {
      const Eigen::Index row = local[static_cast<std::size_t>(it.row())];
      if (row >= 0) triplets.emplace_back(row, static_cast<Eigen::Index>(col), it.value());
    }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::SparseMatrix<double> sub(n, n);
  sub.setFromTriplets(triplets.begin(), triplets.end());
  return sub;
}

}  // namespace

double estimate_largest_eigenvalue(const Eigen::SparseMatrix<double> &G, int iterations, std::uint64_t seed) {
  if (G.rows() != G.cols()) throw std::invalid_argument("estimate_largest_eigenvalue: matrix is not square");
  if (G.rows() == 0) return 0.0;
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  Eigen::VectorXd v(G.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(engine);
  v.normalize();
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Eigen::VectorXd w = G * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w);
    v = w / norm;
  }
  if (iterations == 0) lambda = v.dot(G * v);
  return lambda;
}

double residual_norm(const Eigen::SparseMatrix<double> &G, const Eigen::VectorXd &c, const Eigen::VectorXd &b) {
  if (G.rows() != G.cols() || G.cols() != c.size() || G.rows() != b.size())
    throw std::invalid_argument("residual_norm: dimension mismatch");
  return (G * c - b).norm();
}

RichardsonResult richardson(const Eigen::SparseMatrix<double> &G, const Eigen::VectorXd &b, const SolverConfig &config,
                            const Eigen::VectorXd &start) {
  return richardson(G, b, config, config.tol, start);
}

RichardsonResult richardson(const Eigen::SparseMatrix<double> &G, const Eigen::VectorXd &b, const SolverConfig &config,
                            double tol, const Eigen::VectorXd &start) {
  if (G.rows() != G.cols() || G.rows() != b.size() || (start.size() != 0 && start.size() != b.size()))
    throw std::invalid_argument("richardson: dimension mismatch");
  if (config.max_iterations < 0) throw std::invalid_argument("richardson: negative iteration cap");

  RichardsonResult result;
  result.c = start.size() == 0 ? Eigen::VectorXd::Zero(b.size()) : start;
  Eigen::VectorXd r = b - G * result.c;
  double norm = r.norm();
  result.residuals.push_back(norm);
  if (norm <= tol) {
    result.converged = true;
    return result;
  }

  const double lambda = estimate_largest_eigenvalue(G, config.power_iterations, config.seed);
  if (config.omega) {
    result.omega = *config.omega;
    if (!(result.omega > 0.0) || (lambda > 0.0 && result.omega >= 2.0 / lambda))
      throw std::invalid_argument("richardson: damping " + std::to_string(result.omega) + " outside (0, 2/lambda_max) with lambda_max ~ " +
                                  std::to_string(lambda));
  } else {
    if (lambda <= 0.0) throw std::invalid_argument("richardson: zero matrix with nonzero right-hand side");
    result.omega = 1.0 / lambda;
  }

  for (int it = 0; it < config.max_iterations; ++it) {
    result.c += result.omega * r;
    r = b - G * result.c;
    const double next = r.norm();
    if (next > norm * (1.0 + 1e-12) + 1e-300) result.monotone = false;
    norm = next;
    result.residuals.push_back(norm);
    ++result.iterations;
    if (norm <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::vector<QuarkletIndex> tree_closure(const std::vector<QuarkletIndex> &indices) {
  std::map<WaveletIndex, int> degree;
  auto raise = [&](const WaveletIndex &node, int p) {
    auto [it, inserted] = degree.emplace(node, p);
    if (!inserted) it->second = std::max(it->second, p);
  };
  for (const auto &index : indices) {
    if (!index.valid()) throw std::invalid_argument("tree_closure: invalid index " + to_string(index));
    raise(index.node(), index.p);
    for (auto up = parent(index.node()); up; up = parent(*up)) raise(*up, 0);
  }
  std::vector<WaveletIndex> nodes;
  for (const auto &[node, p] : degree) nodes.push_back(node);
  for (const auto &node : nodes) {
    if (node.is_root()) continue;
    raise(WaveletIndex{node.j, node.k ^ 1}, 0);
  }

  std::vector<QuarkletIndex> out;
  for (const auto &[node, p] : degree)
    for (int q = 0; q <= p; ++q) {
      if (node.is_root()) out.push_back({q, -1, 0});
      out.push_back({q, node.j, node.k});
    }
  std::sort(out.begin(), out.end(), set_order);
  return out;
}

SolveReport adaptive_coefficients(const TargetFunction &f, int j_max, int p_max, const SolverConfig &config,
                                  const WeightRule &rule) {
  return adaptive_coefficients(assemble_system(f, truncated_index_set(j_max, p_max), rule), config);
}

SolveReport adaptive_coefficients(const GramianSystem &system, const SolverConfig &config) {
  if (config.batch < 1) throw std::invalid_argument("adaptive_coefficients: batch must be positive");
  const auto positions = system.positions();
  const std::size_t n = system.indices.size();

  auto admissible = [&](std::vector<QuarkletIndex> candidates) {
    std::vector<std::size_t> out;
    for (const auto &index : tree_closure(candidates)) {
      auto it = positions.find(index);
      if (it != positions.end()) out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  std::vector<QuarkletIndex> seed{{0, -1, 0}, {0, 0, 0}};
  for (const auto &index : system.indices)
    if (index.p <= config.initial_degree && index.j <= config.initial_level) seed.push_back(index);
  std::vector<std::size_t> active = admissible(seed);
  std::vector<char> is_active(n, 0);
  for (std::size_t a : active) is_active[a] = 1;

  SolveReport report;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double previous = std::numeric_limits<double>::infinity();
  for (int round = 1; round <= config.max_rounds; ++round) {
    const Eigen::SparseMatrix<double> sub = principal_submatrix(system.G, active);
    Eigen::VectorXd local_b(static_cast<Eigen::Index>(active.size()));
    Eigen::VectorXd local_c(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) {
      local_b[static_cast<Eigen::Index>(i)] = system.b[static_cast<Eigen::Index>(active[i])];
      local_c[static_cast<Eigen::Index>(i)] = c[static_cast<Eigen::Index>(active[i])];
    }
    const RichardsonResult inner = richardson(sub, local_b, config, 0.5 * config.tol, local_c);
    for (std::size_t i = 0; i < active.size(); ++i)
      c[static_cast<Eigen::Index>(active[i])] = inner.c[static_cast<Eigen::Index>(i)];

    const Eigen::VectorXd r = system.G * c - system.b;
    const double residual = r.norm();
    report.rounds.push_back({round, active.size(), residual, inner.iterations, inner.monotone});
    report.monotone = report.monotone && inner.monotone;
    if (residual <= config.tol) {
      report.converged = true;
      break;
    }
    if (previous - residual < 1e-3 * previous) break;
    previous = residual;

    const Eigen::VectorXd score = r.cwiseAbs();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i)
      if (!is_active[i] && r[static_cast<Eigen::Index>(i)] != 0.0) candidates.push_back(i);
    if (candidates.empty()) break;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(config.batch), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double ra = score[static_cast<Eigen::Index>(a)];
                        const double rb = score[static_cast<Eigen::Index>(b)];
                        return ra != rb ? ra > rb : a < b;
                      });
    std::vector<QuarkletIndex> grown;
    for (std::size_t a : active) grown.push_back(system.indices[a]);
    for (std::size_t i = 0; i < take; ++i) grown.push_back(system.indices[candidates[i]]);
    active = admissible(grown);
    for (std::size_t a : active) is_active[a] = 1;
  }

  for (std::size_t a : active) {
    report.active.push_back(system.indices[a]);
    const double value = c[static_cast<Eigen::Index>(a)];
    if (value != 0.0) report.coefficients.set(system.indices[a], value);
  }
  return report;
}

void write_solver_log_csv(std::ostream &out, const SolveReport &report) {
  out << "round,active_size,residual\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto &round : report.rounds) out << round.round << ',' << round.active_size << ',' << round.residual << '\n';
}

}  // namespace quarklet
