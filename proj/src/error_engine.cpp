#include "quarklet/error_engine.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace quarklet {

void CoefficientSequence::set(const QuarkletIndex &index, double value) {
  if (!index.valid()) throw std::invalid_argument("invalid quarklet index " + to_string(index));
  values_[index] = value;
}

void CoefficientSequence::add(const QuarkletIndex &index, double value) {
  if (!index.valid()) throw std::invalid_argument("invalid quarklet index " + to_string(index));
  values_[index] += value;
}

double CoefficientSequence::get(const QuarkletIndex &index) const {
  auto it = values_.find(index);
  return it == values_.end() ? 0.0 : it->second;
}

int CoefficientSequence::max_level() const {
  int level = -1;
  for (const auto &[index, value] : values_) level = std::max(level, index.j);
  return level;
}

int CoefficientSequence::max_degree() const {
  int degree = -1;
  for (const auto &[index, value] : values_) degree = std::max(degree, index.p);
  return degree;
}

double CoefficientSequence::squared_norm() const {
  double sum = 0.0;
  for (const auto &[index, value] : values_) sum += value * value;
  return sum;
}

CoefficientSequence CoefficientSequence::restricted_to(const std::vector<QuarkletIndex> &indices) const {
  CoefficientSequence out;
  for (const auto &index : indices) {
    auto it = values_.find(index);
    if (it != values_.end()) out.values_.insert(*it);
  }
  return out;
}

void write_coefficients_csv(std::ostream &out, const CoefficientSequence &c) {
  out << "p,j,k,c\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto &[index, value] : c.values())
    out << index.p << ',' << index.j << ',' << index.k << ',' << value << '\n';
}

CoefficientSequence read_coefficients_csv(std::istream &in) {
  CoefficientSequence c;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("p,", 0) == 0) continue;
    std::istringstream row(line);
    QuarkletIndex index;
    double value = 0.0;
    char sep1 = 0, sep2 = 0, sep3 = 0;
    if (!(row >> index.p >> sep1 >> index.j >> sep2 >> index.k >> sep3 >> value) || sep1 != ',' ||
        sep2 != ',' || sep3 != ',')
      throw std::invalid_argument("coefficient csv: malformed line " + std::to_string(line_number));
    c.set(index, value);
  }
  return c;
}

void save_coefficients(const std::string &path, const CoefficientSequence &c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_coefficients_csv(out, c);
}

CoefficientSequence load_coefficients(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_coefficients_csv(in);
}

// ---------------------------------------------------------------------------

CoefficientErrorOracle::CoefficientErrorOracle(const CoefficientSequence &c) {
  for (const auto &[index, value] : c.values()) {
    NodeMass &node = nodes_[index.node()];
    if (node.tail.size() < static_cast<std::size_t>(index.p) + 1) node.tail.resize(index.p + 1, 0.0);
    const double mass = value * value;
    // tail[q] accumulates everything strictly above q.
    for (int q = 0; q < index.p; ++q) node.tail[q] += mass;
    node.own += mass;
    total_ += mass;
  }

  std::map<int, std::set<WaveletIndex>> by_level;
  for (auto &[index, node] : nodes_) {
    node.subtree = node.own;
    by_level[index.j].insert(index);
  }
  if (by_level.empty()) return;
  for (int level = by_level.rbegin()->first; level >= 1; --level) {
    for (const auto &index : by_level[level]) {
      const WaveletIndex up = *parent(index);
      nodes_[up].subtree += nodes_.at(index).subtree;
      by_level[level - 1].insert(up);
    }
  }
}

double CoefficientErrorOracle::tail(const WaveletIndex &node, int p) const {
  auto it = nodes_.find(node);
  if (it == nodes_.end() || static_cast<std::size_t>(p) >= it->second.tail.size()) return 0.0;
  return it->second.tail[p];
}

double CoefficientErrorOracle::subtree(const WaveletIndex &node) const {
  auto it = nodes_.find(node);
  return it == nodes_.end() ? 0.0 : it->second.subtree;
}

double CoefficientErrorOracle::local_error(const WaveletIndex &lambda, int p) const {
  if (!lambda.valid()) throw std::invalid_argument("local_error: invalid index " + to_string(lambda));
  if (p < 0) throw std::invalid_argument("local_error: negative degree");
  double sum = 0.0;
  for (const auto &mu : upsilon(lambda)) sum += tail(mu, p);
  if (lambda.j < 60) {
    auto [left, right] = children(lambda);
    sum += subtree(left) + subtree(right);
  }
  return sum;
}

double local_error(const WaveletIndex &lambda, int p, const CoefficientSequence &c) {
  return CoefficientErrorOracle(c).local_error(lambda, p);
}

// ---------------------------------------------------------------------------

namespace {
double harmonic(double a, double b) {
  const double denominator = a + b;
  if (denominator == 0.0) return 0.0;
  return a * b / denominator;
}
}  // namespace

double tilde_e(double e_lambda, double tilde_e_parent) { return harmonic(e_lambda, tilde_e_parent); }

double combine_E(double E_child1, double E_child2, double e_r) {
  return std::min(E_child1 + E_child2, e_r);
}

double combine_tilde_E(double E_j, double tilde_E_prev) { return harmonic(E_j, tilde_E_prev); }

PenaltyChoice combine_q_s(double q1, const WaveletIndex &s1, double q2, const WaveletIndex &s2,
                          double tilde_E_r) {
  const bool first = q1 >= q2;
  return {std::min(first ? q1 : q2, tilde_E_r), first ? s1 : s2};
}

double global_error(const QuarkletTree &tree, const LocalErrorOracle &oracle) {
  double sum = 0.0;
  for (const auto &leaf : tree.base.leaves()) sum += oracle.local_error(leaf, tree.degree(leaf));
  return sum;
}

}  // namespace quarklet
