#include "quarklet/haar.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

namespace quarklet {

namespace {

constexpr int kMaxBisections = 40;
constexpr int kGradedLayers = 48;
constexpr double kMaxCellLength = 1.0 / 64.0;

double ipow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

template <class F>
double gauss20(const F &f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// Bisects until a 20-point rule agrees with the sum over both halves.
template <class F>
bool adaptive_gauss(const F &f, double a, double b, double whole, int depth, double &result) {
  const double mid = 0.5 * (a + b);
  const double left = gauss20(f, a, mid);
  const double right = gauss20(f, mid, b);
  const double halves = left + right;
  if (std::abs(halves - whole) <= 1e-12 * std::abs(halves) || std::abs(halves - whole) <= 1e-17 * (b - a)) {
    result += halves;
    return true;
  }
  if (depth == 0) return false;
  return adaptive_gauss(f, a, mid, left, depth - 1, result) && adaptive_gauss(f, mid, b, right, depth - 1, result);
}

template <class F>
bool integrate_smooth(const F &f, double a, double b, double &result) {
  return adaptive_gauss(f, a, b, gauss20(f, a, b), kMaxBisections, result);
}

bool is_singular(double x, const std::vector<double> &points) {
  return std::any_of(points.begin(), points.end(), [x](double s) { return s == x; });
}

// Geometrically graded layers toward whichever endpoint is singular.
template <class F>
bool integrate_cell(const F &f, double a, double b, const std::vector<double> &singular, double &result) {
  const bool left = is_singular(a, singular);
  const bool right = is_singular(b, singular);
  if (!left && !right) return integrate_smooth(f, a, b, result);
  if (left && right) {
    const double mid = 0.5 * (a + b);
    return integrate_cell(f, a, mid, singular, result) && integrate_cell(f, mid, b, singular, result);
  }
  const double length = b - a;
  for (int layer = 0; layer < kGradedLayers; ++layer) {
    const double outer = length * std::ldexp(1.0, -layer);
    const double inner = 0.5 * outer;
    const double lo = left ? a + inner : b - outer;
    const double hi = left ? a + outer : b - inner;
    if (!integrate_smooth(f, lo, hi, result)) return false;
  }
  const double tail = length * std::ldexp(1.0, -kGradedLayers);
  result += left ? gauss20(f, a, a + tail) : gauss20(f, b - tail, b);
  return true;
}

// Integral of two monomial pieces; dyadic pieces are either nested or disjoint.
double piece_product(const MonomialPiece &x, const MonomialPiece &y) {
  const bool x_coarse = (x.b - x.a) >= (y.b - y.a);
  const MonomialPiece &coarse = x_coarse ? x : y;
  const MonomialPiece &fine = x_coarse ? y : x;
  if (fine.a < coarse.a || fine.b > coarse.b) return 0.0;
  const double h_coarse = coarse.b - coarse.a;
  const double h_fine = fine.b - fine.a;
  const double shift = (fine.a - coarse.a) / h_coarse;
  const double ratio = h_fine / h_coarse;
  // On the fine piece, t_coarse = shift + ratio * t_fine.
  double sum = 0.0;
  double binomial = 1.0;
  for (int i = 0; i <= coarse.degree; ++i) {
    sum += binomial * ipow(shift, coarse.degree - i) * ipow(ratio, i) / (i + fine.degree + 1);
    binomial = binomial * (coarse.degree - i) / (i + 1);
  }
  return coarse.scale * fine.scale * h_fine * sum;
}

// Exact moments of the singular power-law targets on pieces touching the singularity.
std::optional<double> closed_form_load(const TargetFunction &f, const MonomialPiece &piece) {
  const double h = piece.b - piece.a;
  if (f.power && piece.a == 0.0) {
    const double alpha = *f.power;
    return piece.scale * std::pow(h, alpha + 1.0) / (alpha + piece.degree + 1.0);
  }
  if (f.reflected_power && piece.b == 1.0) {
    const double alpha = *f.reflected_power;
    return piece.scale * std::pow(h, alpha + 1.0) * std::beta(alpha + 1.0, piece.degree + 1.0);
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------

WeightRule::WeightRule(double delta_) : delta(delta_) {
  if (!(delta > 0.5)) throw std::invalid_argument("WeightRule: exponent must exceed 1/2");
}

double WeightRule::operator()(int p) const {
  if (p < 0) throw std::invalid_argument("weight: negative degree");
  return std::pow(p + 1.0, -delta);
}

double weight(int p, const WeightRule &rule) { return rule(p); }

double MonomialPiece::operator()(double x) const {
  if (x < a || x >= b) return 0.0;
  return scale * ipow((x - a) / (b - a), degree);
}

double QuarkletFunction::operator()(double x) const {
  double sum = 0.0;
  for (const auto &piece : pieces) sum += piece(x);
  return sum;
}

QuarkletFunction quarklet_function(const QuarkletIndex &index) {
  if (index.p < 0 || index.j < -1) throw std::invalid_argument("quarklet_function: invalid index " + to_string(index));
  QuarkletFunction out{index, {}};
  if (index.j == -1) {
    const double a = static_cast<double>(index.k);
    out.pieces.push_back({a, a + 1.0, 1.0, index.p});
    return out;
  }
  const double h = std::ldexp(1.0, -index.j);
  const double a = static_cast<double>(index.k) * h;
  const double scale = std::pow(2.0, 0.5 * index.j);
  out.pieces.push_back({a, a + 0.5 * h, scale, index.p});
  out.pieces.push_back({a + 0.5 * h, a + h, -scale, index.p});
  return out;
}

double quark_eval(int p, double x) {
  if (p < 0) throw std::invalid_argument("quark_eval: negative degree");
  if (x < 0.0 || x >= 1.0) return 0.0;
  return ipow(x, p);
}

double quarklet_eval(int p, int j, std::int64_t k, double x) {
  if (p < 0 || j < -1) throw std::invalid_argument("quarklet_eval: invalid index");
  if (j == -1) return quark_eval(p, x - static_cast<double>(k));
  const double y = std::ldexp(x, j) - static_cast<double>(k);
  if (y < 0.0 || y >= 1.0) return 0.0;
  const double scale = std::pow(2.0, 0.5 * j);
  return y < 0.5 ? scale * ipow(2.0 * y, p) : -scale * ipow(2.0 * y - 1.0, p);
}

double inner_product(const QuarkletIndex &lambda, const QuarkletIndex &mu) {
  const QuarkletFunction f = quarklet_function(lambda);
  const QuarkletFunction g = quarklet_function(mu);
  double sum = 0.0;
  for (const auto &x : f.pieces)
    for (const auto &y : g.pieces) sum += piece_product(x, y);
  return sum;
}

std::vector<QuarkletIndex> truncated_index_set(int j_max, int p_max) {
  if (j_max < 0 || p_max < 0) throw std::invalid_argument("truncated_index_set: negative bound");
  if (j_max > 30) throw std::out_of_range("truncated_index_set: j_max too large");
  std::vector<QuarkletIndex> out;
  for (int p = 0; p <= p_max; ++p) out.push_back({p, -1, 0});
  for (int j = 0; j <= j_max; ++j)
    for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
      for (int p = 0; p <= p_max; ++p) out.push_back({p, j, k});
  return out;
}

// ---------------------------------------------------------------------------

TargetFunction power_target(double alpha) {
  TargetFunction f;
  f.eval = [alpha](double x) { return x <= 0.0 ? 0.0 : std::pow(x, alpha); };
  f.singular_points = {0.0};
  f.power = alpha;
  return f;
}

TargetFunction reflected_power_target(double alpha) {
  TargetFunction f;
  f.eval = [alpha](double x) { return x >= 1.0 ? 0.0 : std::pow(1.0 - x, alpha); };
  f.singular_points = {1.0};
  f.reflected_power = alpha;
  return f;
}

TargetFunction expansion_target(const CoefficientSequence &c, const WeightRule &rule) {
  auto expansion = std::make_shared<const Expansion>(c, rule);
  TargetFunction f;
  f.eval = [expansion](double x) { return (*expansion)(x); };
  return f;
}

std::unordered_map<QuarkletIndex, std::size_t> GramianSystem::positions() const {
  std::unordered_map<QuarkletIndex, std::size_t> out;
  out.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out.emplace(indices[i], i);
  return out;
}

Eigen::SparseMatrix<double> assemble_gramian(const std::vector<QuarkletIndex> &indices, const WeightRule &rule) {
  std::map<WaveletIndex, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (!indices[i].valid()) throw std::invalid_argument("assemble_gramian: invalid index " + to_string(indices[i]));
    groups[indices[i].node()].push_back(i);
  }
  std::vector<QuarkletFunction> functions;
  functions.reserve(indices.size());
  for (const auto &index : indices) functions.push_back(quarklet_function(index));

  auto product = [&](std::size_t a, std::size_t b) {
    double sum = 0.0;
    for (const auto &x : functions[a].pieces)
      for (const auto &y : functions[b].pieces) sum += piece_product(x, y);
    return rule(indices[a].p) * rule(indices[b].p) * sum;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto &[node, members] : groups) {
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x; y < members.size(); ++y) {
        const double value = product(members[x], members[y]);
        if (value == 0.0) continue;
        triplets.emplace_back(members[x], members[y], value);
        if (x != y) triplets.emplace_back(members[y], members[x], value);
      }
    for (auto up = parent(node); up; up = parent(*up)) {
      auto it = groups.find(*up);
      if (it == groups.end()) continue;
      for (std::size_t a : members)
        for (std::size_t b : it->second) {
          const double value = product(a, b);
          if (value == 0.0) continue;
          triplets.emplace_back(a, b, value);
          triplets.emplace_back(b, a, value);
        }
    }
  }
  const auto n = static_cast<Eigen::Index>(indices.size());
  Eigen::SparseMatrix<double> G(n, n);
  G.setFromTriplets(triplets.begin(), triplets.end());
  return G;
}

Eigen::VectorXd assemble_rhs(const TargetFunction &f, const std::vector<QuarkletIndex> &indices,
                             const WeightRule &rule) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const QuarkletFunction psi = quarklet_function(indices[i]);
    double sum = 0.0;
    for (const auto &piece : psi.pieces) {
      if (auto exact = closed_form_load(f, piece)) {
        sum += *exact;
        continue;
      }
      auto integrand = [&](double x) { return f(x) * piece.scale * ipow((x - piece.a) / (piece.b - piece.a), piece.degree); };
      double value = 0.0;
      if (!integrate_cell(integrand, piece.a, piece.b, f.singular_points, value))
        throw QuadratureError("assemble_rhs: quadrature did not converge for " + to_string(indices[i]), indices[i]);
      sum += value;
    }
    b[static_cast<Eigen::Index>(i)] = rule(indices[i].p) * sum;
  }
  return b;
}

GramianSystem assemble_system(const TargetFunction &f, std::vector<QuarkletIndex> indices, const WeightRule &rule) {
  GramianSystem system;
  system.G = assemble_gramian(indices, rule);
  system.b = assemble_rhs(f, indices, rule);
  system.indices = std::move(indices);
  return system;
}

// ---------------------------------------------------------------------------

Expansion::Expansion(const CoefficientSequence &c, const WeightRule &rule) {
  std::vector<double> points{0.0, 1.0};
  for (const auto &[index, value] : c.values()) {
    if (value == 0.0) continue;
    const Term term{index.p, value * rule(index.p)};
    if (index.is_generator()) {
      generator_.push_back(term);
      continue;
    }
    const WaveletIndex node = index.node();
    auto &bucket = terms_[node];
    if (bucket.empty()) {
      const double h = std::ldexp(1.0, -node.j);
      points.push_back(static_cast<double>(node.k) * h);
      points.push_back((static_cast<double>(node.k) + 0.5) * h);
      points.push_back((static_cast<double>(node.k) + 1.0) * h);
    }
    bucket.push_back(term);
    max_level_ = std::max(max_level_, node.j);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  breakpoints_ = std::move(points);
}

double Expansion::operator()(double x) const {
  if (x < 0.0 || x >= 1.0) return 0.0;
  double sum = 0.0;
  for (const auto &term : generator_) sum += term.weighted * ipow(x, term.p);
  for (int j = 0; j <= max_level_; ++j) {
    const double scaled = std::ldexp(x, j);
    const double floor = std::floor(scaled);
    auto it = terms_.find(WaveletIndex{j, static_cast<std::int64_t>(floor)});
    if (it == terms_.end()) continue;
    const double y = scaled - floor;
    const double amplitude = std::pow(2.0, 0.5 * j);
    const bool first_half = y < 0.5;
    const double t = first_half ? 2.0 * y : 2.0 * y - 1.0;
    for (const auto &term : it->second) {
      const double value = amplitude * ipow(t, term.p);
      sum += term.weighted * (first_half ? value : -value);
    }
  }
  return sum;
}

double synthesize(const CoefficientSequence &c, const WeightRule &rule, double x) { return Expansion(c, rule)(x); }

double l2_error(const TargetFunction &f, const CoefficientSequence &c, const WeightRule &rule) {
  const Expansion expansion(c, rule);
  std::vector<double> points = expansion.breakpoints();
  for (double s : f.singular_points)
    if (s > 0.0 && s < 1.0) points.push_back(s);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  auto integrand = [&](double x) {
    const double difference = f(x) - expansion(x);
    return difference * difference;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / kMaxCellLength)));
    for (int piece = 0; piece < pieces; ++piece) {
      const double lo = a + (b - a) * piece / pieces;
      const double hi = piece + 1 == pieces ? b : a + (b - a) * (piece + 1) / pieces;
      if (!integrate_cell(integrand, lo, hi, f.singular_points, total))
        throw QuadratureError("l2_error: quadrature did not converge on [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
  }
  return std::sqrt(total);
}

void write_gramian_csv(std::ostream &out, const GramianSystem &system) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto label = [](const QuarkletIndex &index) {
    return std::to_string(index.p) + ":" + std::to_string(index.j) + ":" + std::to_string(index.k);
  };
  out << "index";
  for (const auto &index : system.indices) out << ',' << label(index);
  out << ",b\n";
  const Eigen::MatrixXd dense(system.G);
  for (std::size_t row = 0; row < system.indices.size(); ++row) {
    out << label(system.indices[row]);
    for (Eigen::Index col = 0; col < dense.cols(); ++col) out << ',' << dense(static_cast<Eigen::Index>(row), col);
    out << ',' << system.b[static_cast<Eigen::Index>(row)] << '\n';
  }
}

void write_samples_csv(std::ostream &out, const std::function<double(double)> &f, int count) {
  if (count < 1) throw std::invalid_argument("write_samples_csv: need at least one sample");
  out << "x,value\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < count; ++i) {
    const double x = static_cast<double>(i) / count;
    out << x << ',' << f(x) << '\n';
  }
}

}  // namespace quarklet
