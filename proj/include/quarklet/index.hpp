#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace quarklet {

/// A node (j,k) of the dyadic interval tree on [0,1), I_{j,k} = 2^{-j}[k,k+1).
///
/// The generator layer j = -1 is folded into the root (0,0) and never appears
/// as a WaveletIndex.
struct WaveletIndex {
  int j = 0;
  std::int64_t k = 0;

  auto operator<=>(const WaveletIndex &) const = default;

  bool is_root() const { return j == 0 && k == 0; }
  bool is_right() const { return (k & 1) != 0; }
  bool valid() const { return j >= 0 && k >= 0 && k < (std::int64_t{1} << j); }
};

inline constexpr WaveletIndex kRoot{0, 0};

std::string to_string(const WaveletIndex &index);

/// Frame element identifier (p,j,k). j = -1 addresses the quark slot that
/// shares the root node.
struct QuarkletIndex {
  int p = 0;
  int j = 0;
  std::int64_t k = 0;

  auto operator<=>(const QuarkletIndex &) const = default;

  bool is_generator() const { return j == -1; }
  bool valid() const;
  /// The wavelet node owning this coefficient; generator slots map to the root.
  WaveletIndex node() const { return j < 0 ? kRoot : WaveletIndex{j, k}; }
};

std::string to_string(const QuarkletIndex &index);

struct WaveletIndexHash {
  std::size_t operator()(const WaveletIndex &index) const {
    return std::hash<std::int64_t>{}((static_cast<std::int64_t>(index.j) << 56) ^ index.k);
  }
};

std::pair<WaveletIndex, WaveletIndex> children(const WaveletIndex &index);
std::optional<WaveletIndex> parent(const WaveletIndex &index);

/// True iff I_lambda is a proper subset of I_mu.
bool is_descendant(const WaveletIndex &lambda, const WaveletIndex &mu);

/// The chain {mu : lambda >= mu >= mu_lambda}, starting at lambda and walking
/// rootwards. mu_lambda is the deepest right node on the path, or the root
/// if every node on the path is a left node.
std::vector<WaveletIndex> upsilon(const WaveletIndex &index);

/// Complete, ancestor-closed binary tree of wavelet indices rooted at (0,0).
///
/// Every instance is valid; mutation happens only through refine().
class WaveletTree {
 public:
  WaveletTree() : nodes_{kRoot} {}

  /// Throws std::invalid_argument if the set is not a complete tree rooted at (0,0).
  static WaveletTree from_nodes(const std::set<WaveletIndex> &nodes);
  static bool is_complete_tree(const std::set<WaveletIndex> &nodes);

  bool contains(const WaveletIndex &index) const { return nodes_.count(index) != 0; }
  bool is_leaf(const WaveletIndex &index) const;
  std::size_t size() const { return nodes_.size(); }
  int depth() const;

  const std::set<WaveletIndex> &nodes() const { return nodes_; }
  std::vector<WaveletIndex> leaves() const;

  /// Nodes in canonical depth-first order, left child first.
  std::vector<WaveletIndex> depth_first() const;

  /// Adds both children of a leaf. Throws std::invalid_argument otherwise.
  void refine(const WaveletIndex &leaf);

  bool operator==(const WaveletTree &) const = default;

 private:
  std::set<WaveletIndex> nodes_;
};

WaveletTree refine_space(const WaveletTree &tree, const WaveletIndex &leaf);

/// r(lambda, T) = |leaves of the subtree below lambda| - 1.
/// Throws std::invalid_argument if lambda is not in the tree.
int refinement_count(const WaveletIndex &lambda, const WaveletTree &tree);

/// Wavelet tree with a maximal polynomial degree on every node.
///
/// Degrees are stored for all nodes so that inconsistent assignments can be
/// represented and rejected by validate_quarklet_tree().
struct QuarkletTree {
  WaveletTree base;
  std::map<WaveletIndex, int> pmax;

  /// Induces inner-node degrees along the upsilon chain of each leaf.
  static QuarkletTree from_leaf_degrees(WaveletTree base,
                                        const std::map<WaveletIndex, int> &leaf_degrees);

  int degree(const WaveletIndex &node) const;

  /// All (p,j,k) in the tree, including the quark slots (p,-1,0) of the root.
  std::vector<QuarkletIndex> active_indices() const;
};

bool validate_quarklet_tree(const QuarkletTree &tree);

/// #T = |T| + sum of p_max over all nodes. Throws on an invalid tree.
std::int64_t quarklet_cardinality(const QuarkletTree &tree);

/// Trimming: p_max(lambda) = r(lambda, refined) on the leaves of `subtree`.
/// Throws std::invalid_argument unless subtree is contained in refined.
QuarkletTree derive_pmax(const WaveletTree &subtree, const WaveletTree &refined);

/// JSON dump {"j","k","pmax","children":[...]} in depth-first order.
std::string tree_to_json(const QuarkletTree &tree, int indent = 2);

}  // namespace quarklet

template <>
struct std::hash<quarklet::QuarkletIndex> {
  std::size_t operator()(const quarklet::QuarkletIndex &index) const {
    return quarklet::WaveletIndexHash{}({index.j + 1, index.k}) * 31u + static_cast<std::size_t>(index.p);
  }
};
