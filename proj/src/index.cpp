#include "quarklet/index.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace quarklet {

namespace {
constexpr int kMaxLevel = 60;
}

std::string to_string(const WaveletIndex &index) {
  return "(" + std::to_string(index.j) + "," + std::to_string(index.k) + ")";
}

bool QuarkletIndex::valid() const {
  if (p < 0) return false;
  if (j == -1) return k == 0;
  return WaveletIndex{j, k}.valid();
}

std::string to_string(const QuarkletIndex &index) {
  return "(" + std::to_string(index.p) + "," + std::to_string(index.j) + "," +
         std::to_string(index.k) + ")";
}

std::pair<WaveletIndex, WaveletIndex> children(const WaveletIndex &index) {
  if (index.j >= kMaxLevel) throw std::out_of_range("children: level too deep " + to_string(index));
  return {WaveletIndex{index.j + 1, 2 * index.k}, WaveletIndex{index.j + 1, 2 * index.k + 1}};
}

std::optional<WaveletIndex> parent(const WaveletIndex &index) {
  if (index.j == 0) return std::nullopt;
  return WaveletIndex{index.j - 1, index.k / 2};
}

bool is_descendant(const WaveletIndex &lambda, const WaveletIndex &mu) {
  if (lambda.j <= mu.j) return false;
  return (lambda.k >> (lambda.j - mu.j)) == mu.k;
}

std::vector<WaveletIndex> upsilon(const WaveletIndex &index) {
  std::vector<WaveletIndex> chain;
  chain.reserve(static_cast<std::size_t>(index.j) + 1);
  WaveletIndex current = index;
  while (true) {
    chain.push_back(current);
    if (current.is_right() || current.is_root()) break;
    current = *parent(current);
  }
  return chain;
}

// ---------------------------------------------------------------------------

bool WaveletTree::is_complete_tree(const std::set<WaveletIndex> &nodes) {
  if (nodes.empty() || nodes.count(kRoot) == 0) return false;
  for (const auto &node : nodes) {
    if (!node.valid() || node.j > kMaxLevel) return false;
    if (auto up = parent(node); up && nodes.count(*up) == 0) return false;
    if (node.j < kMaxLevel) {
      auto [left, right] = children(node);
      if (nodes.count(left) != nodes.count(right)) return false;
    }
  }
  return true;
}

WaveletTree WaveletTree::from_nodes(const std::set<WaveletIndex> &nodes) {
  if (!is_complete_tree(nodes)) throw std::invalid_argument("node set is not a complete tree rooted at (0,0)");
  WaveletTree tree;
  tree.nodes_ = nodes;
  return tree;
}

bool WaveletTree::is_leaf(const WaveletIndex &index) const {
  return contains(index) && !contains(children(index).first);
}

int WaveletTree::depth() const {
  int depth = 0;
  for (const auto &node : nodes_) depth = std::max(depth, node.j);
  return depth;
}

std::vector<WaveletIndex> WaveletTree::leaves() const {
  std::vector<WaveletIndex> out;
  for (const auto &node : depth_first())
    if (is_leaf(node)) out.push_back(node);
  return out;
}

std::vector<WaveletIndex> WaveletTree::depth_first() const {
  std::vector<WaveletIndex> order;
  order.reserve(nodes_.size());
  std::vector<WaveletIndex> stack{kRoot};
  while (!stack.empty()) {
    WaveletIndex node = stack.back();
    stack.pop_back();
    order.push_back(node);
    auto [left, right] = children(node);
    if (contains(left)) {
      stack.push_back(right);
      stack.push_back(left);
    }
  }
  return order;
}

void WaveletTree::refine(const WaveletIndex &leaf) {
  if (!is_leaf(leaf)) throw std::invalid_argument("refine: " + to_string(leaf) + " is not a leaf");
  auto [left, right] = children(leaf);
  nodes_.insert(left);
  nodes_.insert(right);
}

WaveletTree refine_space(const WaveletTree &tree, const WaveletIndex &leaf) {
  WaveletTree refined = tree;
  refined.refine(leaf);
  return refined;
}

int refinement_count(const WaveletIndex &lambda, const WaveletTree &tree) {
  if (!tree.contains(lambda)) throw std::invalid_argument("refinement_count: " + to_string(lambda) + " not in tree");
  // A complete subtree with m nodes has (m+1)/2 leaves.
  std::size_t subtree = 0;
  for (const auto &node : tree.nodes())
    if (node == lambda || is_descendant(node, lambda)) ++subtree;
  return static_cast<int>((subtree + 1) / 2) - 1;
}

// ---------------------------------------------------------------------------

QuarkletTree QuarkletTree::from_leaf_degrees(WaveletTree base,
                                             const std::map<WaveletIndex, int> &leaf_degrees) {
  QuarkletTree tree{std::move(base), {}};
  for (const auto &leaf : tree.base.leaves()) {
    auto it = leaf_degrees.find(leaf);
    if (it == leaf_degrees.end()) throw std::invalid_argument("missing degree for leaf " + to_string(leaf));
    if (it->second < 0) throw std::invalid_argument("negative degree for leaf " + to_string(leaf));
    for (const auto &mu : upsilon(leaf)) tree.pmax[mu] = it->second;
  }
  return tree;
}

int QuarkletTree::degree(const WaveletIndex &node) const {
  auto it = pmax.find(node);
  if (it == pmax.end()) throw std::invalid_argument("no degree stored for " + to_string(node));
  return it->second;
}

std::vector<QuarkletIndex> QuarkletTree::active_indices() const {
  std::vector<QuarkletIndex> out;
  for (const auto &node : base.depth_first()) {
    const int top = degree(node);
    for (int p = 0; p <= top; ++p) {
      if (node.is_root()) out.push_back({p, -1, 0});
      out.push_back({p, node.j, node.k});
    }
  }
  return out;
}

bool validate_quarklet_tree(const QuarkletTree &tree) {
  if (!WaveletTree::is_complete_tree(tree.base.nodes())) return false;
  if (tree.pmax.size() != tree.base.size()) return false;
  for (const auto &[node, p] : tree.pmax)
    if (!tree.base.contains(node) || p < 0) return false;
  for (const auto &leaf : tree.base.leaves()) {
    const int p = tree.pmax.at(leaf);
    for (const auto &mu : upsilon(leaf))
      if (tree.pmax.at(mu) != p) return false;
  }
  return true;
}

std::int64_t quarklet_cardinality(const QuarkletTree &tree) {
  if (!validate_quarklet_tree(tree)) throw std::invalid_argument("quarklet_cardinality: invalid quarklet tree");
  std::int64_t total = static_cast<std::int64_t>(tree.base.size());
  for (const auto &[node, p] : tree.pmax) total += p;
  return total;
}

QuarkletTree derive_pmax(const WaveletTree &subtree, const WaveletTree &refined) {
  for (const auto &node : subtree.nodes())
    if (!refined.contains(node)) throw std::invalid_argument("derive_pmax: subtree node " + to_string(node) + " missing from refined tree");
  std::map<WaveletIndex, int> degrees;
  for (const auto &leaf : subtree.leaves()) degrees[leaf] = refinement_count(leaf, refined);
  return QuarkletTree::from_leaf_degrees(subtree, degrees);
}

namespace {
nlohmann::ordered_json node_json(const QuarkletTree &tree, const WaveletIndex &node) {
  nlohmann::ordered_json out;
  out["j"] = node.j;
  out["k"] = node.k;
  out["pmax"] = tree.degree(node);
  out["children"] = nlohmann::ordered_json::array();
  if (!tree.base.is_leaf(node)) {
    auto [left, right] = children(node);
    out["children"].push_back(node_json(tree, left));
    out["children"].push_back(node_json(tree, right));
  }
  return out;
}
}  // namespace

std::string tree_to_json(const QuarkletTree &tree, int indent) {
  return node_json(tree, kRoot).dump(indent);
}

}  // namespace quarklet
