#include "mblm/trie.hh"

#include <algorithm>
#include <numeric>
#include <utility>

#include "mblm/error.hh"

namespace mblm {
namespace {

// Sums the children's distributions into one sorted entry list.
std::vector<DistEntry> sum_children(const std::vector<TrieNode> &nodes, const TrieNode &parent) {
  std::vector<DistEntry> buf;
  std::size_t total = 0;
  for (const auto &c : parent.children) total += nodes[c.node].distribution.size();
  buf.reserve(total);
  for (const auto &c : parent.children) {
    auto e = nodes[c.node].distribution.entries();
    buf.insert(buf.end(), e.begin(), e.end());
  }
  if (parent.children.size() > 1) {
    std::sort(buf.begin(), buf.end(),
              [](const DistEntry &a, const DistEntry &b) { return a.token < b.token; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < buf.size(); ++r) {
      if (w > 0 && buf[w - 1].token == buf[r].token)
        buf[w - 1].count += buf[r].count;
      else
        buf[w++] = buf[r];
    }
    buf.resize(w);
  }
  return buf;
}

}  // namespace

Trie::Trie(std::vector<std::size_t> level_positions) : level_positions_(std::move(level_positions)) {
  nodes_.emplace_back();
}

NodeIndex Trie::add_node(TokenId value, std::uint32_t depth) {
  if (nodes_.size() >= kNoNode) throw Error(ErrorKind::kUnsupportedOperation, "trie node limit reached");
  const auto idx = static_cast<NodeIndex>(nodes_.size());
  auto &n = nodes_.emplace_back();
  n.value = value;
  n.depth = depth;
  return idx;
}

Trie Trie::build(const InstanceBase &instances, std::vector<std::size_t> level_positions) {
  Trie trie(std::move(level_positions));
  const std::size_t levels = trie.levels();
  const std::size_t row = levels + 1;
  const std::size_t n = instances.size();

  std::vector<TokenId> keys(n * row);
  for (std::size_t i = 0; i < n; ++i) {
    const auto inst = instances[i];
    TokenId *k = keys.data() + i * row;
    for (std::size_t d = 0; d < levels; ++d) k[d] = inst.feature(trie.level_positions_[d]);
    k[levels] = inst.target;
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const TokenId *ka = keys.data() + std::size_t{a} * row;
    const TokenId *kb = keys.data() + std::size_t{b} * row;
    return std::lexicographical_compare(ka, ka + row, kb, kb + row);
  });

  std::vector<NodeIndex> path(levels + 1, 0);
  const TokenId *prev = nullptr;
  for (std::uint32_t i : order) {
    const TokenId *k = keys.data() + std::size_t{i} * row;
    std::size_t d = 0;
    if (prev != nullptr)
      while (d < levels && k[d] == prev[d]) ++d;
    for (; d < levels; ++d) {
      const NodeIndex child = trie.add_node(k[d], static_cast<std::uint32_t>(d + 1));
      trie.nodes_[path[d]].children.push_back({k[d], child});
      path[d + 1] = child;
    }
    trie.nodes_[path[levels]].distribution.add(k[levels]);
    prev = k;
  }

  // Children always have larger indices than their parent.
  for (std::size_t i = trie.nodes_.size(); i-- > 0;) {
    auto &node = trie.nodes_[i];
    if (!node.children.empty()) node.distribution.assign_sorted(sum_children(trie.nodes_, node));
  }
  return trie;
}

void Trie::insert(const InstanceView &inst) {
  NodeIndex cur = 0;
  nodes_[cur].distribution.add(inst.target);
  for (std::size_t level = 1; level <= levels(); ++level) {
    const TokenId v = level_value(inst.context, level);
    const auto &ch = nodes_[cur].children;
    auto it = std::lower_bound(ch.begin(), ch.end(), v,
                               [](const ChildRef &c, TokenId t) { return c.value < t; });
    if (it != ch.end() && it->value == v) {
      cur = it->node;
    } else {
      const auto slot = it - ch.begin();
      const NodeIndex child = add_node(v, static_cast<std::uint32_t>(level));
      auto &children = nodes_[cur].children;  // add_node may have moved nodes_
      children.insert(children.begin() + slot, ChildRef{v, child});
      cur = child;
    }
    nodes_[cur].distribution.add(inst.target);
  }
}

NodeIndex Trie::find_child(NodeIndex parent, TokenId value) const {
  const auto &ch = nodes_[parent].children;
  auto it = std::lower_bound(ch.begin(), ch.end(), value,
                             [](const ChildRef &c, TokenId t) { return c.value < t; });
  return (it != ch.end() && it->value == value) ? it->node : kNoNode;
}

NodeIndex Trie::append_child(NodeIndex parent, TokenId value, ClassDistribution dist) {
  const auto &ch = nodes_[parent].children;
  if (!ch.empty() && ch.back().value >= value)
    throw Error(ErrorKind::kCorruptModel, "children out of order");
  const NodeIndex child = add_node(value, nodes_[parent].depth + 1);
  nodes_[parent].children.push_back({value, child});
  nodes_[child].distribution = std::move(dist);
  return child;
}

TrieStats Trie::stats() const {
  TrieStats s;
  s.nodes = nodes_.size();
  s.depth_histogram.assign(levels() + 1, 0);
  s.bytes = sizeof(Trie) + nodes_.capacity() * sizeof(TrieNode);
  for (const auto &n : nodes_) {
    if (n.depth < s.depth_histogram.size()) ++s.depth_histogram[n.depth];
    s.distribution_entries += n.distribution.size();
    s.bytes += n.children.capacity() * sizeof(ChildRef) + n.distribution.heap_bytes();
  }
  return s;
}

std::size_t Trie::prune_redundant() {
  const std::size_t n = nodes_.size();
  if (n <= 1 || nodes_[0].distribution.empty()) return 0;
  const ClassDistribution &global = nodes_[0].distribution;

  std::vector<TokenId> maj(n);
  std::vector<NodeIndex> parent(n, kNoNode);
  for (std::size_t i = 0; i < n; ++i) {
    maj[i] = majority(nodes_[i].distribution, global);
    for (const auto &c : nodes_[i].children) parent[c.node] = static_cast<NodeIndex>(i);
  }

  std::vector<bool> removed(n, false);
  std::size_t count = 0;
  for (std::size_t i = n; i-- > 1;) {
    const auto &ch = nodes_[i].children;
    const bool childless = std::all_of(ch.begin(), ch.end(), [&](const ChildRef &c) { return removed[c.node]; });
    if (childless && maj[i] == maj[parent[i]]) {
      removed[i] = true;
      ++count;
    }
  }
  if (count > 0) compact(removed);
  return count;
}

void Trie::compact(const std::vector<bool> &removed) {
  std::vector<TrieNode> out;
  out.reserve(nodes_.size() - static_cast<std::size_t>(std::count(removed.begin(), removed.end(), true)));

  struct Pending {
    NodeIndex old;
    NodeIndex new_parent;
  };
  std::vector<Pending> stack{{0, kNoNode}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    TrieNode &src = nodes_[p.old];
    const auto idx = static_cast<NodeIndex>(out.size());
    auto &dst = out.emplace_back();
    dst.value = src.value;
    dst.depth = src.depth;
    dst.distribution = std::move(src.distribution);
    if (p.new_parent != kNoNode) out[p.new_parent].children.push_back({dst.value, idx});
    for (auto it = src.children.rbegin(); it != src.children.rend(); ++it)
      if (!removed[it->node]) stack.push_back({it->node, idx});
  }
  for (auto &node : out) node.children.shrink_to_fit();
  nodes_ = std::move(out);
}

bool structurally_equal(const Trie &a, const Trie &b) {
  if (a.level_positions_ != b.level_positions_ || a.nodes_.size() != b.nodes_.size()) return false;
  std::vector<std::pair<NodeIndex, NodeIndex>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [ia, ib] = stack.back();
    stack.pop_back();
    const TrieNode &na = a.nodes_[ia];
    const TrieNode &nb = b.nodes_[ib];
    if (na.value != nb.value || na.depth != nb.depth || na.children.size() != nb.children.size() ||
        !(na.distribution == nb.distribution))
      return false;
    for (std::size_t c = 0; c < na.children.size(); ++c) {
      if (na.children[c].value != nb.children[c].value) return false;
      stack.emplace_back(na.children[c].node, nb.children[c].node);
    }
  }
  return true;
}

}  // namespace mblm
