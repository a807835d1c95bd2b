#ifndef MBLM_TRIE_HH
#define MBLM_TRIE_HH

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mblm/corpus.hh"
#include "mblm/distribution.hh"

namespace mblm {

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();
// Edge label stored for the root, which has no incoming edge.
inline constexpr TokenId kRootValue = 0xFFFFFFFFu;

struct ChildRef {
  TokenId value;
  NodeIndex node;
};

struct TrieNode {
  TokenId value = kRootValue;
  std::uint32_t depth = 0;
  std::vector<ChildRef> children;  // sorted by value
  ClassDistribution distribution;
};

struct TrieStats {
  std::size_t nodes = 0;
  std::vector<std::size_t> depth_histogram;  // nodes per depth, root at 0
  std::size_t distribution_entries = 0;
  std::size_t bytes = 0;  // in-memory footprint estimate
};

// Prefix trie over instance contexts. Level d (1-based) tests feature
// position level_positions[d-1]; every node carries the target distribution
// of all instances whose path passes through it. Node 0 is the root.
class Trie {
 public:
  explicit Trie(std::vector<std::size_t> level_positions = {});

  // Batch construction: sorts the instances by their level keys and emits
  // nodes in pre-order, then sums distributions bottom-up.
  static Trie build(const InstanceBase &instances, std::vector<std::size_t> level_positions);

  void insert(const InstanceView &inst);

  std::size_t levels() const { return level_positions_.size(); }
  const std::vector<std::size_t> &level_positions() const { return level_positions_; }

  const TrieNode &root() const { return nodes_.front(); }
  const TrieNode &node(NodeIndex i) const { return nodes_[i]; }
  std::size_t node_count() const { return nodes_.size(); }
  NodeIndex find_child(NodeIndex parent, TokenId value) const;

  // Key of `context` at level d (1-based).
  TokenId level_value(std::span<const TokenId> context, std::size_t level) const {
    return context[position_to_index(level_positions_[level - 1], context.size())];
  }

  TrieStats stats() const;

  // IGTree pruning, bottom-up: a non-root node is dropped when all of its
  // children were dropped and its majority equals its parent's majority.
  // Majorities use the root distribution for tie-breaking. Retained nodes keep
  // their distributions. Returns the number of removed nodes.
  std::size_t prune_redundant();

  // Deserialization support: appends a child to `parent`. Children must be
  // appended in increasing value order.
  NodeIndex append_child(NodeIndex parent, TokenId value, ClassDistribution dist);
  ClassDistribution &mutable_distribution(NodeIndex i) { return nodes_[i].distribution; }

  // Same shape, labels and distributions, irrespective of node numbering.
  friend bool structurally_equal(const Trie &a, const Trie &b);

 private:
  NodeIndex add_node(TokenId value, std::uint32_t depth);
  void compact(const std::vector<bool> &removed);

  std::vector<std::size_t> level_positions_;
  std::vector<TrieNode> nodes_;
};

bool structurally_equal(const Trie &a, const Trie &b);

}  // namespace mblm

#endif  // MBLM_TRIE_HH
