#include "mblm/classify.hh"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "mblm/error.hh"

namespace mblm {
namespace {

void check_query(const Model &model, std::span<const TokenId> context) {
  if (context.size() != model.context_width)
    throw Error(ErrorKind::kUsage, "query has " + std::to_string(context.size()) + " tokens, model expects " +
                                       std::to_string(model.context_width));
}

ClassDistribution merge_nodes(const Trie &trie, std::span<const NodeIndex> nodes) {
  if (nodes.size() == 1) return trie.node(nodes[0]).distribution;
  std::vector<DistEntry> buf;
  for (NodeIndex n : nodes) {
    auto e = trie.node(n).distribution.entries();
    buf.insert(buf.end(), e.begin(), e.end());
  }
  std::sort(buf.begin(), buf.end(), [](const DistEntry &a, const DistEntry &b) { return a.token < b.token; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < buf.size(); ++r) {
    if (w > 0 && buf[w - 1].token == buf[r].token)
      buf[w - 1].count += buf[r].count;
    else
      buf[w++] = buf[r];
  }
  buf.resize(w);
  ClassDistribution out;
  out.assign_sorted(std::move(buf));
  return out;
}

// Exact k-nearest-rank search over a subtree. Distances accumulate level by
// level (feature order); a subtree is skipped only when its accumulated
// mismatch weight is already strictly above the k-th rank distance.
class RankSearch {
 public:
  RankSearch(const Model &model, std::span<const TokenId> context, std::size_t k, bool with_neighbors)
      : trie_(model.trie), k_(k), with_neighbors_(with_neighbors), width_(model.context_width) {
    const std::size_t levels = trie_.levels();
    query_.resize(levels);
    weight_.resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      query_[l] = trie_.level_value(context, l + 1);
      weight_[l] = model.weights.gain_ratio[trie_.level_positions()[l]];
    }
    path_.resize(levels);
  }

  // Searches below `start` (at depth `depth`) whose path values are already
  // recorded in `prefix`.
  void run(NodeIndex start, std::size_t depth, std::span<const TokenId> prefix) {
    std::copy(prefix.begin(), prefix.end(), path_.begin());
    visit(start, depth, 0.0);
  }

  bool empty() const { return ranks_.empty(); }

  NeighborResult result() const {
    NeighborResult r;
    std::vector<NodeIndex> all;
    for (const auto &rank : ranks_) all.insert(all.end(), rank.leaves.begin(), rank.leaves.end());
    r.distribution = merge_nodes(trie_, all);
    r.distance = ranks_.front().distance;
    r.neighbor_count = all.size();
    if (with_neighbors_) {
      for (const auto &rank : ranks_) {
        for (std::size_t i = 0; i < rank.leaves.size(); ++i) {
          for (const auto &e : trie_.node(rank.leaves[i]).distribution.entries())
            r.neighbors.push_back({rank.contexts[i], e.token, e.count, rank.distance});
        }
      }
    }
    return r;
  }

 private:
  struct Rank {
    double distance;
    std::vector<NodeIndex> leaves;
    std::vector<std::vector<TokenId>> contexts;
  };

  double bound() const {
    return ranks_.size() < k_ ? std::numeric_limits<double>::infinity() : ranks_.back().distance;
  }

  void offer(NodeIndex leaf, double distance) {
    if (ranks_.size() == k_ && distance > ranks_.back().distance) return;
    auto it = std::lower_bound(ranks_.begin(), ranks_.end(), distance,
                               [](const Rank &r, double d) { return r.distance < d; });
    if (it == ranks_.end() || it->distance != distance) {
      it = ranks_.insert(it, Rank{distance, {}, {}});
      if (ranks_.size() > k_) ranks_.pop_back();
    }
    it->leaves.push_back(leaf);
    if (with_neighbors_) {
      std::vector<TokenId> ctx(width_);
      for (std::size_t l = 0; l < path_.size(); ++l)
        ctx[position_to_index(trie_.level_positions()[l], width_)] = path_[l];
      it->contexts.push_back(std::move(ctx));
    }
  }

  void visit(NodeIndex node, std::size_t depth, double acc) {
    if (depth == query_.size()) {
      offer(node, acc);
      return;
    }
    const auto &children = trie_.node(node).children;
    const NodeIndex same = trie_.find_child(node, query_[depth]);
    if (same != kNoNode) {
      path_[depth] = query_[depth];
      visit(same, depth + 1, acc);
    }
    const double miss = acc + weight_[depth];
    for (const auto &c : children) {
      if (miss > bound()) break;
      if (c.node == same) continue;
      path_[depth] = c.value;
      visit(c.node, depth + 1, miss);
    }
  }

  const Trie &trie_;
  std::size_t k_;
  bool with_neighbors_;
  std::size_t width_;
  std::vector<TokenId> query_;
  std::vector<double> weight_;
  std::vector<TokenId> path_;
  std::vector<Rank> ranks_;
};

struct Descent {
  NodeIndex node = 0;
  std::size_t depth = 0;
  std::vector<TokenId> path;
};

// Follows exact matches from the root; stops at the first level without a
// matching child.
Descent descend(const Trie &trie, std::span<const TokenId> context) {
  Descent d;
  while (d.depth < trie.levels()) {
    const TokenId v = trie.level_value(context, d.depth + 1);
    const NodeIndex child = trie.find_child(d.node, v);
    if (child == kNoNode) break;
    d.node = child;
    d.path.push_back(v);
    ++d.depth;
  }
  return d;
}

void require_lossless(const Model &model, const char *what) {
  if (model.pruned)
    throw Error(ErrorKind::kUnsupportedOperation, std::string(what) + " needs a lossless (unpruned) trie");
}

}  // namespace

NeighborResult classify_ib1(const Model &model, std::span<const TokenId> context, std::size_t k,
                            bool with_neighbors) {
  check_query(model, context);
  require_lossless(model, "IB1-IG");
  if (k == 0) throw Error(ErrorKind::kUsage, "k must be at least 1");
  RankSearch search(model, context, k, with_neighbors);
  search.run(0, 0, {});
  if (search.empty()) throw Error(ErrorKind::kNoNeighbors, "model holds no instances");
  NeighborResult r = search.result();
  r.match_depth = descend(model.trie, context).depth;
  return r;
}

NeighborResult classify_tribl2(const Model &model, std::span<const TokenId> context, std::size_t k,
                               bool with_neighbors) {
  check_query(model, context);
  require_lossless(model, "TRIBL2");
  if (k == 0) throw Error(ErrorKind::kUsage, "k must be at least 1");
  const Trie &trie = model.trie;
  const Descent d = descend(trie, context);
  if (d.depth == trie.levels()) {
    NeighborResult r;
    r.distribution = trie.node(d.node).distribution;
    if (r.distribution.empty()) throw Error(ErrorKind::kNoNeighbors, "model holds no instances");
    r.neighbor_count = 1;
    r.match_depth = d.depth;
    if (with_neighbors) {
      for (const auto &e : r.distribution.entries())
        r.neighbors.push_back({std::vector<TokenId>(context.begin(), context.end()), e.token, e.count, 0.0});
    }
    return r;
  }
  RankSearch search(model, context, k, with_neighbors);
  search.run(d.node, d.depth, d.path);
  if (search.empty()) throw Error(ErrorKind::kNoNeighbors, "model holds no instances");
  NeighborResult r = search.result();
  r.match_depth = d.depth;
  return r;
}

NeighborResult classify_igtree(const Model &model, std::span<const TokenId> context) {
  check_query(model, context);
  const Trie &trie = model.trie;
  const Descent d = descend(trie, context);
  NeighborResult r;
  r.distribution = trie.node(d.node).distribution;
  r.match_depth = d.depth;
  r.distance = static_cast<double>(trie.levels() - d.depth);
  r.neighbor_count = r.distribution.empty() ? 0 : 1;
  return r;
}

NeighborResult classify(const Model &model, std::span<const TokenId> context, std::size_t k,
                        bool with_neighbors) {
  switch (model.algorithm) {
    case Algorithm::kIb1: return classify_ib1(model, context, k, with_neighbors);
    case Algorithm::kTribl2: return classify_tribl2(model, context, k, with_neighbors);
    case Algorithm::kIgtree: return classify_igtree(model, context);
  }
  throw Error(ErrorKind::kUsage, "unknown algorithm");
}

std::size_t TiePolicy::draw(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = 0;
  do {
    x = rng_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

TokenId resolve_prediction(const ClassDistribution &dist, const ClassDistribution &global, TiePolicy &policy) {
  if (dist.empty()) throw Error(ErrorKind::kEmptyDistribution, "cannot resolve an empty distribution");
  if (policy.is_deterministic()) return majority(dist, global);
  std::uint64_t best = 0;
  for (const auto &e : dist.entries()) best = std::max(best, e.count);
  std::vector<TokenId> tied;
  for (const auto &e : dist.entries())
    if (e.count == best) tied.push_back(e.token);
  return tied[policy.draw(tied.size())];
}

Normalization parse_normalization(std::string_view text) {
  if (text == "proportional") return Normalization::proportional();
  if (text == "softmax") return Normalization::softmax(1.0);
  if (text.starts_with("softmax:")) {
    const std::string t(text.substr(8));
    try {
      std::size_t used = 0;
      const double temperature = std::stod(t, &used);
      if (used == t.size() && temperature > 0.0 && std::isfinite(temperature))
        return Normalization::softmax(temperature);
    } catch (const std::exception &) {
    }
  }
  throw Error(ErrorKind::kUsage, "normalization must be 'proportional', 'softmax' or 'softmax:T' with T > 0");
}

std::string to_string(const Normalization &n) {
  if (n.mode == Normalization::Mode::kProportional) return "proportional";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, n.temperature);
  return "softmax:" + std::string(buf, end);
}

std::vector<Probability> normalize(const ClassDistribution &dist, const Normalization &norm) {
  if (dist.empty()) throw Error(ErrorKind::kEmptyDistribution, "cannot normalize an empty distribution");
  std::vector<Probability> out;
  out.reserve(dist.size());
  if (norm.mode == Normalization::Mode::kProportional) {
    const double total = static_cast<double>(dist.total());
    for (const auto &e : dist.entries()) out.push_back({e.token, static_cast<double>(e.count) / total});
    return out;
  }
  if (!(norm.temperature > 0.0)) throw Error(ErrorKind::kUsage, "softmax temperature must be positive");
  std::uint64_t top = 0;
  for (const auto &e : dist.entries()) top = std::max(top, e.count);
  // Shifted by the maximum count.
  double z = 0.0;
  for (const auto &e : dist.entries()) {
    const double v = std::exp((static_cast<double>(e.count) - static_cast<double>(top)) / norm.temperature);
    out.push_back({e.token, v});
    z += v;
  }
  for (auto &p : out) p.p /= z;
  return out;
}

double probability_of(const ClassDistribution &dist, TokenId token, const Normalization &norm) {
  if (dist.count(token) == 0) return 0.0;
  if (norm.mode == Normalization::Mode::kProportional)
    return static_cast<double>(dist.count(token)) / static_cast<double>(dist.total());
  for (const auto &p : normalize(dist, norm))
    if (p.token == token) return p.p;
  return 0.0;
}

}  // namespace mblm
