// Reference implementations used by the unit and acceptance tests. Each
// works directly on a flat list of instances with ordered maps and linear
// scans, sharing no code with the trie or the search.
#ifndef MBLM_TESTS_ORACLES_HH
#define MBLM_TESTS_ORACLES_HH

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mblm/classify.hh"
#include "mblm/corpus.hh"
#include "mblm/model.hh"

namespace mblm::oracle {

using Rng = std::mt19937_64;
using Counts = std::map<TokenId, std::uint64_t>;
using Context = std::vector<TokenId>;

inline std::size_t uniform(Rng &rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Entries "t0", "t1", ...; the boundary lands at ID `size`.
inline Vocabulary numbered_vocab(std::size_t size) {
  std::vector<std::string> entries;
  for (std::size_t i = 0; i < size; ++i) entries.push_back("t" + std::to_string(i));
  return Vocabulary(std::move(entries));
}

// Zipf-like token draws spread over `docs` documents.
inline TokenStream random_stream(Rng &rng, std::size_t vocab_size, std::size_t tokens, std::size_t docs) {
  std::vector<double> w(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<TokenId> draw(w.begin(), w.end());
  TokenStream s;
  s.documents.resize(std::max<std::size_t>(docs, 1));
  for (std::size_t i = 0; i < tokens; ++i) s.documents[uniform(rng, 0, s.documents.size() - 1)].push_back(draw(rng));
  return s;
}

struct FlatInstance {
  Context context;  // text order, oldest first
  TokenId target;
};

inline std::vector<FlatInstance> enumerate_instances(const TokenStream &s, std::size_t n, TokenId boundary) {
  std::vector<FlatInstance> out;
  for (const auto &doc : s.documents) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      Context ctx(n, boundary);
      for (std::size_t j = 0; j < n; ++j) {
        // ctx[j] holds the token n-j positions before the target.
        const std::size_t back = n - j;
        if (i >= back) ctx[j] = doc[i - back];
      }
      out.push_back({ctx, doc[i]});
    }
  }
  return out;
}

inline InstanceBase to_base(const std::vector<FlatInstance> &flat, std::size_t n) {
  InstanceBase base(n);
  for (const auto &f : flat) base.push_back(f.context, f.target);
  return base;
}

// Feature position p (0 = the token right before the target).
inline TokenId feature(const Context &ctx, std::size_t p) { return ctx[ctx.size() - 1 - p]; }

inline double log2_or_zero(double p) { return p > 0.0 ? std::log2(p) : 0.0; }

struct ScalarWeights {
  std::vector<double> info_gain, split_info, gain_ratio;
};

// Direct evaluation of information gain, split info and gain ratio with
// plain probabilities; no shared helper with the weights module.
inline ScalarWeights scalar_weights(const std::vector<FlatInstance> &flat, std::size_t n) {
  ScalarWeights w;
  const double total = static_cast<double>(flat.size());
  Counts classes;
  for (const auto &f : flat) ++classes[f.target];
  double hc = 0.0;
  for (auto [c, k] : classes) hc -= (k / total) * log2_or_zero(k / total);
  for (std::size_t p = 0; p < n; ++p) {
    std::map<TokenId, Counts> by_value;
    for (const auto &f : flat) ++by_value[feature(f.context, p)][f.target];
    double cond = 0.0, si = 0.0;
    for (const auto &[v, cls] : by_value) {
      double nv = 0.0;
      for (auto [c, k] : cls) nv += static_cast<double>(k);
      double h = 0.0;
      for (auto [c, k] : cls) h -= (k / nv) * log2_or_zero(k / nv);
      cond += (nv / total) * h;
      si -= (nv / total) * log2_or_zero(nv / total);
    }
    const double ig = hc - cond;
    w.info_gain.push_back(ig);
    w.split_info.push_back(si);
    w.gain_ratio.push_back(si == 0.0 ? 0.0 : ig / si);
  }
  return w;
}

// Stored contexts with their target counts.
inline std::map<Context, Counts> group_contexts(const std::vector<FlatInstance> &flat) {
  std::map<Context, Counts> g;
  for (const auto &f : flat) ++g[f.context][f.target];
  return g;
}

// Weighted overlap distance, summed in the model's feature order.
inline double overlap_distance(const FeatureWeights &w, const Context &a, const Context &b) {
  double d = 0.0;
  for (std::size_t p : w.feature_order)
    if (feature(a, p) != feature(b, p)) d += w.gain_ratio[p];
  return d;
}

struct KnnAnswer {
  Counts distribution;
  double distance = 0.0;
  std::size_t neighbor_count = 0;
};

// Brute-force k nearest distance ranks over the given stored contexts.
inline KnnAnswer brute_knn(const std::map<Context, Counts> &stored, const FeatureWeights &w, const Context &q,
                           std::size_t k) {
  std::map<double, std::vector<const Counts *>> by_distance;
  for (const auto &[ctx, counts] : stored) by_distance[overlap_distance(w, ctx, q)].push_back(&counts);
  KnnAnswer a;
  if (by_distance.empty()) return a;
  a.distance = by_distance.begin()->first;
  std::size_t rank = 0;
  for (const auto &[d, group] : by_distance) {
    if (rank++ == k) break;
    for (const Counts *c : group) {
      ++a.neighbor_count;
      for (auto [t, n] : *c) a.distribution[t] += n;
    }
  }
  return a;
}

struct Tribl2Answer {
  KnnAnswer knn;
  std::size_t match_depth = 0;
};

// Longest stored prefix in feature order, then brute force over the
// contexts sharing that prefix.
inline Tribl2Answer two_stage_tribl2(const std::map<Context, Counts> &stored, const FeatureWeights &w,
                                     const Context &q, std::size_t k) {
  const std::size_t n = w.feature_order.size();
  auto shares = [&](const Context &c, std::size_t depth) {
    for (std::size_t l = 0; l < depth; ++l)
      if (feature(c, w.feature_order[l]) != feature(q, w.feature_order[l])) return false;
    return true;
  };
  std::size_t depth = n;
  for (;; --depth) {
    bool any = false;
    for (const auto &[ctx, counts] : stored) any = any || shares(ctx, depth);
    if (any || depth == 0) break;
  }
  std::map<Context, Counts> subset;
  for (const auto &[ctx, counts] : stored)
    if (shares(ctx, depth)) subset.emplace(ctx, counts);
  Tribl2Answer a;
  a.match_depth = depth;
  if (depth == n) {
    a.knn.distribution = subset.begin()->second;
    a.knn.neighbor_count = 1;
    return a;
  }
  a.knn = brute_knn(subset, w, q, k);
  return a;
}

inline Counts to_counts(const ClassDistribution &d) {
  Counts c;
  for (const auto &e : d.entries()) c[e.token] = e.count;
  return c;
}

// Highest count; ties go to the higher global count, then the lower ID.
inline TokenId majority_of(const Counts &dist, const Counts &global) {
  TokenId best = dist.begin()->first;
  for (auto [t, n] : dist) {
    const auto bn = dist.at(best);
    const auto g = global.count(t) ? global.at(t) : 0;
    const auto bg = global.count(best) ? global.at(best) : 0;
    if (n > bn || (n == bn && (g > bg || (g == bg && t < best)))) best = t;
  }
  return best;
}

// Nested-map prefix tree keyed by feature values in feature order.
struct NaiveNode {
  Counts dist;
  std::map<TokenId, std::unique_ptr<NaiveNode>> kids;

  std::size_t count() const {
    std::size_t c = 1;
    for (const auto &[v, k] : kids) c += k->count();
    return c;
  }
};

inline std::unique_ptr<NaiveNode> naive_trie(const std::vector<FlatInstance> &flat,
                                             const std::vector<std::size_t> &order) {
  auto root = std::make_unique<NaiveNode>();
  for (const auto &f : flat) {
    NaiveNode *n = root.get();
    ++n->dist[f.target];
    for (std::size_t p : order) {
      auto &slot = n->kids[feature(f.context, p)];
      if (!slot) slot = std::make_unique<NaiveNode>();
      n = slot.get();
      ++n->dist[f.target];
    }
  }
  return root;
}

// True when the trie subtree at `node` has exactly the naive node's shape
// and distributions.
inline bool same_tree(const Trie &trie, NodeIndex node, const NaiveNode &naive) {
  const TrieNode &t = trie.node(node);
  if (to_counts(t.distribution) != naive.dist || t.children.size() != naive.kids.size()) return false;
  auto it = naive.kids.begin();
  for (const auto &c : t.children) {
    if (c.value != it->first || !same_tree(trie, c.node, *it->second)) return false;
    ++it;
  }
  return true;
}

// Applies the IGTree pruning rule recursively to a nested-map tree: a node
// goes when all its children went and its majority equals its parent's.
// Returns true when `node` itself should be removed.
inline bool naive_prune(NaiveNode &node, const Counts &global, const TokenId *parent_majority) {
  const TokenId mine = majority_of(node.dist, global);
  bool all_gone = true;
  for (auto it = node.kids.begin(); it != node.kids.end();) {
    if (naive_prune(*it->second, global, &mine)) {
      it = node.kids.erase(it);
    } else {
      all_gone = false;
      ++it;
    }
  }
  return parent_majority != nullptr && all_gone && mine == *parent_majority;
}

// For each node of `pruned`, the node on the same path in `full` must carry
// the same distribution.
inline bool retained_match(const Trie &pruned, NodeIndex p, const Trie &full, NodeIndex f) {
  if (pruned.node(p).distribution != full.node(f).distribution) return false;
  for (const auto &c : pruned.node(p).children) {
    const NodeIndex g = full.find_child(f, c.value);
    if (g == kNoNode || !retained_match(pruned, c.node, full, g)) return false;
  }
  return true;
}

// Accuracy of predicting each instance by the majority target of its exact
// context among all instances.
inline double exact_context_majority_accuracy(const std::vector<FlatInstance> &flat) {
  const auto groups = group_contexts(flat);
  Counts global;
  for (const auto &f : flat) ++global[f.target];
  std::size_t correct = 0;
  for (const auto &f : flat) correct += majority_of(groups.at(f.context), global) == f.target;
  return static_cast<double>(correct) / static_cast<double>(flat.size());
}

}  // namespace mblm::oracle

#endif  // MBLM_TESTS_ORACLES_HH
