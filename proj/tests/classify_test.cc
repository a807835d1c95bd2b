#include <cmath>

#include <gtest/gtest.h>

#include "mblm/classify.hh"
#include "mblm/weights.hh"
#include "oracles.hh"
#include "support.hh"

namespace mblm {
namespace {

using oracle::Context;
using oracle::FlatInstance;

// Gain ratios by feature position w-1, w-2, w-3, w-4.
const std::vector<double> kGr{0.9, 0.7, 0.3, 0.2};

Model fixed_weight_model(const std::vector<FlatInstance> &flat, Algorithm algorithm, std::size_t vocab = 10) {
  const FeatureWeights w = make_weights(kGr, kGr, std::vector<double>(4, 1.0));
  return build_model(oracle::to_base(flat, 4), w, oracle::numbered_vocab(vocab), algorithm);
}

Model learned_model(const TokenStream &s, std::size_t n, std::size_t vocab, Algorithm algorithm) {
  const InstanceBase base = window_instances(s, n, static_cast<TokenId>(vocab));
  return build_model(base, compute_weights(base), oracle::numbered_vocab(vocab), algorithm);
}

ClassDistribution dist(std::initializer_list<std::pair<TokenId, std::uint64_t>> entries) {
  ClassDistribution d;
  for (auto [t, c] : entries) d.add(t, c);
  return d;
}

// Two stored contexts share the query's w-1 and w-2 and differ on w-3 and
// w-4; one of them occurs twice with different targets.
const std::vector<FlatInstance> kEquidistant{
    {{1, 2, 3, 4}, 7}, {{1, 2, 3, 4}, 8}, {{5, 6, 3, 4}, 7}, {{1, 2, 9, 9}, 8}, {{0, 0, 0, 4}, 8}};
const Context kEquidistantQuery{0, 0, 3, 4};

TEST(Ib1, ExactMatchHasDistanceZero) {
  const Model m = fixed_weight_model(kEquidistant, Algorithm::kIb1);
  const auto r = classify_ib1(m, Context{1, 2, 3, 4});
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_EQ(r.distribution, dist({{7, 1}, {8, 1}}));
  EXPECT_EQ(r.neighbor_count, 1u);
  EXPECT_EQ(r.match_depth, 4u);
}

TEST(Ib1, TwoMatchingTwoMismatchingNeighbors) {
  const Model m = fixed_weight_model(kEquidistant, Algorithm::kIb1);
  const auto r = classify_ib1(m, kEquidistantQuery, 1, true);
  EXPECT_DOUBLE_EQ(r.distance, kGr[2] + kGr[3]);
  EXPECT_EQ(r.neighbor_count, 2u);
  EXPECT_EQ(r.distribution, dist({{7, 2}, {8, 1}}));
  TiePolicy det = TiePolicy::deterministic();
  EXPECT_EQ(resolve_prediction(r.distribution, m.trie.root().distribution, det), 7u);
  ASSERT_EQ(r.neighbors.size(), 3u);
  for (const auto &n : r.neighbors) EXPECT_EQ(n.distance, r.distance);
}

TEST(Ib1, SecondRankAddsFartherNeighbors) {
  const Model m = fixed_weight_model(kEquidistant, Algorithm::kIb1);
  const auto r = classify_ib1(m, kEquidistantQuery, 2);
  EXPECT_DOUBLE_EQ(r.distance, kGr[2] + kGr[3]);  // nearest rank
  EXPECT_EQ(r.neighbor_count, 3u);                 // plus {0 0 0 4}, which misses only w-2
  EXPECT_EQ(r.distribution, dist({{7, 2}, {8, 2}}));
}

TEST(Ib1, RandomQueriesMatchBruteForce) {
  oracle::Rng rng(41);
  for (int round = 0; round < 8; ++round) {
    const std::size_t n = 1 + round % 4, v = oracle::uniform(rng, 2, 40);
    const auto s = oracle::random_stream(rng, v, 5000, 10);
    const Model m = learned_model(s, n, v, Algorithm::kIb1);
    const auto stored = oracle::group_contexts(oracle::enumerate_instances(s, n, static_cast<TokenId>(v)));
    for (int q = 0; q < 200; ++q) {
      Context ctx(n);
      for (auto &t : ctx) t = static_cast<TokenId>(oracle::uniform(rng, 0, v));
      const std::size_t k = 1 + q % 3;
      const auto want = oracle::brute_knn(stored, m.weights, ctx, k);
      const auto got = classify_ib1(m, ctx, k);
      ASSERT_EQ(oracle::to_counts(got.distribution), want.distribution);
      ASSERT_EQ(got.distance, want.distance);
      ASSERT_EQ(got.neighbor_count, want.neighbor_count);
    }
  }
}

TEST(Ib1, Errors) {
  const Model empty = fixed_weight_model({}, Algorithm::kIb1);
  const Context q{1, 2, 3, 4};
  EXPECT_EQ(kind_of([&] { classify_ib1(empty, q); }), ErrorKind::kNoNeighbors);
  EXPECT_EQ(kind_of([&] { classify_tribl2(empty, q); }), ErrorKind::kNoNeighbors);
  const Model m = fixed_weight_model(kEquidistant, Algorithm::kIb1);
  EXPECT_EQ(kind_of([&] { classify_ib1(m, q, 0); }), ErrorKind::kUsage);
  EXPECT_EQ(kind_of([&] { classify_ib1(m, Context{1, 2}); }), ErrorKind::kUsage);
  const Model pruned = prune_igtree(m);
  EXPECT_EQ(kind_of([&] { classify_ib1(pruned, q); }), ErrorKind::kUnsupportedOperation);
  EXPECT_EQ(kind_of([&] { classify_tribl2(pruned, q); }), ErrorKind::kUnsupportedOperation);
}

TEST(Tribl2, FullPathEqualsIb1) {
  const Model m = fixed_weight_model(kEquidistant, Algorithm::kTribl2);
  const Context q{5, 6, 3, 4};
  const auto t = classify_tribl2(m, q);
  const auto i = classify_ib1(m, q);
  EXPECT_EQ(t.distance, 0.0);
  EXPECT_EQ(t.distribution, i.distribution);
  EXPECT_EQ(t.neighbor_count, i.neighbor_count);
  EXPECT_EQ(t.match_depth, 4u);
}

TEST(Tribl2, UnseenFirstFeatureSearchesEverything) {
  oracle::Rng rng(42);
  // Token 20 never occurs in the corpus; the boundary is 21.
  const auto s = oracle::random_stream(rng, 20, 3000, 5);
  const Model m = learned_model(s, 3, 21, Algorithm::kTribl2);
  const std::size_t first = m.weights.feature_order.front();
  for (int q = 0; q < 50; ++q) {
    Context ctx(3);
    for (auto &t : ctx) t = static_cast<TokenId>(oracle::uniform(rng, 0, 19));
    ctx[position_to_index(first, 3)] = 20;
    const auto t = classify_tribl2(m, ctx);
    const auto i = classify_ib1(m, ctx);
    EXPECT_EQ(t.match_depth, 0u);
    EXPECT_EQ(t.distribution, i.distribution);
    EXPECT_EQ(t.distance, i.distance);
    EXPECT_EQ(t.neighbor_count, i.neighbor_count);
  }
}

TEST(Tribl2, RandomQueriesMatchTwoStageOracle) {
  oracle::Rng rng(43);
  for (int round = 0; round < 8; ++round) {
    const std::size_t n = 1 + round % 4, v = oracle::uniform(rng, 2, 40);
    const auto s = oracle::random_stream(rng, v, 5000, 10);
    const Model m = learned_model(s, n, v, Algorithm::kTribl2);
    const auto flat = oracle::enumerate_instances(s, n, static_cast<TokenId>(v));
    const auto stored = oracle::group_contexts(flat);
    for (int q = 0; q < 200; ++q) {
      Context ctx = flat[oracle::uniform(rng, 0, flat.size() - 1)].context;
      ctx[oracle::uniform(rng, 0, n - 1)] = static_cast<TokenId>(oracle::uniform(rng, 0, v));
      const std::size_t k = 1 + q % 2;
      const auto want = oracle::two_stage_tribl2(stored, m.weights, ctx, k);
      const auto got = classify_tribl2(m, ctx, k);
      ASSERT_EQ(oracle::to_counts(got.distribution), want.knn.distribution);
      ASSERT_EQ(got.distance, want.knn.distance);
      ASSERT_EQ(got.neighbor_count, want.knn.neighbor_count);
      ASSERT_EQ(got.match_depth, want.match_depth);
    }
  }
}

TEST(Igtree, UnseenLastTokenFallsBackToRoot) {
  const Model m = prune_igtree(fixed_weight_model(kEquidistant, Algorithm::kTribl2));
  const auto r = classify_igtree(m, Context{1, 2, 3, 9});
  EXPECT_EQ(r.match_depth, 0u);
  EXPECT_EQ(r.distribution, m.trie.root().distribution);
  EXPECT_EQ(r.distance, 4.0);
}

TEST(Igtree, FullPathInLosslessTrieReachesLeaf) {
  const Model m = fixed_weight_model(kEquidistant, Algorithm::kTribl2);
  const auto r = classify_igtree(m, Context{1, 2, 3, 4});
  EXPECT_EQ(r.match_depth, 4u);
  EXPECT_EQ(r.distribution, dist({{7, 1}, {8, 1}}));
}

TEST(Igtree, ReplayedTrainingMatchesLosslessLeafMajority) {
  oracle::Rng rng(44);
  for (int round = 0; round < 10; ++round) {
    const std::size_t n = 1 + round % 4, v = oracle::uniform(rng, 2, 30);
    const auto s = oracle::random_stream(rng, v, 2000, 5);
    const Model full = learned_model(s, n, v, Algorithm::kTribl2);
    const Model m = prune_igtree(full);
    const auto flat = oracle::enumerate_instances(s, n, static_cast<TokenId>(v));
    const auto groups = oracle::group_contexts(flat);
    const auto global = oracle::to_counts(full.trie.root().distribution);
    for (const auto &f : flat) {
      TiePolicy det = TiePolicy::deterministic();
      const TokenId got = resolve_prediction(classify_igtree(m, f.context).distribution, m.trie.root().distribution, det);
      ASSERT_EQ(got, oracle::majority_of(groups.at(f.context), global));
    }
  }
}

TEST(Normalize, Proportional) {
  const auto p = normalize(dist({{0, 3}, {1, 1}}), Normalization::proportional());
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[0].p, 0.75);
  EXPECT_DOUBLE_EQ(p[1].p, 0.25);
}

TEST(Normalize, SoftmaxSymmetric) {
  for (double t : {0.1, 1.0, 7.5}) {
    const auto p = normalize(dist({{0, 2}, {1, 2}}), Normalization::softmax(t));
    EXPECT_NEAR(p[0].p, 0.5, 1e-12);
    EXPECT_NEAR(p[1].p, 0.5, 1e-12);
  }
}

TEST(Normalize, SoftmaxScalar) {
  const auto p = normalize(dist({{0, 3}, {1, 1}}), Normalization::softmax(1.0));
  const double a = std::exp(3.0) / (std::exp(3.0) + std::exp(1.0));
  EXPECT_NEAR(p[0].p, a, 1e-12);
  EXPECT_NEAR(p[1].p, 1.0 - a, 1e-12);
  EXPECT_NEAR(p[0].p, 0.8808, 5e-5);
}

TEST(Normalize, SumsToOneAndLeavesAbsentAtZero) {
  oracle::Rng rng(45);
  for (int round = 0; round < 100; ++round) {
    ClassDistribution d;
    for (std::size_t i = oracle::uniform(rng, 1, 30); i > 0; --i)
      d.add(oracle::uniform(rng, 0, 50), oracle::uniform(rng, 1, 1000));
    for (const auto &norm : {Normalization::proportional(), Normalization::softmax(0.5), Normalization::softmax(50.0)}) {
      double sum = 0.0;
      for (const auto &p : normalize(d, norm)) sum += p.p;
      EXPECT_NEAR(sum, 1.0, 1e-9);
      EXPECT_EQ(probability_of(d, 51, norm), 0.0);
    }
  }
}

TEST(Normalize, EmptyDistribution) {
  EXPECT_EQ(kind_of([] { normalize(ClassDistribution(), Normalization::proportional()); }),
            ErrorKind::kEmptyDistribution);
}

TEST(Normalize, Parse) {
  EXPECT_EQ(parse_normalization("proportional").mode, Normalization::Mode::kProportional);
  EXPECT_EQ(parse_normalization("softmax").temperature, 1.0);
  EXPECT_EQ(parse_normalization("softmax:2.5").temperature, 2.5);
  EXPECT_EQ(to_string(parse_normalization("softmax:2.5")), "softmax:2.5");
  EXPECT_EQ(kind_of([] { parse_normalization("softmax:0"); }), ErrorKind::kUsage);
  EXPECT_EQ(kind_of([] { parse_normalization("max"); }), ErrorKind::kUsage);
}

TEST(Resolve, UniqueMaximumUnderAnyPolicy) {
  const auto d = dist({{0, 5}, {1, 2}});
  TiePolicy det = TiePolicy::deterministic(), seeded = TiePolicy::seeded(9);
  EXPECT_EQ(resolve_prediction(d, d, det), 0u);
  EXPECT_EQ(resolve_prediction(d, d, seeded), 0u);
}

TEST(Resolve, DeterministicTieUsesGlobalFrequency) {
  TiePolicy det = TiePolicy::deterministic();
  EXPECT_EQ(resolve_prediction(dist({{0, 1}, {1, 1}}), dist({{0, 10}, {1, 90}}), det), 1u);
}

TEST(Resolve, SeededIsReproducible) {
  const auto d = dist({{0, 1}, {1, 1}, {2, 1}});
  std::vector<TokenId> a, b;
  TiePolicy p1 = TiePolicy::seeded(1234), p2 = TiePolicy::seeded(1234);
  for (int i = 0; i < 50; ++i) {
    a.push_back(resolve_prediction(d, d, p1));
    b.push_back(resolve_prediction(d, d, p2));
  }
  EXPECT_EQ(a, b);
}

TEST(Resolve, SeededIsUniformAmongTies) {
  const auto d = dist({{0, 4}, {1, 4}, {2, 4}, {3, 1}});
  TiePolicy p = TiePolicy::seeded(77);
  const int draws = 30000;
  std::array<int, 4> hits{};
  for (int i = 0; i < draws; ++i) ++hits[resolve_prediction(d, d, p)];
  EXPECT_EQ(hits[3], 0);
  const double mean = draws / 3.0, sigma = std::sqrt(draws * (1.0 / 3.0) * (2.0 / 3.0));
  for (int t = 0; t < 3; ++t) EXPECT_NEAR(hits[t], mean, 3 * sigma);
}

TEST(Resolve, EmptyDistribution) {
  TiePolicy det = TiePolicy::deterministic();
  EXPECT_EQ(kind_of([&] { resolve_prediction(ClassDistribution(), ClassDistribution(), det); }),
            ErrorKind::kEmptyDistribution);
}

}  // namespace
}  // namespace mblm
