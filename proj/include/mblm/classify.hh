#ifndef MBLM_CLASSIFY_HH
#define MBLM_CLASSIFY_HH

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "mblm/distribution.hh"
#include "mblm/model.hh"

namespace mblm {

// One stored context contributing to a classification, with one of its
// outcomes.
struct Neighbor {
  std::vector<TokenId> context;  // text order [w-n ... w-1]
  TokenId target = 0;
  std::uint64_t count = 0;
  double distance = 0.0;

  bool operator==(const Neighbor &) const = default;
};

struct NeighborResult {
  ClassDistribution distribution;
  // Weighted overlap distance of the nearest rank. For IGTree this is the
  // number of features left unmatched below the answering node.
  double distance = 0.0;
  // Number of distinct stored contexts merged into the distribution.
  std::size_t neighbor_count = 0;
  // Levels matched exactly on the descent path.
  std::size_t match_depth = 0;
  // Filled only when requested.
  std::vector<Neighbor> neighbors;
};

// k counts equidistance ranks: k = 1 merges every stored context at the
// minimal distance.
NeighborResult classify_ib1(const Model &model, std::span<const TokenId> context, std::size_t k = 1,
                            bool with_neighbors = false);
NeighborResult classify_tribl2(const Model &model, std::span<const TokenId> context, std::size_t k = 1,
                               bool with_neighbors = false);
NeighborResult classify_igtree(const Model &model, std::span<const TokenId> context);

// Dispatches on model.algorithm.
NeighborResult classify(const Model &model, std::span<const TokenId> context, std::size_t k = 1,
                        bool with_neighbors = false);

class TiePolicy {
 public:
  static TiePolicy deterministic() { return TiePolicy(false, 0); }
  static TiePolicy seeded(std::uint64_t seed) { return TiePolicy(true, seed); }

  bool is_deterministic() const { return !random_; }
  std::uint64_t seed() const { return seed_; }

  // Uniform draw from [0, n) off the seeded stream (mt19937_64, rejection
  // sampling).
  std::size_t draw(std::size_t n);

 private:
  TiePolicy(bool random, std::uint64_t seed) : random_(random), seed_(seed), rng_(seed) {}

  bool random_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

// Argmax of `dist`. Ties: deterministic mode prefers the higher count in
// `global` (root distribution), then the lower token ID; seeded mode picks
// uniformly among the tied tokens.
TokenId resolve_prediction(const ClassDistribution &dist, const ClassDistribution &global, TiePolicy &policy);

struct Normalization {
  enum class Mode { kProportional, kSoftmax };
  Mode mode = Mode::kProportional;
  double temperature = 1.0;

  static Normalization proportional() { return {}; }
  static Normalization softmax(double temperature) { return {Mode::kSoftmax, temperature}; }
};

// "proportional", "softmax" (T = 1) or "softmax:T".
Normalization parse_normalization(std::string_view text);
std::string to_string(const Normalization &n);

struct Probability {
  TokenId token;
  double p;
};

// Probabilities over the stored entries only, in token order.
std::vector<Probability> normalize(const ClassDistribution &dist, const Normalization &norm);
double probability_of(const ClassDistribution &dist, TokenId token, const Normalization &norm);

}  // namespace mblm

#endif  // MBLM_CLASSIFY_HH
