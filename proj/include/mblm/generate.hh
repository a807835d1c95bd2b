#ifndef MBLM_GENERATE_HH
#define MBLM_GENERATE_HH

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mblm/classify.hh"

namespace mblm {

struct GenerationConfig {
  enum class Mode { kGreedy, kSample, kTopK };

  Mode mode = Mode::kGreedy;
  std::size_t top_k = 1;  // kTopK only
  std::size_t max_tokens = 32;
  std::uint64_t seed = 42;
  std::optional<TokenId> stop_token;
  Normalization normalization;
  std::size_t k = 1;  // nearest-neighbor ranks per step
};

// Sampling stream: mt19937_64 seeded with cfg.seed; one 53-bit uniform per
// sampled token, inverse-CDF over the (optionally top-k truncated)
// normalized distribution in token-ID order.
class TokenSampler {
 public:
  explicit TokenSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform();
  TokenId sample(std::span<const Probability> probs);

 private:
  std::mt19937_64 rng_;
};

// The k' most frequent entries (ties to the lower token ID), returned in
// token order.
ClassDistribution truncate_top_k(const ClassDistribution &dist, std::size_t top_k);

// Autoregressive continuation of `prompt`; returns only the new tokens. The
// context for each step is the last n tokens of prompt + output, left-padded
// with the boundary token.
std::vector<TokenId> generate(const Model &model, std::span<const TokenId> prompt, const GenerationConfig &cfg);

}  // namespace mblm

#endif  // MBLM_GENERATE_HH
