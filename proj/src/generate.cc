#include "mblm/generate.hh"

#include <algorithm>

#include "mblm/error.hh"

namespace mblm {

double TokenSampler::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

TokenId TokenSampler::sample(std::span<const Probability> probs) {
  if (probs.empty()) throw Error(ErrorKind::kEmptyDistribution, "nothing to sample from");
  const double u = uniform();
  double acc = 0.0;
  for (const auto &p : probs) {
    acc += p.p;
    if (u < acc) return p.token;
  }
  // Rounding can leave the cumulative sum a hair below 1.
  for (auto it = probs.rbegin(); it != probs.rend(); ++it)
    if (it->p > 0.0) return it->token;
  return probs.back().token;
}

ClassDistribution truncate_top_k(const ClassDistribution &dist, std::size_t top_k) {
  if (top_k >= dist.size()) return dist;
  std::vector<DistEntry> entries(dist.entries().begin(), dist.entries().end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const DistEntry &a, const DistEntry &b) { return a.count > b.count; });
  entries.resize(top_k);
  std::sort(entries.begin(), entries.end(), [](const DistEntry &a, const DistEntry &b) { return a.token < b.token; });
  ClassDistribution out;
  out.assign_sorted(std::move(entries));
  return out;
}

std::vector<TokenId> generate(const Model &model, std::span<const TokenId> prompt, const GenerationConfig &cfg) {
  if (cfg.mode == GenerationConfig::Mode::kTopK && cfg.top_k == 0)
    throw Error(ErrorKind::kUsage, "top-k sampling needs k' >= 1");
  const std::size_t n = model.context_width;
  std::vector<TokenId> history(n, model.vocab.boundary_id());
  history.insert(history.end(), prompt.begin(), prompt.end());

  TokenSampler sampler(cfg.seed);
  TiePolicy greedy_policy = TiePolicy::deterministic();
  const ClassDistribution &global = model.trie.root().distribution;

  std::vector<TokenId> out;
  out.reserve(cfg.max_tokens);
  while (out.size() < cfg.max_tokens) {
    std::span<const TokenId> context(history.data() + history.size() - n, n);
    NeighborResult r;
    try {
      r = classify(model, context, cfg.k);
    } catch (const Error &e) {
      throw Error(e.kind(), "at generated position " + std::to_string(out.size()) + ": " + e.detail());
    }
    if (r.distribution.empty())
      throw Error(ErrorKind::kNoNeighbors, "at generated position " + std::to_string(out.size()) + ": empty model");

    TokenId next = 0;
    switch (cfg.mode) {
      case GenerationConfig::Mode::kGreedy:
        next = resolve_prediction(r.distribution, global, greedy_policy);
        break;
      case GenerationConfig::Mode::kSample:
        next = sampler.sample(normalize(r.distribution, cfg.normalization));
        break;
      case GenerationConfig::Mode::kTopK:
        next = sampler.sample(normalize(truncate_top_k(r.distribution, cfg.top_k), cfg.normalization));
        break;
    }
    out.push_back(next);
    history.push_back(next);
    if (cfg.stop_token && next == *cfg.stop_token) break;
  }
  return out;
}

}  // namespace mblm
