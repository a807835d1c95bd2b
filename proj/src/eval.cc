#include "mblm/eval.hh"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "fmt/format.h"
#include "fmt/ostream.h"
#include "mblm/error.hh"
#include "json.hpp"

namespace mblm {
namespace {

volatile std::size_t latency_sink = 0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

PredictionRecord predict_one(const Model &model, const InstanceView &inst, std::size_t position,
                             const EvalOptions &opts) {
  const NeighborResult r = classify(model, inst.context, opts.k);
  PredictionRecord rec;
  rec.position = position;
  rec.target = inst.target;
  rec.distribution_size = r.distribution.size();
  rec.distance = r.distance;
  rec.match_depth = r.match_depth;
  if (r.distribution.empty()) throw Error(ErrorKind::kNoNeighbors, "empty model at position " + std::to_string(position));
  TiePolicy policy = opts.deterministic ? TiePolicy::deterministic()
                                        : TiePolicy::seeded(splitmix64(opts.seed ^ splitmix64(position)));
  rec.predicted = resolve_prediction(r.distribution, model.trie.root().distribution, policy);
  rec.target_probability = probability_of(r.distribution, inst.target, opts.normalization);
  return rec;
}

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace

PredictionLog predict_stream(const Model &model, const TokenStream &test, const EvalOptions &opts) {
  const InstanceBase instances = window_instances(test, model.context_width, model.vocab.boundary_id());
  PredictionLog log(instances.size());
  const std::size_t workers = std::clamp<std::size_t>(opts.workers, 1, std::max<std::size_t>(1, instances.size()));

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) log[i] = predict_one(model, instances[i], i, opts);
  };
  if (workers == 1) {
    run(0, instances.size());
    return log;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (instances.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(instances.size(), begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      try {
        run(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : threads) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
  return log;
}

double accuracy(std::span<const PredictionRecord> log) {
  if (log.empty()) throw Error(ErrorKind::kUndefinedAccuracy, "no test tokens");
  std::size_t correct = 0;
  for (const auto &r : log) correct += r.predicted == r.target;
  return static_cast<double>(correct) / static_cast<double>(log.size());
}

PerplexityResult perplexity_from_probabilities(std::span<const double> probs) {
  double log_sum = 0.0;
  std::size_t covered = 0;
  for (double p : probs) {
    if (p > 0.0) {
      log_sum += std::log2(p);
      ++covered;
    }
  }
  if (covered == 0) throw Error(ErrorKind::kUndefinedPerplexity, "no target received a non-zero probability");
  PerplexityResult res;
  res.covered = covered;
  res.coverage = static_cast<double>(covered) / static_cast<double>(probs.size());
  res.perplexity = std::exp2(-log_sum / static_cast<double>(covered));
  return res;
}

PerplexityResult perplexity(std::span<const PredictionRecord> log) {
  std::vector<double> probs;
  probs.reserve(log.size());
  for (const auto &r : log) probs.push_back(r.target_probability);
  return perplexity_from_probabilities(probs);
}

SizeStats distribution_sizes(std::span<const PredictionRecord> log) {
  SizeStats s;
  if (log.empty()) return s;
  std::vector<std::size_t> sizes;
  sizes.reserve(log.size());
  for (const auto &r : log) sizes.push_back(r.distribution_size);
  s.mean = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0})) /
           static_cast<double>(sizes.size());
  std::sort(sizes.begin(), sizes.end());
  const std::size_t mid = sizes.size() / 2;
  s.median = sizes.size() % 2 == 1 ? static_cast<double>(sizes[mid])
                                   : (static_cast<double>(sizes[mid - 1]) + static_cast<double>(sizes[mid])) / 2.0;
  return s;
}

EvalReport summarize(std::span<const PredictionRecord> log) {
  EvalReport rep;
  rep.token_count = log.size();
  rep.accuracy = accuracy(log);
  for (const auto &r : log) rep.correct_count += r.predicted == r.target;
  try {
    const auto ppl = perplexity(log);
    rep.perplexity = ppl.perplexity;
    rep.coverage = ppl.coverage;
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kUndefinedPerplexity) throw;
  }
  const auto sizes = distribution_sizes(log);
  rep.mean_distribution_size = sizes.mean;
  rep.median_distribution_size = sizes.median;
  return rep;
}

EvalReport eval_accuracy(const Model &model, const TokenStream &test, const EvalOptions &opts) {
  return summarize(predict_stream(model, test, opts));
}

PerplexityResult eval_perplexity(const Model &model, const TokenStream &test, const Normalization &norm,
                                 EvalOptions opts) {
  opts.normalization = norm;
  return perplexity(predict_stream(model, test, opts));
}

double eval_memorization(const Model &model, const TokenStream &train_prefix, const EvalOptions &opts) {
  return accuracy(predict_stream(model, train_prefix, opts));
}

SizeStats distribution_stats(const Model &model, const TokenStream &test, const EvalOptions &opts) {
  return distribution_sizes(predict_stream(model, test, opts));
}

std::vector<std::uint64_t> decade_edges(std::uint64_t max_frequency) {
  std::vector<std::uint64_t> edges{0, 1};
  while (edges.back() <= max_frequency && edges.back() <= std::numeric_limits<std::uint64_t>::max() / 10)
    edges.push_back(edges.back() * 10);
  return edges;
}

FrequencyBinning frequency_bins(std::span<const TokenId> predictions,
                                const std::unordered_map<TokenId, std::uint64_t> &train_freq,
                                std::span<const std::uint64_t> edges) {
  if (edges.empty() || edges.front() != 0 || !std::is_sorted(edges.begin(), edges.end(), std::less_equal<>()))
    throw Error(ErrorKind::kUsage, "bin edges must start at 0 and increase strictly");
  FrequencyBinning bins;
  bins.edges.assign(edges.begin(), edges.end());
  bins.counts.assign(edges.size(), 0);
  for (TokenId t : predictions) {
    auto it = train_freq.find(t);
    const std::uint64_t f = it == train_freq.end() ? 0 : it->second;
    const auto bin = std::upper_bound(edges.begin(), edges.end(), f) - edges.begin() - 1;
    ++bins.counts[static_cast<std::size_t>(bin)];
  }
  return bins;
}

std::unordered_map<TokenId, std::uint64_t> token_frequencies(const TokenStream &stream) {
  std::unordered_map<TokenId, std::uint64_t> freq;
  for (const auto &doc : stream.documents)
    for (TokenId t : doc) ++freq[t];
  return freq;
}

double CurveFit::predict(double size) const { return intercept + slope * std::log(size); }

CurveFit fit_loglinear(std::span<const CurvePoint> points) {
  std::vector<double> sizes;
  for (const auto &p : points) {
    if (!(p.size > 0.0)) throw Error(ErrorKind::kUsage, "training sizes must be positive");
    sizes.push_back(p.size);
  }
  std::sort(sizes.begin(), sizes.end());
  if (std::unique(sizes.begin(), sizes.end()) - sizes.begin() < 2)
    throw Error(ErrorKind::kUnderdeterminedFit, "need at least two distinct training sizes");

  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto &p : points) {
    mx += std::log(p.size);
    my += p.accuracy;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto &p : points) {
    const double dx = std::log(p.size) - mx;
    sxx += dx * dx;
    sxy += dx * (p.accuracy - my);
  }
  CurveFit fit;
  fit.points.assign(points.begin(), points.end());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;

  double sff = 0.0, syy = 0.0, sfy = 0.0, mf = 0.0;
  for (const auto &p : points) mf += fit.predict(p.size);
  mf /= n;
  for (const auto &p : points) {
    const double df = fit.predict(p.size) - mf;
    const double dy = p.accuracy - my;
    sff += df * df;
    syy += dy * dy;
    sfy += df * dy;
  }
  fit.r = (sff > 0.0 && syy > 0.0) ? std::clamp(sfy / std::sqrt(sff * syy), -1.0, 1.0) : 0.0;
  return fit;
}

TokenStream take_tokens(const TokenStream &stream, std::size_t tokens) {
  TokenStream out;
  std::size_t left = tokens;
  for (const auto &doc : stream.documents) {
    if (left == 0) break;
    if (doc.size() <= left) {
      out.documents.push_back(doc);
      left -= doc.size();
    } else {
      out.documents.emplace_back(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(left));
      left = 0;
    }
  }
  return out;
}

std::vector<CurvePoint> learning_curve(const TokenStream &train, const TokenStream &test, const Vocabulary &vocab,
                                       std::span<const std::size_t> sizes, Algorithm algorithm, std::size_t width,
                                       const EvalOptions &opts) {
  std::vector<CurvePoint> points;
  for (std::size_t size : sizes) {
    const TokenStream part = take_tokens(train, size);
    const InstanceBase instances = window_instances(part, width, vocab.boundary_id());
    Model model = build_model(instances, compute_weights(instances), vocab, algorithm);
    if (algorithm == Algorithm::kIgtree) model = prune_igtree(std::move(model));
    points.push_back({static_cast<double>(instances.size()), eval_accuracy(model, test, opts).accuracy});
  }
  return points;
}

LatencyReport measure_latency(const Model &model, const TokenStream &test, const EvalOptions &opts,
                              std::size_t max_tokens) {
  const InstanceBase instances = window_instances(test, model.context_width, model.vocab.boundary_id());
  const std::size_t count = max_tokens == 0 ? instances.size() : std::min(max_tokens, instances.size());
  std::vector<double> seconds;
  seconds.reserve(count);
  TiePolicy policy = opts.deterministic ? TiePolicy::deterministic() : TiePolicy::seeded(opts.seed);
  const ClassDistribution &global = model.trie.root().distribution;
  std::size_t sink = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const NeighborResult r = classify(model, instances[i].context, opts.k);
    if (!r.distribution.empty()) sink += resolve_prediction(r.distribution, global, policy);
    const auto stop = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  latency_sink = sink;

  LatencyReport rep;
  rep.tokens = count;
  rep.total_seconds = std::accumulate(seconds.begin(), seconds.end(), 0.0);
  if (count > 0) {
    rep.mean = rep.total_seconds / static_cast<double>(count);
    rep.tokens_per_second = rep.total_seconds > 0.0 ? static_cast<double>(count) / rep.total_seconds : 0.0;
    std::sort(seconds.begin(), seconds.end());
    rep.p50 = percentile(seconds, 0.50);
    rep.p95 = percentile(seconds, 0.95);
  }
  return rep;
}

void write_prediction_log(std::ostream &out, std::span<const PredictionRecord> log) {
  for (const auto &r : log)
    fmt::print(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.position, r.target, r.predicted, r.target_probability,
               r.distribution_size, r.distance, r.match_depth);
}

PredictionLog read_prediction_log(std::istream &in) {
  PredictionLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    PredictionRecord r;
    if (!(fields >> r.position >> r.target >> r.predicted >> r.target_probability >> r.distribution_size >>
          r.distance >> r.match_depth))
      throw Error(ErrorKind::kMalformedInput, "prediction log line " + std::to_string(line_no));
    log.push_back(r);
  }
  return log;
}

void write_report(std::ostream &out, const EvalReport &rep) {
  fmt::print(out, "tokens\t{}\n", rep.token_count);
  fmt::print(out, "correct\t{}\n", rep.correct_count);
  fmt::print(out, "accuracy\t{}\n", rep.accuracy);
  if (rep.perplexity) fmt::print(out, "perplexity\t{}\n", *rep.perplexity);
  fmt::print(out, "coverage\t{}\n", rep.coverage);
  fmt::print(out, "mean_distribution_size\t{}\n", rep.mean_distribution_size);
  fmt::print(out, "median_distribution_size\t{}\n", rep.median_distribution_size);
  if (rep.tokens_per_second) fmt::print(out, "tokens_per_second\t{}\n", *rep.tokens_per_second);
  if (rep.latency_p50) fmt::print(out, "latency_p50\t{}\n", *rep.latency_p50);
  if (rep.latency_p95) fmt::print(out, "latency_p95\t{}\n", *rep.latency_p95);
}

std::string report_json(const EvalReport &rep) {
  nlohmann::json j;
  j["token_count"] = rep.token_count;
  j["correct_count"] = rep.correct_count;
  j["accuracy"] = rep.accuracy;
  j["perplexity"] = rep.perplexity ? nlohmann::json(*rep.perplexity) : nlohmann::json(nullptr);
  j["coverage"] = rep.coverage;
  j["mean_distribution_size"] = rep.mean_distribution_size;
  j["median_distribution_size"] = rep.median_distribution_size;
  if (rep.tokens_per_second) j["tokens_per_second"] = *rep.tokens_per_second;
  if (rep.latency_p50) j["latency_p50"] = *rep.latency_p50;
  if (rep.latency_p95) j["latency_p95"] = *rep.latency_p95;
  return j.dump(2);
}

}  // namespace mblm
