#ifndef MBLM_EVAL_HH
#define MBLM_EVAL_HH

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mblm/classify.hh"

namespace mblm {

// One line of the prediction log. Every metric below is a fold over a log.
struct PredictionRecord {
  std::size_t position = 0;
  TokenId target = 0;
  TokenId predicted = 0;
  double target_probability = 0.0;
  std::size_t distribution_size = 0;
  double distance = 0.0;
  std::size_t match_depth = 0;

  bool operator==(const PredictionRecord &) const = default;
};

using PredictionLog = std::vector<PredictionRecord>;

struct EvalOptions {
  std::size_t k = 1;
  Normalization normalization;
  bool deterministic = true;
  std::uint64_t seed = 42;
  // Test positions are split into this many contiguous shards evaluated on
  // separate threads; the merged log is in position order either way.
  std::size_t workers = 1;
};

// Classifies every windowed instance of `test` with the model's algorithm.
// With seeded tie-breaking each position gets its own stream derived from
// (seed, position), so results do not depend on the shard count.
PredictionLog predict_stream(const Model &model, const TokenStream &test, const EvalOptions &opts = {});

struct PerplexityResult {
  double perplexity = 0.0;
  double coverage = 0.0;
  std::size_t covered = 0;
};

struct SizeStats {
  double mean = 0.0;
  double median = 0.0;
};

struct EvalReport {
  std::size_t token_count = 0;
  std::size_t correct_count = 0;
  double accuracy = 0.0;
  std::optional<double> perplexity;  // absent when nothing was covered
  double coverage = 0.0;
  double mean_distribution_size = 0.0;
  double median_distribution_size = 0.0;
  std::optional<double> tokens_per_second;
  std::optional<double> latency_p50;  // seconds
  std::optional<double> latency_p95;
};

double accuracy(std::span<const PredictionRecord> log);
// Perplexity 2^(-mean log2 p) over targets with p > 0; coverage is the
// fraction of such targets.
PerplexityResult perplexity(std::span<const PredictionRecord> log);
PerplexityResult perplexity_from_probabilities(std::span<const double> probs);
SizeStats distribution_sizes(std::span<const PredictionRecord> log);
EvalReport summarize(std::span<const PredictionRecord> log);

EvalReport eval_accuracy(const Model &model, const TokenStream &test, const EvalOptions &opts = {});
PerplexityResult eval_perplexity(const Model &model, const TokenStream &test, const Normalization &norm,
                                 EvalOptions opts = {});
// Accuracy on material the model was trained on; same procedure as
// eval_accuracy.
double eval_memorization(const Model &model, const TokenStream &train_prefix, const EvalOptions &opts = {});
SizeStats distribution_stats(const Model &model, const TokenStream &test, const EvalOptions &opts = {});

struct FrequencyBinning {
  // Bin i covers [edges[i], edges[i+1]); the last bin is open-ended.
  std::vector<std::uint64_t> edges;
  std::vector<std::size_t> counts;
};

// {0, 1, 10, 100, ...} up to the first power of ten above max_frequency.
std::vector<std::uint64_t> decade_edges(std::uint64_t max_frequency);

// Tokens missing from train_freq count as frequency 0. Edges must start at
// 0 and increase strictly.
FrequencyBinning frequency_bins(std::span<const TokenId> predictions,
                                const std::unordered_map<TokenId, std::uint64_t> &train_freq,
                                std::span<const std::uint64_t> edges);

std::unordered_map<TokenId, std::uint64_t> token_frequencies(const TokenStream &stream);

struct CurvePoint {
  double size = 0.0;
  double accuracy = 0.0;
};

struct CurveFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r = 0.0;
  std::vector<CurvePoint> points;

  double predict(double size) const;
};

// Least squares accuracy = a + b ln(size).
CurveFit fit_loglinear(std::span<const CurvePoint> points);

// The first `tokens` tokens of `stream`, cutting the last document short if
// needed.
TokenStream take_tokens(const TokenStream &stream, std::size_t tokens);

// Trains one model per training size (weights recomputed per size) and
// measures accuracy on the same held-out stream.
std::vector<CurvePoint> learning_curve(const TokenStream &train, const TokenStream &test, const Vocabulary &vocab,
                                       std::span<const std::size_t> sizes, Algorithm algorithm, std::size_t width,
                                       const EvalOptions &opts = {});

struct LatencyReport {
  std::size_t tokens = 0;
  double total_seconds = 0.0;
  double tokens_per_second = 0.0;
  double mean = 0.0;  // seconds per token
  double p50 = 0.0;
  double p95 = 0.0;
};

// Single-threaded wall-clock timing of classification plus prediction for
// each test position (at most max_tokens of them when non-zero).
LatencyReport measure_latency(const Model &model, const TokenStream &test, const EvalOptions &opts = {},
                              std::size_t max_tokens = 0);

// Tab separated: position, target, predicted, target probability,
// distribution size, distance, match depth.
void write_prediction_log(std::ostream &out, std::span<const PredictionRecord> log);
PredictionLog read_prediction_log(std::istream &in);

void write_report(std::ostream &out, const EvalReport &report);
std::string report_json(const EvalReport &report);

}  // namespace mblm

#endif  // MBLM_EVAL_HH
