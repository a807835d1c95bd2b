#include "cli.hh"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fmt/format.h"
#include "fmt/ostream.h"
#include "json.hpp"
#include "mblm/classify.hh"
#include "mblm/corpus.hh"
#include "mblm/digest.hh"
#include "mblm/eval.hh"
#include "mblm/explain.hh"
#include "mblm/generate.hh"
#include "mblm/model.hh"
#include "mblm/weights.hh"

namespace mblm::cli {
namespace {

using Clock = std::chrono::steady_clock;

struct RunConfig {
  std::string command;
  std::string algorithm = "tribl2";
  std::size_t context = 4;
  std::size_t k = 1;
  std::optional<std::uint64_t> seed;  // seeded-random ties when set
  bool deterministic = false;
  std::string normalize = "proportional";
  std::vector<std::string> corpora;
  std::string vocab;
  std::string model;
  std::string continue_from;
  std::string log;
  std::string json;
  std::string metric = "all";
  std::size_t checkpoint_every = 0;
  std::size_t workers = 1;
  bool id_mode = false;
  bool ids = false;
  bool dump_weights = false;
  bool latency = false;
  bool bins = false;
  bool stats = false;
  std::size_t max_tokens = 32;
  std::string mode = "greedy";
  std::size_t top_k = 10;
  std::string prompt;
  std::string stop;
  std::vector<std::string> query;

  TokenFormat format() const { return id_mode ? TokenFormat::kIds : TokenFormat::kText; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["algorithm"] = algorithm;
    j["context"] = context;
    j["k"] = k;
    j["tie_policy"] = seed ? "seeded" : "deterministic";
    if (seed) j["seed"] = *seed;
    j["normalize"] = normalize;
    j["corpora"] = corpora;
    if (!vocab.empty()) j["vocab"] = vocab;
    if (!model.empty()) j["model"] = model;
    if (!continue_from.empty()) j["continue"] = continue_from;
    j["checkpoint_every"] = checkpoint_every;
    j["id_mode"] = id_mode;
    return j;
  }
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Run configuration sidecar: <model>.json.
void write_sidecar(const RunConfig &cfg, const Model &model, const std::string &path) {
  nlohmann::json j = cfg.to_json();
  j["created"] = utc_now();
  j["corpus_digest"] = to_hex(model.corpus_digest);
  j["instances"] = model.instance_count;
  j["nodes"] = node_count(model);
  std::ofstream out(path + ".json");
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path + ".json");
  out << j.dump(2) << '\n';
}

std::vector<std::filesystem::path> paths(const std::vector<std::string> &v) {
  return {v.begin(), v.end()};
}

TokenStream load_corpora(const RunConfig &cfg, const Vocabulary &vocab) {
  TokenStream all;
  for (const auto &c : cfg.corpora) {
    TokenStream s = load_token_stream(c, vocab, cfg.format());
    std::move(s.documents.begin(), s.documents.end(), std::back_inserter(all.documents));
  }
  return all;
}

void print_train_summary(std::ostream &out, const Model &model, double seconds) {
  const TrieStats s = stats(model);
  fmt::print(out, "algorithm\t{}\n", to_string(model.algorithm));
  fmt::print(out, "context\t{}\n", model.context_width);
  fmt::print(out, "instances\t{}\n", model.instance_count);
  fmt::print(out, "nodes\t{}\n", s.nodes);
  fmt::print(out, "bytes_estimate\t{}\n", s.bytes);
  fmt::print(out, "seconds\t{:.3f}\n", seconds);
}

int cmd_vocab(const RunConfig &cfg, std::ostream &out) {
  const auto p = paths(cfg.corpora);
  const Vocabulary vocab = collect_vocabulary(p);
  if (cfg.vocab.empty()) {
    for (const auto &e : vocab.entries()) out << e << '\n';
  } else {
    save_vocabulary(vocab, cfg.vocab);
  }
  return kOk;
}

int cmd_continue(const RunConfig &cfg, std::ostream &out) {
  const auto start = Clock::now();
  Model model = load_model(cfg.continue_from);
  if (model.pruned || model.algorithm == Algorithm::kIgtree)
    throw Error(ErrorKind::kUnsupportedOperation, "IGTree models cannot be continued");
  if (!cfg.vocab.empty() && !(load_vocabulary(cfg.vocab) == model.vocab))
    throw Error(ErrorKind::kIncompatibleModel, "vocabulary differs from the one stored in the model");

  const TokenStream stream = load_corpora(cfg, model.vocab);
  std::size_t added = 0;
  const std::string target = cfg.model.empty() ? cfg.continue_from : cfg.model;
  for_each_instance(stream, model.context_width, model.vocab.boundary_id(), [&](const InstanceView &inst) {
    insert_instance(model, inst);
    ++added;
    if (cfg.checkpoint_every > 0 && added % cfg.checkpoint_every == 0) save_model(model, target);
  });
  if (added > 0) model.corpus_digest = chain_digest(model.corpus_digest, digest_files(paths(cfg.corpora)));
  save_model(model, target);
  write_sidecar(cfg, model, target);
  print_train_summary(out, model, std::chrono::duration<double>(Clock::now() - start).count());
  return kOk;
}

int cmd_train(const RunConfig &cfg, std::ostream &out) {
  if (!cfg.continue_from.empty()) return cmd_continue(cfg, out);
  if (cfg.model.empty()) throw Error(ErrorKind::kUsage, "--model is required");
  if (cfg.context < 1 || cfg.context > 255) throw Error(ErrorKind::kUsage, "--context must be in 1..255");
  const auto start = Clock::now();
  const Algorithm algorithm = parse_algorithm(cfg.algorithm);

  Vocabulary vocab;
  if (cfg.vocab.empty()) {
    if (cfg.id_mode) throw Error(ErrorKind::kUsage, "--id-mode needs --vocab");
    const auto p = paths(cfg.corpora);
    vocab = collect_vocabulary(p);
  } else {
    vocab = load_vocabulary(cfg.vocab);
  }
  const TokenStream stream = load_corpora(cfg, vocab);
  const InstanceBase instances = window_instances(stream, cfg.context, vocab.boundary_id());
  if (instances.empty()) throw Error(ErrorKind::kMalformedInput, "training corpus holds no tokens");
  FeatureWeights weights = compute_weights(instances);
  if (cfg.dump_weights) dump_weights(out, weights);

  Model model;
  if (cfg.checkpoint_every > 0) {
    // Incremental build with periodic checkpoints.
    model = build_model(InstanceBase(cfg.context), std::move(weights), std::move(vocab), algorithm);
    model.algorithm = algorithm == Algorithm::kIgtree ? Algorithm::kTribl2 : algorithm;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      insert_instance(model, instances[i]);
      if ((i + 1) % cfg.checkpoint_every == 0) save_model(model, cfg.model + ".checkpoint");
    }
    model.algorithm = algorithm;
  } else {
    model = build_model(instances, std::move(weights), std::move(vocab), algorithm);
  }
  model.corpus_digest = digest_files(paths(cfg.corpora));
  if (algorithm == Algorithm::kIgtree) model = prune_igtree(std::move(model));

  save_model(model, cfg.model);
  write_sidecar(cfg, model, cfg.model);
  print_train_summary(out, model, std::chrono::duration<double>(Clock::now() - start).count());
  return kOk;
}

EvalOptions eval_options(const RunConfig &cfg) {
  EvalOptions opts;
  opts.k = cfg.k;
  opts.normalization = parse_normalization(cfg.normalize);
  opts.deterministic = !cfg.seed.has_value();
  opts.seed = cfg.seed.value_or(42);
  opts.workers = cfg.workers;
  return opts;
}

int cmd_eval(const RunConfig &cfg, std::ostream &out) {
  const Model model = load_model(cfg.model);
  const TokenStream test = load_corpora(cfg, model.vocab);
  const EvalOptions opts = eval_options(cfg);
  const PredictionLog log = predict_stream(model, test, opts);
  EvalReport rep = summarize(log);
  if (cfg.latency) {
    const LatencyReport lat = measure_latency(model, test, opts);
    rep.tokens_per_second = lat.tokens_per_second;
    rep.latency_p50 = lat.p50;
    rep.latency_p95 = lat.p95;
  }

  if (!cfg.log.empty()) {
    std::ofstream f(cfg.log);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + cfg.log);
    write_prediction_log(f, log);
  }
  if (!cfg.json.empty()) {
    std::ofstream f(cfg.json);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + cfg.json);
    f << report_json(rep) << '\n';
  }

  nlohmann::json header = cfg.to_json();
  header["algorithm"] = to_string(model.algorithm);
  header["context"] = model.context_width;
  header["corpus_digest"] = to_hex(model.corpus_digest);
  fmt::print(out, "# config {}\n", header.dump());
  if (cfg.metric == "accuracy") {
    fmt::print(out, "tokens\t{}\ncorrect\t{}\naccuracy\t{}\n", rep.token_count, rep.correct_count, rep.accuracy);
  } else if (cfg.metric == "perplexity") {
    const PerplexityResult ppl = perplexity(log);
    fmt::print(out, "tokens\t{}\nperplexity\t{}\ncoverage\t{}\n", rep.token_count, ppl.perplexity, ppl.coverage);
  } else {
    write_report(out, rep);
  }
  if (cfg.bins) {
    std::unordered_map<TokenId, std::uint64_t> freq;
    std::uint64_t top = 0;
    for (const auto &e : model.trie.root().distribution.entries()) {
      freq[e.token] = e.count;
      top = std::max(top, e.count);
    }
    std::vector<TokenId> predicted;
    for (const auto &r : log) predicted.push_back(r.predicted);
    const auto edges = decade_edges(top);
    const auto b = frequency_bins(predicted, freq, edges);
    for (std::size_t i = 0; i < b.counts.size(); ++i) fmt::print(out, "bin\t{}\t{}\n", b.edges[i], b.counts[i]);
  }
  return kOk;
}

std::vector<TokenId> encode_words(const std::vector<std::string> &words, const Vocabulary &vocab,
                                  TokenFormat format) {
  std::string line;
  for (const auto &w : words) {
    line += w;
    line += ' ';
  }
  return encode_line(line, vocab, format);
}

// Query tokens may include the boundary token, unlike corpus text.
std::vector<TokenId> encode_query(const std::vector<std::string> &words, const Vocabulary &vocab, bool id_mode) {
  std::vector<TokenId> out;
  for (const auto &w : words) {
    if (id_mode) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc() || p != w.data() + w.size() || v >= vocab.size())
        throw Error(ErrorKind::kUnknownToken, "bad token ID '" + w + "'");
      out.push_back(static_cast<TokenId>(v));
    } else {
      auto id = vocab.find(w);
      if (!id) throw Error(ErrorKind::kUnknownToken, "'" + w + "'");
      out.push_back(*id);
    }
  }
  return out;
}

int cmd_generate(const RunConfig &cfg, std::ostream &out) {
  const Model model = load_model(cfg.model);
  GenerationConfig g;
  if (cfg.mode == "greedy")
    g.mode = GenerationConfig::Mode::kGreedy;
  else if (cfg.mode == "sample")
    g.mode = GenerationConfig::Mode::kSample;
  else if (cfg.mode == "top-k")
    g.mode = GenerationConfig::Mode::kTopK;
  else
    throw Error(ErrorKind::kUsage, "--mode must be greedy, sample or top-k");
  g.top_k = cfg.top_k;
  g.max_tokens = cfg.max_tokens;
  g.seed = cfg.seed.value_or(42);
  g.normalization = parse_normalization(cfg.normalize);
  g.k = cfg.k;
  if (!cfg.stop.empty()) g.stop_token = encode_query({cfg.stop}, model.vocab, cfg.id_mode).front();

  std::vector<std::string> prompt_words;
  std::istringstream ps(cfg.prompt);
  for (std::string w; ps >> w;) prompt_words.push_back(w);
  const auto prompt = encode_words(prompt_words, model.vocab, cfg.format());

  const auto tokens = generate(model, prompt, g);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out << ' ';
    if (cfg.ids)
      out << tokens[i];
    else
      out << model.vocab.text(tokens[i]);
  }
  out << '\n';
  return kOk;
}

int cmd_inspect(const RunConfig &cfg, std::ostream &out) {
  const Model model = load_model(cfg.model);
  if (cfg.dump_weights) dump_weights(out, model.weights);
  if (cfg.stats) {
    const TrieStats s = stats(model);
    fmt::print(out, "algorithm\t{}\npruned\t{}\ninstances\t{}\nnodes\t{}\nbytes_estimate\t{}\n",
               to_string(model.algorithm), model.pruned, model.instance_count, s.nodes, s.bytes);
    for (std::size_t d = 0; d < s.depth_histogram.size(); ++d)
      fmt::print(out, "depth\t{}\t{}\n", d, s.depth_histogram[d]);
  }
  if (cfg.query.empty() && (cfg.dump_weights || cfg.stats)) return kOk;
  if (cfg.query.size() != model.context_width)
    throw Error(ErrorKind::kUsage, fmt::format("query needs exactly {} tokens, got {}", model.context_width,
                                               cfg.query.size()));
  const auto context = encode_query(cfg.query, model.vocab, cfg.id_mode);
  out << render(explain(model, context, cfg.k), model.vocab);
  return kOk;
}

void add_common(CLI::App *app, RunConfig &cfg) {
  app->add_option("-k", cfg.k, "Number of nearest-distance ranks")->check(CLI::PositiveNumber);
  auto *seed = app->add_option("--seed", cfg.seed, "Seed (random tie-breaking / sampling)");
  app->add_flag("--deterministic", cfg.deterministic, "Deterministic tie-breaking (default)")->excludes(seed);
  app->add_option("--normalize", cfg.normalize, "proportional | softmax | softmax:T");
  app->add_flag("--id-mode", cfg.id_mode, "Inputs hold token IDs instead of texts");
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kUsageError;
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kMalformedVocabulary:
    case ErrorKind::kMalformedInput:
    case ErrorKind::kUnknownToken: return kMalformedInputError;
    case ErrorKind::kIncompatibleModel: return kIncompatibleModelError;
    case ErrorKind::kCorruptModel: return kCorruptModelError;
    case ErrorKind::kUnsupportedOperation: return kUnsupportedError;
    case ErrorKind::kUndefinedEntropy:
    case ErrorKind::kUndefinedWeights:
    case ErrorKind::kNoNeighbors:
    case ErrorKind::kEmptyDistribution:
    case ErrorKind::kUndefinedAccuracy:
    case ErrorKind::kUndefinedPerplexity:
    case ErrorKind::kUnderdeterminedFit: return kClassificationError;
  }
  return kFailure;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Memory-based next-token prediction: train, evaluate, generate, inspect", "mblm"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto *vocab = app.add_subcommand("vocab", "Collect a vocabulary from corpus files");
  vocab->add_option("corpus", cfg.corpora, "Corpus files")->required()->check(CLI::ExistingFile);
  vocab->add_option("-o,--output", cfg.vocab, "Write here instead of stdout");

  auto *train = app.add_subcommand("train", "Train (or continue training) a model");
  train->add_option("corpus", cfg.corpora, "Training corpus files")->required();
  train->add_option("--vocab", cfg.vocab, "Vocabulary file (default: collected from the corpus)");
  train->add_option("-m,--model", cfg.model, "Output model file");
  train->add_option("-a,--algorithm", cfg.algorithm, "ib1 | tribl2 | igtree");
  train->add_option("-c,--context", cfg.context, "Context width n");
  train->add_option("--continue", cfg.continue_from, "Extend this model with the corpus (IB1/TRIBL2)");
  train->add_option("--checkpoint-every", cfg.checkpoint_every, "Save every N instances (0 = off)");
  train->add_flag("--dump-weights", cfg.dump_weights, "Print feature weights");
  train->add_flag("--id-mode", cfg.id_mode, "Corpus holds token IDs");

  auto *eval = app.add_subcommand("eval", "Evaluate a model on a test corpus");
  eval->add_option("corpus", cfg.corpora, "Test corpus files")->required();
  eval->add_option("-m,--model", cfg.model, "Model file")->required();
  add_common(eval, cfg);
  eval->add_option("--metric", cfg.metric, "accuracy | perplexity | all")
      ->check(CLI::IsMember({"accuracy", "perplexity", "all"}));
  eval->add_option("--log", cfg.log, "Write the per-token prediction log here");
  eval->add_option("--json", cfg.json, "Write the report as JSON here");
  eval->add_option("--workers", cfg.workers, "Evaluation threads")->check(CLI::PositiveNumber);
  eval->add_flag("--latency", cfg.latency, "Also time each prediction");
  eval->add_flag("--bins", cfg.bins, "Print training-frequency bins of predicted tokens");

  auto *gen = app.add_subcommand("generate", "Generate text autoregressively");
  gen->add_option("-m,--model", cfg.model, "Model file")->required();
  add_common(gen, cfg);
  gen->add_option("--prompt", cfg.prompt, "Prompt tokens, space separated");
  gen->add_option("--max-tokens", cfg.max_tokens, "Number of tokens to generate");
  gen->add_option("--mode", cfg.mode, "greedy | sample | top-k");
  gen->add_option("--top-k", cfg.top_k, "Candidates kept in top-k mode")->check(CLI::PositiveNumber);
  gen->add_option("--stop", cfg.stop, "Stop after emitting this token");
  gen->add_flag("--ids", cfg.ids, "Print token IDs");

  auto *inspect = app.add_subcommand("inspect", "Explain the classification of one context");
  inspect->add_option("query", cfg.query, "Exactly n context tokens, oldest first");
  inspect->add_option("-m,--model", cfg.model, "Model file")->required();
  add_common(inspect, cfg);
  inspect->add_flag("--dump-weights", cfg.dump_weights, "Print feature weights");
  inspect->add_flag("--stats", cfg.stats, "Print node statistics");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*vocab) {
      cfg.command = "vocab";
      return cmd_vocab(cfg, out);
    }
    if (*train) {
      cfg.command = "train";
      return cmd_train(cfg, out);
    }
    if (*eval) {
      cfg.command = "eval";
      return cmd_eval(cfg, out);
    }
    if (*gen) {
      cfg.command = "generate";
      return cmd_generate(cfg, out);
    }
    if (*inspect) {
      cfg.command = "inspect";
      return cmd_inspect(cfg, out);
    }
  } catch (const Error &e) {
    err << "mblm: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::bad_alloc &) {
    err << "mblm: out of memory\n";
    return kFailure;
  } catch (const std::exception &e) {
    err << "mblm: " << e.what() << '\n';
    return kFailure;
  }
  return kUsageError;
}

}  // namespace mblm::cli
