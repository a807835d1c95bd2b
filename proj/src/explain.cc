#include "mblm/explain.hh"

#include <charconv>
#include <sstream>

#include "fmt/format.h"
#include "mblm/error.hh"

namespace mblm {
namespace {

constexpr std::string_view kArrow = "→";

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void bad(const std::string &what) { throw Error(ErrorKind::kMalformedInput, "explanation: " + what); }

TokenId token(std::string_view text, const Vocabulary &vocab) {
  auto id = vocab.find(text);
  if (!id) bad("unknown token '" + std::string(text) + "'");
  return *id;
}

std::uint64_t integer(std::string_view text) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) bad("expected an integer, got '" + std::string(text) + "'");
  return v;
}

double real(std::string_view text) {
  double v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) bad("expected a number, got '" + std::string(text) + "'");
  return v;
}

void expect(std::string_view got, std::string_view want) {
  if (got != want) bad("expected '" + std::string(want) + "', got '" + std::string(got) + "'");
}

}  // namespace

ExplanationReport explain(const Model &model, std::span<const TokenId> context, std::size_t k) {
  ExplanationReport rep;
  rep.query.assign(context.begin(), context.end());
  rep.degraded = model.algorithm == Algorithm::kIgtree;
  rep.result = rep.degraded ? classify_igtree(model, context) : classify(model, context, k, true);
  TiePolicy policy = TiePolicy::deterministic();
  rep.prediction = resolve_prediction(rep.result.distribution, model.trie.root().distribution, policy);
  return rep;
}

std::string render(const ExplanationReport &report, const Vocabulary &vocab) {
  std::string out = "query";
  for (TokenId t : report.query) fmt::format_to(std::back_inserter(out), " {}", vocab.text(t));
  fmt::format_to(std::back_inserter(out), " {} prediction {} distance {} neighbors {} depth {}\n", kArrow,
                 vocab.text(report.prediction), report.result.distance, report.result.neighbor_count,
                 report.result.match_depth);
  if (!report.degraded) {
    for (const auto &n : report.result.neighbors) {
      fmt::format_to(std::back_inserter(out), "neighbor {}", n.distance);
      for (TokenId t : n.context) fmt::format_to(std::back_inserter(out), " {}", vocab.text(t));
      fmt::format_to(std::back_inserter(out), " {} {} {}\n", kArrow, vocab.text(n.target), n.count);
    }
  }
  out += "distribution";
  for (const auto &e : report.result.distribution.entries())
    fmt::format_to(std::back_inserter(out), " {} {}", vocab.text(e.token), e.count);
  out += '\n';
  return out;
}

ExplanationReport parse_explanation(std::string_view text, const Vocabulary &vocab) {
  ExplanationReport rep;
  rep.degraded = true;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false, dist = false;
  while (std::getline(in, line)) {
    auto w = words(line);
    if (w.empty()) continue;
    if (w[0] == "query") {
      if (w.size() < 10) bad("short header line");
      const std::size_t tail = w.size() - 9;
      for (std::size_t i = 1; i < tail; ++i) rep.query.push_back(token(w[i], vocab));
      expect(w[tail], kArrow);
      expect(w[tail + 1], "prediction");
      rep.prediction = token(w[tail + 2], vocab);
      expect(w[tail + 3], "distance");
      rep.result.distance = real(w[tail + 4]);
      expect(w[tail + 5], "neighbors");
      rep.result.neighbor_count = integer(w[tail + 6]);
      expect(w[tail + 7], "depth");
      rep.result.match_depth = integer(w[tail + 8]);
      header = true;
    } else if (w[0] == "neighbor") {
      if (w.size() < 5) bad("short neighbor line");
      Neighbor n;
      n.distance = real(w[1]);
      const std::size_t arrow = w.size() - 3;
      for (std::size_t i = 2; i < arrow; ++i) n.context.push_back(token(w[i], vocab));
      expect(w[arrow], kArrow);
      n.target = token(w[arrow + 1], vocab);
      n.count = integer(w[arrow + 2]);
      rep.result.neighbors.push_back(std::move(n));
      rep.degraded = false;
    } else if (w[0] == "distribution") {
      if (w.size() % 2 != 1) bad("odd distribution field count");
      for (std::size_t i = 1; i < w.size(); i += 2) rep.result.distribution.add(token(w[i], vocab), integer(w[i + 1]));
      dist = true;
    } else {
      bad("unexpected line '" + line + "'");
    }
  }
  if (!header || !dist) bad("missing header or distribution line");
  return rep;
}

}  // namespace mblm
