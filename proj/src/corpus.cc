#include "mblm/corpus.hh"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "mblm/error.hh"

namespace mblm {
namespace {

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

void strip_cr(std::string &line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r'; }

// Calls fn(token, column) for each whitespace-separated token; column is
// 1-based.
template <typename Fn>
void split_tokens(std::string_view line, Fn &&fn) {
  std::size_t column = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    fn(line.substr(i, j - i), ++column);
    i = j;
  }
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> entries) : entries_(std::move(entries)) {
  index_.reserve(entries_.size() + 1);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].empty())
      throw Error(ErrorKind::kMalformedVocabulary, "empty token text at line " + std::to_string(i + 1));
    auto [it, fresh] = index_.emplace(entries_[i], static_cast<TokenId>(i));
    if (!fresh)
      throw Error(ErrorKind::kMalformedVocabulary,
                  "duplicate token '" + entries_[i] + "' at line " + std::to_string(i + 1));
  }
  if (auto it = index_.find(std::string(kBoundaryText)); it != index_.end()) {
    boundary_id_ = it->second;
  } else {
    boundary_id_ = static_cast<TokenId>(entries_.size());
    entries_.emplace_back(kBoundaryText);
    index_.emplace(std::string(kBoundaryText), boundary_id_);
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary read_vocabulary(std::istream &in) {
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    entries.push_back(line);
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "error while reading vocabulary");
  return Vocabulary(std::move(entries));
}

Vocabulary load_vocabulary(const std::filesystem::path &path) {
  auto in = open_input(path);
  return read_vocabulary(in);
}

void save_vocabulary(const Vocabulary &vocab, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto &e : vocab.entries()) out << e << '\n';
  if (!out) throw Error(ErrorKind::kIo, "error while writing " + path.string());
}

Vocabulary collect_vocabulary(std::span<const std::filesystem::path> corpora) {
  std::vector<std::string> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  for (const auto &path : corpora) {
    auto in = open_input(path);
    while (std::getline(in, line)) {
      strip_cr(line);
      split_tokens(line, [&](std::string_view tok, std::size_t) {
        if (tok == kBoundaryText) return;
        if (seen.emplace(tok).second) entries.emplace_back(tok);
      });
    }
  }
  return Vocabulary(std::move(entries));
}

std::size_t TokenStream::token_count() const {
  std::size_t n = 0;
  for (const auto &d : documents) n += d.size();
  return n;
}

std::vector<TokenId> encode_line(std::string_view line, const Vocabulary &vocab, TokenFormat format,
                                 std::size_t line_number) {
  std::vector<TokenId> doc;
  auto where = [&](std::size_t column) {
    return "line " + std::to_string(line_number) + ", token " + std::to_string(column);
  };
  split_tokens(line, [&](std::string_view tok, std::size_t column) {
    TokenId id = 0;
    if (format == TokenFormat::kIds) {
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw Error(ErrorKind::kMalformedInput, "not a token ID '" + std::string(tok) + "' at " + where(column));
      if (value >= vocab.size())
        throw Error(ErrorKind::kUnknownToken, "ID " + std::string(tok) + " out of range at " + where(column));
      id = static_cast<TokenId>(value);
    } else {
      auto found = vocab.find(tok);
      if (!found) throw Error(ErrorKind::kUnknownToken, "'" + std::string(tok) + "' at " + where(column));
      id = *found;
    }
    if (id == vocab.boundary_id())
      throw Error(ErrorKind::kMalformedInput, "reserved boundary token at " + where(column));
    doc.push_back(id);
  });
  return doc;
}

TokenStream read_token_stream(std::istream &in, const Vocabulary &vocab, TokenFormat format) {
  TokenStream stream;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    stream.documents.push_back(encode_line(line, vocab, format, ++line_number));
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "error while reading corpus");
  return stream;
}

TokenStream load_token_stream(const std::filesystem::path &path, const Vocabulary &vocab,
                              TokenFormat format) {
  auto in = open_input(path);
  try {
    return read_token_stream(in, vocab, format);
  } catch (const Error &e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void InstanceBase::push_back(std::span<const TokenId> context, TokenId target) {
  contexts_.insert(contexts_.end(), context.begin(), context.end());
  targets_.push_back(target);
}

void InstanceBase::reserve(std::size_t n) {
  contexts_.reserve(n * width_);
  targets_.reserve(n);
}

InstanceBase window_instances(const TokenStream &stream, std::size_t width, TokenId boundary) {
  InstanceBase base(width);
  base.reserve(stream.token_count());
  for_each_instance(stream, width, boundary, [&](const InstanceView &inst) { base.push_back(inst); });
  return base;
}

void write_instances(std::ostream &out, const InstanceBase &instances, const Vocabulary *vocab) {
  auto put = [&](TokenId id) {
    if (vocab)
      out << vocab->text(id);
    else
      out << id;
  };
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto inst = instances[i];
    for (TokenId t : inst.context) {
      put(t);
      out << ' ';
    }
    put(inst.target);
    out << '\n';
  }
}

}  // namespace mblm
