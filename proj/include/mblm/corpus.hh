#ifndef MBLM_CORPUS_HH
#define MBLM_CORPUS_HH

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mblm {

using TokenId = std::uint32_t;

// Reserved text for the document-start padding token. It may not occur in
// corpus documents.
inline constexpr std::string_view kBoundaryText = "<|boundary|>";

class Vocabulary {
 public:
  // Boundary-only vocabulary.
  Vocabulary();

  // Entries in ID order. The boundary text is appended if it is not already
  // present. Duplicate texts are rejected.
  explicit Vocabulary(std::vector<std::string> entries);

  std::size_t size() const { return entries_.size(); }
  TokenId boundary_id() const { return boundary_id_; }

  std::optional<TokenId> find(std::string_view text) const;
  const std::string &text(TokenId id) const { return entries_.at(id); }
  const std::vector<std::string> &entries() const { return entries_; }

  bool operator==(const Vocabulary &other) const {
    return entries_ == other.entries_ && boundary_id_ == other.boundary_id_;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId boundary_id_ = 0;
};

// One token text per line, line index = ID.
Vocabulary load_vocabulary(const std::filesystem::path &path);
Vocabulary read_vocabulary(std::istream &in);
// Writes the boundary-augmented form (boundary text included as an entry).
void save_vocabulary(const Vocabulary &vocab, const std::filesystem::path &path);

// Token texts in order of first occurrence across the given corpus files.
Vocabulary collect_vocabulary(std::span<const std::filesystem::path> corpora);

enum class TokenFormat { kText, kIds };

struct TokenStream {
  std::vector<std::vector<TokenId>> documents;

  std::size_t token_count() const;
};

TokenStream load_token_stream(const std::filesystem::path &path, const Vocabulary &vocab,
                              TokenFormat format = TokenFormat::kText);
TokenStream read_token_stream(std::istream &in, const Vocabulary &vocab,
                              TokenFormat format = TokenFormat::kText);

// Encodes one whitespace-separated line. `line_number` is only used in error
// messages (1-based).
std::vector<TokenId> encode_line(std::string_view line, const Vocabulary &vocab,
                                 TokenFormat format, std::size_t line_number = 1);

// Position 0 is the token directly before the target (w-1), position 1 is
// w-2, and so on. Context arrays themselves are stored in text order
// [w-n ... w-1].
inline std::size_t position_to_index(std::size_t position, std::size_t width) {
  return width - 1 - position;
}

struct InstanceView {
  std::span<const TokenId> context;
  TokenId target;

  TokenId feature(std::size_t position) const {
    return context[position_to_index(position, context.size())];
  }
};

struct Instance {
  std::vector<TokenId> context;
  TokenId target = 0;

  TokenId feature(std::size_t position) const {
    return context[position_to_index(position, context.size())];
  }
  InstanceView view() const { return {context, target}; }
  bool operator==(const Instance &) const = default;
};

// Flat storage for a sequence of fixed-width instances.
class InstanceBase {
 public:
  explicit InstanceBase(std::size_t width) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }

  void push_back(std::span<const TokenId> context, TokenId target);
  void push_back(const InstanceView &inst) { push_back(inst.context, inst.target); }
  void reserve(std::size_t n);

  InstanceView operator[](std::size_t i) const {
    return {std::span<const TokenId>(contexts_.data() + i * width_, width_), targets_[i]};
  }

 private:
  std::size_t width_;
  std::vector<TokenId> contexts_;
  std::vector<TokenId> targets_;
};

// Calls fn(InstanceView) once per token of every document. Positions before
// the document start are filled with `boundary`; documents never share
// context.
template <typename Fn>
void for_each_instance(const TokenStream &stream, std::size_t width, TokenId boundary, Fn &&fn) {
  std::vector<TokenId> window(width, boundary);
  for (const auto &doc : stream.documents) {
    std::fill(window.begin(), window.end(), boundary);
    for (TokenId tok : doc) {
      fn(InstanceView{window, tok});
      if (width > 0) {
        std::shift_left(window.begin(), window.end(), 1);
        window.back() = tok;
      }
    }
  }
}

InstanceBase window_instances(const TokenStream &stream, std::size_t width, TokenId boundary);

// Debug dump: one instance per line, context fields then target.
void write_instances(std::ostream &out, const InstanceBase &instances,
                     const Vocabulary *vocab = nullptr);

}  // namespace mblm

#endif  // MBLM_CORPUS_HH
