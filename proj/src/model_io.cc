// Binary model format (all integers little-endian):
//
//   header   "MTLM" | version u32 | algorithm u8 | context_width u8 |
//            pruned u8 | reserved u8 | instance_count u64 | vocab_size u32 |
//            n x f64 gain_ratio | n x f64 info_gain | n x f64 split_info |
//            corpus digest (32 bytes)
//   vocab    vocab_size x (length u32, UTF-8 bytes), in ID order
//   trie     pre-order node records: value u32 (root 0xFFFFFFFF) |
//            child count u32 | entry count u32 | entries (token u32, count u64)
//            sorted by token | child records
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "mblm/error.hh"
#include "mblm/model.hh"

namespace mblm {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const std::uint8_t *>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1, "u8")); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4, "u32")); }
  std::uint64_t u64() { return get(8, "u64"); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> bytes(std::size_t n, const char *what) {
    need(n, what);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw Error(ErrorKind::kCorruptModel, what + " at byte offset " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n, const char *what) const {
    if (data_.size() - pos_ < n)
      throw Error(ErrorKind::kCorruptModel, std::string("truncated file: expected ") + what +
                                                " at byte offset " + std::to_string(pos_));
  }
  std::uint64_t get(int n, const char *what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_node(Writer &w, const TrieNode &node) {
  w.u32(node.value);
  w.u32(static_cast<std::uint32_t>(node.children.size()));
  w.u32(static_cast<std::uint32_t>(node.distribution.size()));
  for (const auto &e : node.distribution.entries()) {
    w.u32(e.token);
    w.u64(e.count);
  }
}

ClassDistribution read_distribution(Reader &r, std::uint32_t entries, std::size_t vocab_size) {
  std::vector<DistEntry> out;
  out.reserve(std::min<std::size_t>(entries, r.remaining() / 12));
  for (std::uint32_t i = 0; i < entries; ++i) {
    const TokenId t = r.u32();
    const std::uint64_t c = r.u64();
    if (t >= vocab_size) r.fail("distribution token out of vocabulary range");
    if (c == 0) r.fail("zero-count distribution entry");
    if (!out.empty() && out.back().token >= t) r.fail("distribution entries out of order");
    out.push_back({t, c});
  }
  ClassDistribution d;
  d.assign_sorted(std::move(out));
  return d;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model &model) {
  const std::size_t n = model.context_width;
  if (n > 255) throw Error(ErrorKind::kUnsupportedOperation, "context width above 255 cannot be stored");
  if (model.vocab.size() > 0xFFFFFFFFu) throw Error(ErrorKind::kUnsupportedOperation, "vocabulary too large");

  Writer w;
  w.bytes(kModelMagic.data(), kModelMagic.size());
  w.u32(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(model.algorithm));
  w.u8(static_cast<std::uint8_t>(n));
  w.u8(model.pruned ? 1 : 0);
  w.u8(0);
  w.u64(model.instance_count);
  w.u32(static_cast<std::uint32_t>(model.vocab.size()));
  for (double v : model.weights.gain_ratio) w.f64(v);
  for (double v : model.weights.info_gain) w.f64(v);
  for (double v : model.weights.split_info) w.f64(v);
  w.bytes(model.corpus_digest.data(), model.corpus_digest.size());

  for (const auto &text : model.vocab.entries()) {
    w.u32(static_cast<std::uint32_t>(text.size()));
    w.bytes(text.data(), text.size());
  }

  const Trie &trie = model.trie;
  std::vector<NodeIndex> stack{0};
  while (!stack.empty()) {
    const TrieNode &node = trie.node(stack.back());
    stack.pop_back();
    write_node(w, node);
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(it->node);
  }
  return w.take();
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  const std::size_t head = std::min(bytes.size(), kModelMagic.size());
  if (std::memcmp(bytes.data(), kModelMagic.data(), head) != 0)
    throw Error(ErrorKind::kIncompatibleModel, "not a model file (bad magic)");
  if (head < kModelMagic.size())
    throw Error(ErrorKind::kCorruptModel, "file truncated inside the magic at byte offset " + std::to_string(head));
  Reader r(bytes);
  r.bytes(kModelMagic.size(), "magic");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw Error(ErrorKind::kIncompatibleModel, "unsupported format version " + std::to_string(version));

  Model m;
  const std::uint8_t algorithm = r.u8();
  if (algorithm > static_cast<std::uint8_t>(Algorithm::kIgtree)) r.fail("unknown algorithm code");
  m.algorithm = static_cast<Algorithm>(algorithm);
  m.context_width = r.u8();
  const std::uint8_t pruned = r.u8();
  if (pruned > 1) r.fail("invalid pruned flag");
  m.pruned = pruned == 1;
  if (m.pruned && m.algorithm != Algorithm::kIgtree) r.fail("pruned flag set on a non-IGTree model");
  r.u8();  // reserved
  m.instance_count = r.u64();
  const std::uint32_t vocab_size = r.u32();

  const std::size_t n = m.context_width;
  std::vector<double> gr(n), ig(n), si(n);
  for (auto &v : gr) v = r.f64();
  for (auto &v : ig) v = r.f64();
  for (auto &v : si) v = r.f64();
  for (std::size_t i = 0; i < n; ++i)
    if (!(gr[i] >= 0.0) || !(ig[i] >= 0.0) || !(si[i] >= 0.0) || !std::isfinite(gr[i]))
      r.fail("invalid feature weight");
  auto digest = r.bytes(m.corpus_digest.size(), "corpus digest");
  std::copy(digest.begin(), digest.end(), m.corpus_digest.begin());

  std::vector<std::string> entries;
  entries.reserve(std::min<std::size_t>(vocab_size, r.remaining() / 4));
  bool has_boundary = false;
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const std::uint32_t len = r.u32();
    auto text = r.bytes(len, "vocabulary entry");
    entries.emplace_back(reinterpret_cast<const char *>(text.data()), text.size());
    has_boundary = has_boundary || entries.back() == kBoundaryText;
  }
  if (!has_boundary) r.fail("vocabulary lacks the boundary token");
  try {
    m.vocab = Vocabulary(std::move(entries));
  } catch (const Error &e) {
    r.fail(std::string("invalid vocabulary (") + e.detail() + ")");
  }

  m.weights = make_weights(std::move(gr), std::move(ig), std::move(si));
  m.trie = Trie(m.weights.feature_order);

  if (r.u32() != kRootValue) r.fail("root record lacks the sentinel value");
  const std::uint32_t root_children = r.u32();
  const std::uint32_t root_entries = r.u32();
  m.trie.mutable_distribution(0) = read_distribution(r, root_entries, vocab_size);

  struct Open {
    NodeIndex node;
    std::uint32_t remaining;
  };
  std::vector<Open> stack{{0, root_children}};
  while (!stack.empty()) {
    Open &top = stack.back();
    if (top.remaining == 0) {
      stack.pop_back();
      continue;
    }
    --top.remaining;
    const NodeIndex parent = top.node;
    if (m.trie.node(parent).depth >= n) r.fail("node deeper than the context width");
    const TokenId value = r.u32();
    if (value >= vocab_size) r.fail("node value out of vocabulary range");
    const std::uint32_t children = r.u32();
    const std::uint32_t entries_count = r.u32();
    auto dist = read_distribution(r, entries_count, vocab_size);
    NodeIndex child = kNoNode;
    try {
      child = m.trie.append_child(parent, value, std::move(dist));
    } catch (const Error &e) {
      r.fail(e.detail());
    }
    stack.push_back({child, children});
  }
  if (!r.at_end()) r.fail("trailing bytes after trie block");

  std::vector<std::uint64_t> root_counts;
  for (const auto &e : m.trie.root().distribution.entries()) root_counts.push_back(e.count);
  if (!root_counts.empty()) m.weights.class_entropy = entropy(std::span<const std::uint64_t>(root_counts));
  return m;
}

void save_model(const Model &model, const std::filesystem::path &path) {
  const auto bytes = serialize_model(model);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIo, "error while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot move model into place at " + path.string() + ": " + ec.message());
}

Model load_model(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::kIo, "error while reading " + path.string());
  return deserialize_model(bytes);
}

}  // namespace mblm
