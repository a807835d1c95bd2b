#ifndef MBLM_DISTRIBUTION_HH
#define MBLM_DISTRIBUTION_HH

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mblm/corpus.hh"

namespace mblm {

struct DistEntry {
  TokenId token;
  std::uint64_t count;

  bool operator==(const DistEntry &) const = default;
};

// Sparse next-token counts, kept sorted by token ID with no zero entries.
class ClassDistribution {
 public:
  ClassDistribution() = default;

  void add(TokenId token, std::uint64_t count = 1);
  void merge(const ClassDistribution &other);

  std::uint64_t count(TokenId token) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const DistEntry> entries() const { return entries_; }

  // Replaces the content with entries that must be sorted by token, unique
  // and non-zero.
  void assign_sorted(std::vector<DistEntry> entries);

  std::size_t heap_bytes() const { return entries_.capacity() * sizeof(DistEntry); }

  bool operator==(const ClassDistribution &other) const {
    return total_ == other.total_ && entries_ == other.entries_;
  }

 private:
  std::vector<DistEntry> entries_;
  std::uint64_t total_ = 0;
};

// Deterministic majority: highest count, then higher count in `global`
// (the model's root distribution), then lower token ID. Requires a
// non-empty distribution.
TokenId majority(const ClassDistribution &dist, const ClassDistribution &global);

// All tokens sharing the maximum count, ordered by the deterministic rule
// above (best first).
std::vector<TokenId> tied_maxima(const ClassDistribution &dist, const ClassDistribution &global);

}  // namespace mblm

#endif  // MBLM_DISTRIBUTION_HH
