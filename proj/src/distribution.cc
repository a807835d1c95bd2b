#include "mblm/distribution.hh"

#include <algorithm>

#include "mblm/error.hh"

namespace mblm {

void ClassDistribution::add(TokenId token, std::uint64_t count) {
  if (count == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), token,
                             [](const DistEntry &e, TokenId t) { return e.token < t; });
  if (it != entries_.end() && it->token == token)
    it->count += count;
  else
    entries_.insert(it, DistEntry{token, count});
  total_ += count;
}

void ClassDistribution::merge(const ClassDistribution &other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  std::vector<DistEntry> out;
  out.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->token < b->token)) {
      out.push_back(*a++);
    } else if (a == entries_.end() || b->token < a->token) {
      out.push_back(*b++);
    } else {
      out.push_back({a->token, a->count + b->count});
      ++a;
      ++b;
    }
  }
  entries_ = std::move(out);
  total_ += other.total_;
}

std::uint64_t ClassDistribution::count(TokenId token) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), token,
                             [](const DistEntry &e, TokenId t) { return e.token < t; });
  return (it != entries_.end() && it->token == token) ? it->count : 0;
}

void ClassDistribution::assign_sorted(std::vector<DistEntry> entries) {
  entries_ = std::move(entries);
  total_ = 0;
  for (const auto &e : entries_) total_ += e.count;
}

std::vector<TokenId> tied_maxima(const ClassDistribution &dist, const ClassDistribution &global) {
  if (dist.empty()) throw Error(ErrorKind::kEmptyDistribution, "no candidates to choose from");
  std::uint64_t best = 0;
  for (const auto &e : dist.entries()) best = std::max(best, e.count);
  std::vector<TokenId> tied;
  for (const auto &e : dist.entries())
    if (e.count == best) tied.push_back(e.token);
  if (tied.size() > 1) {
    // Stable sort on global frequency; lower IDs stay first among equals.
    std::stable_sort(tied.begin(), tied.end(),
                     [&](TokenId a, TokenId b) { return global.count(a) > global.count(b); });
  }
  return tied;
}

TokenId majority(const ClassDistribution &dist, const ClassDistribution &global) {
  if (dist.empty()) throw Error(ErrorKind::kEmptyDistribution, "no candidates to choose from");
  const DistEntry *best = nullptr;
  std::uint64_t best_global = 0;
  for (const auto &e : dist.entries()) {
    if (!best || e.count > best->count) {
      best = &e;
      best_global = global.count(e.token);
    } else if (e.count == best->count) {
      const std::uint64_t g = global.count(e.token);
      if (g > best_global) {
        best = &e;
        best_global = g;
      }
    }
  }
  return best->token;
}

}  // namespace mblm
