#include "mblm/weights.hh"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "fmt/format.h"
#include "fmt/ostream.h"
#include "mblm/error.hh"

namespace mblm {
namespace {

std::uint64_t lookup(const auto &map, auto key) {
  auto it = map.find(key);
  return it == map.end() ? 0 : it->second;
}

// Entropy of counts sorted ascending.
double sorted_entropy(std::span<const std::uint64_t> counts, std::uint64_t total) {
  double h = 0.0;
  const double n = static_cast<double>(total);
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

template <typename Map>
std::vector<std::uint64_t> sorted_values(const Map &map) {
  std::vector<std::uint64_t> out;
  out.reserve(map.size());
  for (const auto &kv : map) out.push_back(kv.second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ContingencyTable::ContingencyTable(std::size_t width) : values_(width), joint_(width) {}

void ContingencyTable::accumulate(const InstanceView &inst) {
  ++total_;
  ++classes_[inst.target];
  for (std::size_t pos = 0; pos < values_.size(); ++pos) {
    const TokenId v = inst.feature(pos);
    ++values_[pos][v];
    ++joint_[pos][(static_cast<std::uint64_t>(v) << 32) | inst.target];
  }
}

std::uint64_t ContingencyTable::class_count(TokenId c) const { return lookup(classes_, c); }

std::uint64_t ContingencyTable::value_count(std::size_t position, TokenId v) const {
  return lookup(values_.at(position), v);
}

std::uint64_t ContingencyTable::joint_count(std::size_t position, TokenId v, TokenId c) const {
  return lookup(joint_.at(position), (static_cast<std::uint64_t>(v) << 32) | c);
}

double entropy(std::span<const std::uint64_t> counts) {
  std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t total = std::accumulate(sorted.begin(), sorted.end(), std::uint64_t{0});
  if (total == 0) throw Error(ErrorKind::kUndefinedEntropy, "entropy of an empty distribution");
  return sorted_entropy(sorted, total);
}

double entropy(const std::unordered_map<TokenId, std::uint64_t> &counts) {
  auto v = sorted_values(counts);
  return entropy(std::span<const std::uint64_t>(v));
}

std::vector<std::size_t> order_features(std::span<const double> gain_ratio) {
  std::vector<std::size_t> order(gain_ratio.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gain_ratio[a] > gain_ratio[b]; });
  return order;
}

FeatureWeights make_weights(std::vector<double> gain_ratio, std::vector<double> info_gain,
                            std::vector<double> split_info, double class_entropy) {
  FeatureWeights w;
  w.feature_order = order_features(gain_ratio);
  w.gain_ratio = std::move(gain_ratio);
  w.info_gain = std::move(info_gain);
  w.split_info = std::move(split_info);
  w.class_entropy = class_entropy;
  return w;
}

FeatureWeights finalize_weights(const ContingencyTable &table) {
  if (table.total() == 0) throw Error(ErrorKind::kUndefinedWeights, "no instances accumulated");
  const std::size_t width = table.width();
  const double n = static_cast<double>(table.total());

  const double h_class = entropy(table.class_counts());
  std::vector<double> gr(width), ig(width), si(width);

  for (std::size_t pos = 0; pos < width; ++pos) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cells(table.joint_counts(pos).begin(),
                                                               table.joint_counts(pos).end());
    std::sort(cells.begin(), cells.end());

    // Σ_v P(v)·H(C|v), visiting values in ID order.
    double conditional = 0.0;
    std::vector<std::uint64_t> group;
    for (std::size_t i = 0; i < cells.size();) {
      const std::uint64_t value = cells[i].first >> 32;
      group.clear();
      std::uint64_t n_v = 0;
      for (; i < cells.size() && (cells[i].first >> 32) == value; ++i) {
        group.push_back(cells[i].second);
        n_v += cells[i].second;
      }
      std::sort(group.begin(), group.end());
      conditional += (static_cast<double>(n_v) / n) * sorted_entropy(group, n_v);
    }

    const auto value_counts = sorted_values(table.value_counts(pos));
    si[pos] = sorted_entropy(value_counts, table.total());
    ig[pos] = std::clamp(h_class - conditional, 0.0, h_class);
    gr[pos] = si[pos] > 0.0 ? ig[pos] / si[pos] : 0.0;
  }
  return make_weights(std::move(gr), std::move(ig), std::move(si), h_class);
}

FeatureWeights compute_weights(const InstanceBase &instances) {
  ContingencyTable table(instances.width());
  for (std::size_t i = 0; i < instances.size(); ++i) table.accumulate(instances[i]);
  return finalize_weights(table);
}

FeatureWeights compute_weights(const TokenStream &stream, std::size_t width, TokenId boundary) {
  ContingencyTable table(width);
  for_each_instance(stream, width, boundary, [&](const InstanceView &inst) { table.accumulate(inst); });
  return finalize_weights(table);
}

void dump_weights(std::ostream &out, const FeatureWeights &weights) {
  for (std::size_t pos = 0; pos < weights.width(); ++pos) {
    fmt::print(out, "{}\t{:.17g}\t{:.17g}\t{:.17g}\n", pos, weights.info_gain[pos],
               weights.split_info[pos], weights.gain_ratio[pos]);
  }
}

}  // namespace mblm
