#ifndef MBLM_WEIGHTS_HH
#define MBLM_WEIGHTS_HH

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "mblm/corpus.hh"

namespace mblm {

// Sufficient statistics for information gain / gain ratio: per feature
// position the value counts and the (value, class) joint counts, plus the
// global class counts.
class ContingencyTable {
 public:
  explicit ContingencyTable(std::size_t width);

  std::size_t width() const { return values_.size(); }
  std::uint64_t total() const { return total_; }

  void accumulate(const InstanceView &inst);
  void accumulate(const Instance &inst) { accumulate(inst.view()); }

  std::uint64_t class_count(TokenId c) const;
  std::uint64_t value_count(std::size_t position, TokenId v) const;
  std::uint64_t joint_count(std::size_t position, TokenId v, TokenId c) const;

  const std::unordered_map<TokenId, std::uint64_t> &class_counts() const { return classes_; }
  const std::unordered_map<TokenId, std::uint64_t> &value_counts(std::size_t position) const {
    return values_[position];
  }
  // Keyed by (value << 32 | class).
  const std::unordered_map<std::uint64_t, std::uint64_t> &joint_counts(std::size_t position) const {
    return joint_[position];
  }

 private:
  std::uint64_t total_ = 0;
  std::unordered_map<TokenId, std::uint64_t> classes_;
  std::vector<std::unordered_map<TokenId, std::uint64_t>> values_;
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> joint_;
};

struct FeatureWeights {
  std::vector<double> gain_ratio;
  std::vector<double> info_gain;
  std::vector<double> split_info;
  double class_entropy = 0.0;
  // Feature positions by descending gain ratio, ties to the lower position.
  std::vector<std::size_t> feature_order;

  std::size_t width() const { return gain_ratio.size(); }
};

// Shannon entropy in bits of a count vector. Zero counts contribute nothing.
double entropy(std::span<const std::uint64_t> counts);
double entropy(const std::unordered_map<TokenId, std::uint64_t> &counts);

FeatureWeights finalize_weights(const ContingencyTable &table);

// Builds the weights record from stored gain ratios (model loading), with
// feature_order recomputed.
FeatureWeights make_weights(std::vector<double> gain_ratio, std::vector<double> info_gain,
                            std::vector<double> split_info, double class_entropy = 0.0);

std::vector<std::size_t> order_features(std::span<const double> gain_ratio);

FeatureWeights compute_weights(const InstanceBase &instances);
FeatureWeights compute_weights(const TokenStream &stream, std::size_t width, TokenId boundary);

// position, info_gain, split_info, gain_ratio; tab separated.
void dump_weights(std::ostream &out, const FeatureWeights &weights);

}  // namespace mblm

#endif  // MBLM_WEIGHTS_HH
