#ifndef MBLM_MODEL_HH
#define MBLM_MODEL_HH

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "mblm/corpus.hh"
#include "mblm/trie.hh"
#include "mblm/weights.hh"

namespace mblm {

enum class Algorithm : std::uint8_t { kIb1 = 0, kTribl2 = 1, kIgtree = 2 };

std::string_view to_string(Algorithm algorithm);
// Accepts "ib1", "ib1-ig", "tribl2", "igtree" (case-insensitive).
Algorithm parse_algorithm(std::string_view name);

using Digest = std::array<std::uint8_t, 32>;

struct Model {
  Algorithm algorithm = Algorithm::kTribl2;
  std::size_t context_width = 0;
  FeatureWeights weights;
  Vocabulary vocab;
  Trie trie;
  bool pruned = false;
  std::uint64_t instance_count = 0;
  Digest corpus_digest{};

  bool lossless() const { return !pruned; }
};

// Lossless trie over `instances`, levels in weights.feature_order. The
// algorithm tag only selects the classifier used later; IGTree models still
// need prune_igtree.
Model build_model(const InstanceBase &instances, FeatureWeights weights, Vocabulary vocab,
                  Algorithm algorithm);

// Throws kUnsupportedOperation for pruned / IGTree models.
void insert_instance(Model &model, const InstanceView &inst);

Model prune_igtree(Model model);

std::size_t node_count(const Model &model);
TrieStats stats(const Model &model);

// Trie shape, distributions, weights, vocabulary and flags. The class entropy
// is not part of the file format and is therefore not compared.
bool structurally_equal(const Model &a, const Model &b);

inline constexpr std::array<char, 4> kModelMagic{'M', 'T', 'L', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model &model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model &model, const std::filesystem::path &path);
Model load_model(const std::filesystem::path &path);

}  // namespace mblm

#endif  // MBLM_MODEL_HH
