#include "mblm/model.hh"

#include <algorithm>
#include <cctype>
#include <string>

#include "mblm/error.hh"

namespace mblm {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kIb1: return "ib1";
    case Algorithm::kTribl2: return "tribl2";
    case Algorithm::kIgtree: return "igtree";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "ib1" || s == "ib1-ig" || s == "ib1ig") return Algorithm::kIb1;
  if (s == "tribl2") return Algorithm::kTribl2;
  if (s == "igtree") return Algorithm::kIgtree;
  throw Error(ErrorKind::kUsage, "unknown algorithm '" + std::string(name) + "'");
}

Model build_model(const InstanceBase &instances, FeatureWeights weights, Vocabulary vocab,
                  Algorithm algorithm) {
  if (weights.width() != instances.width())
    throw Error(ErrorKind::kUsage, "weights arity " + std::to_string(weights.width()) +
                                       " does not match context width " + std::to_string(instances.width()));
  Model m;
  m.algorithm = algorithm;
  m.context_width = instances.width();
  m.trie = Trie::build(instances, weights.feature_order);
  m.weights = std::move(weights);
  m.vocab = std::move(vocab);
  m.instance_count = instances.size();
  return m;
}

void insert_instance(Model &model, const InstanceView &inst) {
  if (model.pruned || model.algorithm == Algorithm::kIgtree)
    throw Error(ErrorKind::kUnsupportedOperation,
                "cannot insert into an IGTree model; rebuild from a lossless trie and prune again");
  if (inst.context.size() != model.context_width)
    throw Error(ErrorKind::kUsage, "instance width " + std::to_string(inst.context.size()) +
                                       " does not match model width " + std::to_string(model.context_width));
  model.trie.insert(inst);
  ++model.instance_count;
}

Model prune_igtree(Model model) {
  if (model.pruned) return model;
  model.trie.prune_redundant();
  model.pruned = true;
  model.algorithm = Algorithm::kIgtree;
  return model;
}

std::size_t node_count(const Model &model) { return model.trie.node_count(); }

TrieStats stats(const Model &model) { return model.trie.stats(); }

bool structurally_equal(const Model &a, const Model &b) {
  return a.algorithm == b.algorithm && a.context_width == b.context_width && a.pruned == b.pruned &&
         a.instance_count == b.instance_count && a.corpus_digest == b.corpus_digest &&
         a.weights.gain_ratio == b.weights.gain_ratio && a.weights.info_gain == b.weights.info_gain &&
         a.weights.split_info == b.weights.split_info && a.weights.feature_order == b.weights.feature_order &&
         a.vocab == b.vocab && structurally_equal(a.trie, b.trie);
}

}  // namespace mblm
