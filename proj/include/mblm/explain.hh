#ifndef MBLM_EXPLAIN_HH
#define MBLM_EXPLAIN_HH

#include <string>
#include <string_view>
#include <vector>

#include "mblm/classify.hh"

namespace mblm {

struct ExplanationReport {
  std::vector<TokenId> query;
  TokenId prediction = 0;
  NeighborResult result;
  // IGTree: no neighbor provenance, only the distribution and path depth.
  bool degraded = false;
};

ExplanationReport explain(const Model &model, std::span<const TokenId> context, std::size_t k = 1);

// Plain text:
//   query <w-n> ... <w-1> → prediction <tok> distance <d> neighbors <c> depth <m>
//   neighbor <distance> <w-n> ... <w-1> → <target> <count>      (one per outcome)
//   distribution <tok> <count> <tok> <count> ...
std::string render(const ExplanationReport &report, const Vocabulary &vocab);

// Inverse of render(); token texts are mapped back through `vocab`.
ExplanationReport parse_explanation(std::string_view text, const Vocabulary &vocab);

}  // namespace mblm

#endif  // MBLM_EXPLAIN_HH
