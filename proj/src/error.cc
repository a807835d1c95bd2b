#include "mblm/error.hh"

namespace mblm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kMalformedVocabulary: return "malformed-vocabulary";
    case ErrorKind::kMalformedInput: return "malformed-input";
    case ErrorKind::kUnknownToken: return "unknown-token";
    case ErrorKind::kUndefinedEntropy: return "undefined-entropy";
    case ErrorKind::kUndefinedWeights: return "undefined-weights";
    case ErrorKind::kUnsupportedOperation: return "unsupported-operation";
    case ErrorKind::kIncompatibleModel: return "incompatible-model";
    case ErrorKind::kCorruptModel: return "corrupt-model";
    case ErrorKind::kNoNeighbors: return "no-neighbors";
    case ErrorKind::kEmptyDistribution: return "empty-distribution";
    case ErrorKind::kUndefinedAccuracy: return "undefined-accuracy";
    case ErrorKind::kUndefinedPerplexity: return "undefined-perplexity";
    case ErrorKind::kUnderdeterminedFit: return "underdetermined-fit";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

}  // namespace mblm
