#ifndef MBLM_ERROR_HH
#define MBLM_ERROR_HH

#include <stdexcept>
#include <string>
#include <string_view>

namespace mblm {

enum class ErrorKind {
  kIo,
  kMalformedVocabulary,
  kMalformedInput,
  kUnknownToken,
  kUndefinedEntropy,
  kUndefinedWeights,
  kUnsupportedOperation,
  kIncompatibleModel,
  kCorruptModel,
  kNoNeighbors,
  kEmptyDistribution,
  kUndefinedAccuracy,
  kUndefinedPerplexity,
  kUnderdeterminedFit,
  kUsage,
};

std::string_view to_string(ErrorKind kind);

// Library failure tagged with an ErrorKind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message);

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string &detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace mblm

#endif  // MBLM_ERROR_HH
