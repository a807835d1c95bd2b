#ifndef MBLM_TESTS_SUPPORT_HH
#define MBLM_TESTS_SUPPORT_HH

#include <functional>
#include <optional>

#include <gtest/gtest.h>

#include "mblm/error.hh"

namespace mblm {

// The kind of the Error thrown by fn, or nullopt when it returns normally.
inline std::optional<ErrorKind> kind_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace mblm

#endif  // MBLM_TESTS_SUPPORT_HH
