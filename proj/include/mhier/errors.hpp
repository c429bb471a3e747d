#pragma once

#include <stdexcept>
#include <string>

namespace mhier {

// Every recoverable failure in the library carries one of these kinds, so
// callers (and tests) can dispatch without parsing messages.
enum class Err {
  EmptyInput,
  BadInput,
  SelfLoop,
  DisconnectedGraph,
  EmptySet,
  FullSet,
  Overlap,
  GroundMismatch,
  SingleGround,
  CapExcludesSource,
  NotConnected,
  NotACycle,
  OverlappingCycles,
  InvalidCycleCollection,
  UnreachableTarget,
  TerminalReached,
  ClassificationViolation,
  WrongParticleCount,
  IndexOutOfRange,
  CapExceeded,
  SingularSystem,
};

const char* err_name(Err kind);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& message)
      : std::runtime_error(std::string(err_name(kind)) + ": " + message), kind_(kind) {}

  Err kind() const { return kind_; }

 private:
  Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool ok, Err kind, const std::string& message) {
  if (!ok) fail(kind, message);
}

}  // namespace mhier
