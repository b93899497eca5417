#pragma once

#include <stdexcept>
#include <string>

namespace ggmcov {

/// Error categories surfaced by the library. The CLI maps these onto exit
/// codes: configuration problems -> 2, model/numerical problems -> 3,
/// internal assertion failures -> 4.
enum class Errc {
  // configuration / input shape
  ConfigError,
  BadShape,
  NodeCoverage,
  EmptySeparator,
  NotDecomposable,
  IndexMismatch,
  DimensionMismatch,
  GammaOutOfRange,
  BadPriors,
  BadK,
  DegenerateInput,
  // numerical / model
  NotSpd,
  InconsistentSeparator,
  CholeskyFailure,
  NumericalConsistency,
  // internal assertions
  EquivalenceViolation,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ConfigError: return "ConfigError";
    case Errc::BadShape: return "BadShape";
    case Errc::NodeCoverage: return "NodeCoverage";
    case Errc::EmptySeparator: return "EmptySeparator";
    case Errc::NotDecomposable: return "NotDecomposable";
    case Errc::IndexMismatch: return "IndexMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::GammaOutOfRange: return "GammaOutOfRange";
    case Errc::BadPriors: return "BadPriors";
    case Errc::BadK: return "BadK";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::NotSpd: return "NotSpd";
    case Errc::InconsistentSeparator: return "InconsistentSeparator";
    case Errc::CholeskyFailure: return "CholeskyFailure";
    case Errc::NumericalConsistency: return "NumericalConsistency";
    case Errc::EquivalenceViolation: return "EquivalenceViolation";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const noexcept { return code_; }

  /// Exit code the CLI uses for this error family.
  int exit_code() const noexcept {
    switch (code_) {
      case Errc::ConfigError:
        return 2;
      case Errc::EquivalenceViolation:
        return 4;
      default:
        return 3;
    }
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) {
  throw Error(c, msg);
}

inline void require(bool cond, Errc c, const std::string& msg) {
  if (!cond) fail(c, msg);
}

}  // namespace ggmcov
