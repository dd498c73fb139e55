#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gossip {

enum class ErrorCode {
  BadShape,
  NegativeRate,
  RowSumViolation,
  Reducible,
  SingularSystem,
  KOutOfRange,
  DegenerateChain,
  AllRatesZero,
  ZeroModeMass,
  ModeMismatch,
  StateSpaceTooLarge,
  NotTwoNodes,
  TooFewBatches,
  DegenerateRun,
  InvalidParams,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code is stable; the message is
/// for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Numeric failures (as opposed to bad input).
  bool is_numeric() const noexcept {
    return code_ == ErrorCode::SingularSystem || code_ == ErrorCode::ZeroModeMass ||
           code_ == ErrorCode::DegenerateRun;
  }

 private:
  ErrorCode code_;
};

}  // namespace gossip
