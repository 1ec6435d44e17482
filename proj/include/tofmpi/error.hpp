#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tofmpi {

enum class ErrorCode {
  kDegenerateScene,
  kInvalidScene,
  kBelowHorizon,
  kZeroSignal,
  kBadKernelSize,
  kDimensionMismatch,
  kEmptyInput,
  kNonFiniteData,
  kBadMagic,
  kVersionMismatch,
  kTruncatedFile,
  kDivisionByZeroGroundTruth,
  kIoError,
  kInvalidCount,
  kInsufficientData,
  kLayoutMismatch,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tofmpi
