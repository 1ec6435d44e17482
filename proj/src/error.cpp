#include "tofmpi/error.hpp"

namespace tofmpi {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateScene: return "DegenerateScene";
    case ErrorCode::kInvalidScene: return "InvalidScene";
    case ErrorCode::kBelowHorizon: return "BelowHorizon";
    case ErrorCode::kZeroSignal: return "ZeroSignal";
    case ErrorCode::kBadKernelSize: return "BadKernelSize";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNonFiniteData: return "NonFiniteData";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kDivisionByZeroGroundTruth: return "DivisionByZeroGroundTruth";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidCount: return "InvalidCount";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kLayoutMismatch: return "LayoutMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace tofmpi
