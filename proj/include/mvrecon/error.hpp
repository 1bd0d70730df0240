#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvrecon {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateDepth,
  kEmptyRender,
  kEmptySilhouette,
  kNoContourPoints,
  kNoSeeds,
  kEmptyContourSet,
  kIncompleteGraph,
  kDuplicateEdge,
  kIndexOutOfRange,
  kEmptyInput,
  kLengthMismatch,
  kSizeMismatch,
  kInvalidWeight,
  kInvalidThreshold,
  kEmptyMesh,
  kSpecMismatch,
  kEmptyGrid,
  kEmptyCloud,
  kDegenerateCloud,
  kMeshLoadError,
  kIoError,
  kParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateDepth: return "DegenerateDepth";
    case ErrorCode::kEmptyRender: return "EmptyRender";
    case ErrorCode::kEmptySilhouette: return "EmptySilhouette";
    case ErrorCode::kNoContourPoints: return "NoContourPoints";
    case ErrorCode::kNoSeeds: return "NoSeeds";
    case ErrorCode::kEmptyContourSet: return "EmptyContourSet";
    case ErrorCode::kIncompleteGraph: return "IncompleteGraph";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kInvalidWeight: return "InvalidWeight";
    case ErrorCode::kInvalidThreshold: return "InvalidThreshold";
    case ErrorCode::kEmptyMesh: return "EmptyMesh";
    case ErrorCode::kSpecMismatch: return "SpecMismatch";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kDegenerateCloud: return "DegenerateCloud";
    case ErrorCode::kMeshLoadError: return "MeshLoadError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

// Errors caused by bad user input (arguments, configs, thresholds) rather
// than by the data flowing through a stage. The CLI maps these to exit code 2.
inline bool is_validation_error(ErrorCode code) {
  return code == ErrorCode::kInvalidArgument || code == ErrorCode::kInvalidWeight ||
         code == ErrorCode::kInvalidThreshold || code == ErrorCode::kParseError;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mvrecon
