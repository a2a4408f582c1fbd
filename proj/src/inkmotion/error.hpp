#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inkmotion {

enum class ErrorCode {
  InvalidArgument,
  EmptyMask,
  SpacingTooCoarse,
  DegenerateBoundary,
  RefinementDiverged,
  InvalidPoisson,
  NonFiniteState,
  WrongRigKind,
  BadMagic,
  TruncatedStream,
  DimensionOverflow,
  DimensionMismatch,
  IoFailure,
  ParseError,
  ValidationError,
  FileNotFound,
  BadImage,
  StaleRevision,
  StaleSimulation,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A scene or patch field that violates its invariant. `path` is a JSON path
// such as "strokes[0].radius".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(ErrorCode::ValidationError, path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Raised when integration produces NaN/inf. frame is 1-based (the frame being
// advanced), substep is 0-based within that frame.
class NonFiniteState : public Error {
 public:
  NonFiniteState(int frame, int substep, std::size_t body)
      : Error(ErrorCode::NonFiniteState,
              "non-finite state in body " + std::to_string(body) +
                  " at frame " + std::to_string(frame) + ", substep " +
                  std::to_string(substep) +
                  " (reduce dt or stiffness)"),
        frame_(frame),
        substep_(substep),
        body_(body) {}

  int frame() const noexcept { return frame_; }
  int substep() const noexcept { return substep_; }
  std::size_t body() const noexcept { return body_; }

 private:
  int frame_;
  int substep_;
  std::size_t body_;
};

}  // namespace inkmotion
