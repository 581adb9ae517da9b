#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specband {

enum class ErrorKind {
  ShapeMismatch,
  NonFinite,
  NonFiniteGradient,
  IndexOutOfRange,
  InvalidArgument,
  HeaderMismatch,
  TruncatedPayload,
  UnsupportedDtype,
  Io,
  RegistrationMismatch,
  EvenPatchSize,
  InvalidSpec,
  InsufficientSamples,
  EmptyCube,
  RankDeficient,
  EmptyTestSet,
  DegenerateInput,
  DivergedLoss,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace specband
