#include "specband/error.hpp"

namespace specband {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::Io: return "Io";
    case ErrorKind::RegistrationMismatch: return "RegistrationMismatch";
    case ErrorKind::EvenPatchSize: return "EvenPatchSize";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::EmptyCube: return "EmptyCube";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
  }
  return "Unknown";
}

}  // namespace specband
