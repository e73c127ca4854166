#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtk {

// Every failure the library reports carries one of these codes. Callers that
// need to branch on the failure kind inspect Error::code().
enum class Errc {
  InvalidArgument,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  IdCountMismatch,
  DuplicateId,
  NonFinite,
  BadRotation,
  UnknownLabel,
  AmbiguousLabel,
  JointCountMismatch,
  TooFewFrames,
  DegenerateFacing,
  ShapeMismatch,
  NoFootJoints,
  DimensionMismatch,
  TooFewSamples,
  IdMisalignment,
  UnresolvableGroup,
  UniverseMismatch,
  TooManyTracks,
  SchemaError,
  Io,
  Parse,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::IdCountMismatch: return "IdCountMismatch";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::NonFinite: return "NonFinite";
    case Errc::BadRotation: return "BadRotation";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::AmbiguousLabel: return "AmbiguousLabel";
    case Errc::JointCountMismatch: return "JointCountMismatch";
    case Errc::TooFewFrames: return "TooFewFrames";
    case Errc::DegenerateFacing: return "DegenerateFacing";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NoFootJoints: return "NoFootJoints";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::IdMisalignment: return "IdMisalignment";
    case Errc::UnresolvableGroup: return "UnresolvableGroup";
    case Errc::UniverseMismatch: return "UniverseMismatch";
    case Errc::TooManyTracks: return "TooManyTracks";
    case Errc::SchemaError: return "SchemaError";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mtk
