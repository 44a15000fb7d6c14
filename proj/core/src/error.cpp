#include "emolens/error.hpp"

namespace emolens {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kMalformedContainer: return "MalformedContainer";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kNotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kMalformedModel: return "MalformedModel";
    case ErrorKind::kUnknownEmotion: return "UnknownEmotion";
    case ErrorKind::kMalformedRow: return "MalformedRow";
    case ErrorKind::kBadFilename: return "BadFilename";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kEmptyClip: return "EmptyClip";
    case ErrorKind::kTranscriberUnavailable: return "TranscriberUnavailable";
    case ErrorKind::kInvalidTimings: return "InvalidTimings";
    case ErrorKind::kEmptyFilter: return "EmptyFilter";
    case ErrorKind::kUnknownPatient: return "UnknownPatient";
    case ErrorKind::kMalformedAudio: return "MalformedAudio";
    case ErrorKind::kAnalysisFailed: return "AnalysisFailed";
    case ErrorKind::kNotFound: return "NotFound";
    case ErrorKind::kNotReady: return "NotReady";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace emolens
