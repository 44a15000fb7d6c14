#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emolens {

// Every failure the library reports is an emolens::Error carrying one of
// these kinds; callers branch on kind(), humans read what().
enum class ErrorKind {
  kInvalidArgument,
  kIo,
  // audio_io
  kMalformedContainer,
  kUnsupportedFormat,
  // features
  kNotPowerOfTwo,
  // nn
  kShapeMismatch,
  kEmptyDataset,
  kMalformedModel,
  // corpus
  kUnknownEmotion,
  kMalformedRow,
  kBadFilename,
  kEmptyCorpus,
  // evalmetrics
  kLengthMismatch,
  // pipeline
  kEmptyClip,
  kTranscriberUnavailable,
  kInvalidTimings,
  kEmptyFilter,
  // service
  kUnknownPatient,
  kMalformedAudio,
  kAnalysisFailed,
  kNotFound,
  kNotReady,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace emolens
