#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emolens/audio_io.hpp"
#include "emolens/corpus.hpp"
#include "emolens/emotion.hpp"
#include "emolens/features.hpp"
#include "emolens/nn.hpp"

namespace emolens::pipeline {

struct TimeRange {
  double start_s = 0.0;
  double end_s = 0.0;
  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  nn::EmotionDistribution distribution{};
  Emotion top = Emotion::kNeutral;  // argmax, lower index wins ties
  bool hidden = false;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct TimedWord {
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

struct TimedTranscript {
  std::vector<TimedWord> words;

  // Finite, non-negative, start <= end, non-overlapping and ordered.
  // Throws Error(kInvalidTimings).
  void validate() const;
  std::vector<std::string> texts() const;

  friend bool operator==(const TimedTranscript&, const TimedTranscript&) = default;
};

struct TranscriptSpan {
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
  Emotion emotion = Emotion::kNeutral;
  std::size_t first_word = 0;
  std::size_t word_count = 0;
  bool hidden = false;

  friend bool operator==(const TranscriptSpan&, const TranscriptSpan&) = default;
};

struct EnvelopeBin {
  double min = 0.0;
  double max = 0.0;
  Emotion emotion = Emotion::kNeutral;
  friend bool operator==(const EnvelopeBin&, const EnvelopeBin&) = default;
};

using EmotionCounts = std::array<std::size_t, kNumEmotions>;

struct SessionAnalysis {
  double duration_s = 0.0;
  double window_s = 3.0;
  double hop_s = 1.0;
  int bins_per_second = 20;
  std::vector<Segment> segments;
  EmotionCounts summary{};
  std::vector<EnvelopeBin> envelope;
  std::vector<TranscriptSpan> spans;
  EmotionSet filter = EmotionSet::all();

  friend bool operator==(const SessionAnalysis&, const SessionAnalysis&) = default;
};

// --- segmentation & classification -------------------------------------------

// Windows start at 0, hop, 2*hop, ... while start < duration; each ends at
// min(start + window, duration). Throws Error(kEmptyClip).
std::vector<TimeRange> segment_audio(const audio::AudioClip& clip, double window_s = 3.0, double hop_s = 1.0);

// Input width a model of `arch` needs under the given feature settings.
std::size_t feature_width(nn::Arch arch, const features::FeatureConfig& config, const features::Lexicon& lexicon);

// Model input for one clip (already at the pipeline rate): pooled MFCC row
// for DNN, the MFCC frame matrix for CNN, pooled MFCC + text for FUSED.
nn::Tensor featurize(const audio::AudioClip& clip, const nn::ModelSpec& spec, const features::FeatureConfig& config,
                     std::span<const std::string> words, const features::Lexicon& lexicon);

// Loads every manifest entry (relative paths resolve against the manifest's
// directory), resamples it to the pipeline rate and featurizes it for
// `spec`. FUSED models read words from each clip's ".words.json" sidecar
// when one exists.
std::vector<nn::Example> build_examples(std::span<const corpus::ManifestEntry> entries,
                                        const std::filesystem::path& manifest_path, const nn::ModelSpec& spec,
                                        const features::FeatureConfig& config, const features::Lexicon& lexicon);

struct ClassifyOptions {
  features::FeatureConfig features;
  const features::Lexicon* lexicon = nullptr;      // builtin when null
  const TimedTranscript* transcript = nullptr;     // only read by FUSED models
};

std::vector<Segment> classify_segments(const nn::Model& model, const audio::AudioClip& clip,
                                       std::span<const TimeRange> windows, const ClassifyOptions& options);

// --- transcription -------------------------------------------------------------

class TranscriberInterface {
 public:
  virtual ~TranscriberInterface() = default;
  // Throws Error(kTranscriberUnavailable) when no transcript can be produced.
  virtual TimedTranscript transcribe(const audio::AudioClip& clip) = 0;
};

// Reads a ".words.json" sidecar: [{"text": ..., "start_s": ..., "end_s": ...}, ...].
class MockTranscriber final : public TranscriberInterface {
 public:
  explicit MockTranscriber(std::filesystem::path sidecar) : sidecar_(std::move(sidecar)) {}

  // "talk.wav" -> "talk.words.json"
  static std::filesystem::path sidecar_for(const std::filesystem::path& audio_path);

  TimedTranscript transcribe(const audio::AudioClip& clip) override;

 private:
  std::filesystem::path sidecar_;
};

// Returns a transcript supplied up front (e.g. uploaded alongside the audio).
class FixedTranscriber final : public TranscriberInterface {
 public:
  explicit FixedTranscriber(TimedTranscript transcript) : transcript_(std::move(transcript)) {}
  TimedTranscript transcribe(const audio::AudioClip&) override { return transcript_; }

 private:
  TimedTranscript transcript_;
};

// Sidecar JSON <-> transcript. parse_sidecar throws Error(kInvalidTimings).
TimedTranscript parse_sidecar(std::string_view json);
std::string format_sidecar(const TimedTranscript& transcript);

// Runs the transcriber and validates its output.
TimedTranscript transcribe(const audio::AudioClip& clip, TranscriberInterface& asr);

// --- alignment & summaries -------------------------------------------------------

// Index of the latest-starting segment whose [start, end) contains t; times
// past the last segment map to the last one. Segments must be non-empty.
std::size_t segment_at(std::span<const Segment> segments, double t);

// Emotion of each word: the segment containing the word's midpoint.
std::vector<Emotion> word_emotions(std::span<const Segment> segments, const TimedTranscript& transcript);

// Consecutive words with the same emotion merge into one span.
std::vector<TranscriptSpan> align(std::span<const Segment> segments, const TimedTranscript& transcript);

EmotionCounts summarize(std::span<const Segment> segments);

// ceil(duration * bins_per_second) bins of (min, max, emotion at bin midpoint).
std::vector<EnvelopeBin> waveform_envelope(const audio::AudioClip& clip, std::span<const Segment> segments,
                                           int bins_per_second = 20);

// Marks segments and spans outside `keep` hidden; summary untouched.
// Throws Error(kEmptyFilter).
SessionAnalysis filter_view(const SessionAnalysis& analysis, EmotionSet keep);

struct AnalyzeOptions {
  features::FeatureConfig features;
  double window_s = 3.0;
  double hop_s = 1.0;
  int bins_per_second = 20;
  const features::Lexicon* lexicon = nullptr;
};

// Resample -> segment -> classify -> transcribe -> align -> summarise.
SessionAnalysis analyze(const audio::AudioClip& clip, const nn::Model& model, TranscriberInterface& asr,
                        const AnalyzeOptions& options = {});

// --- JSON ---------------------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

// Deterministic serialisation (fixed key order, round-trip precision).
std::string to_json(const SessionAnalysis& analysis);
SessionAnalysis analysis_from_json(std::string_view json);

// "happy,sad" -> set. Throws Error(kUnknownEmotion) / Error(kEmptyFilter).
EmotionSet parse_emotion_list(std::string_view csv);

}  // namespace emolens::pipeline
