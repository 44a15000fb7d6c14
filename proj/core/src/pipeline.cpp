#include "emolens/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "emolens/error.hpp"

namespace emolens::pipeline {

namespace {

const features::Lexicon& lexicon_or_builtin(const features::Lexicon* lexicon) {
  return lexicon ? *lexicon : features::Lexicon::builtin();
}

audio::AudioClip slice(const audio::AudioClip& clip, const TimeRange& range) {
  const std::size_t n = clip.samples.size();
  auto to_index = [&](double t) {
    return std::min(n, static_cast<std::size_t>(std::max(0LL, std::llround(t * clip.sample_rate))));
  };
  const std::size_t begin = to_index(range.start_s);
  std::size_t end = to_index(range.end_s);
  if (end <= begin) end = std::min(n, begin + 1);
  audio::AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace

std::vector<TimeRange> segment_audio(const audio::AudioClip& clip, double window_s, double hop_s) {
  if (!(window_s > 0.0) || !(hop_s > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "segment_audio: window and hop must be positive");
  }
  if (clip.samples.empty() || clip.sample_rate <= 0) throw Error(ErrorKind::kEmptyClip, "segment_audio: clip has no samples");
  const double duration = clip.duration_s();
  std::vector<TimeRange> out;
  for (std::size_t k = 0;; ++k) {
    const double start = static_cast<double>(k) * hop_s;
    if (!(start < duration)) break;
    out.push_back({start, std::min(start + window_s, duration)});
  }
  return out;
}

std::size_t feature_width(nn::Arch arch, const features::FeatureConfig& config, const features::Lexicon& lexicon) {
  switch (arch) {
    case nn::Arch::kDnn: return 2 * config.num_columns();
    case nn::Arch::kCnn: return config.num_columns();
    case nn::Arch::kFused: return 2 * config.num_columns() + lexicon.size();
  }
  return 0;
}

nn::Tensor featurize(const audio::AudioClip& clip, const nn::ModelSpec& spec, const features::FeatureConfig& config,
                     std::span<const std::string> words, const features::Lexicon& lexicon) {
  const auto frames = features::mfcc(clip, config);
  switch (spec.arch) {
    case nn::Arch::kDnn: return nn::Tensor::row_vector(features::pool(frames));
    case nn::Arch::kFused: {
      const auto text = features::text_features(words, lexicon);
      return nn::Tensor::row_vector(features::fuse(features::pool(frames), text));
    }
    case nn::Arch::kCnn: {
      // Very short windows are padded by repeating their last frame so the
      // convolution stack still has enough steps.
      const std::size_t rows = std::max(frames.rows, spec.min_input_rows());
      nn::Tensor t({rows, frames.cols});
      for (std::size_t r = 0; r < rows; ++r) {
        const auto src = frames.row(std::min(r, frames.rows - 1));
        std::copy(src.begin(), src.end(), t.data.begin() + static_cast<std::ptrdiff_t>(r * frames.cols));
      }
      return t;
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "featurize: unknown architecture");
}

std::vector<nn::Example> build_examples(std::span<const corpus::ManifestEntry> entries,
                                        const std::filesystem::path& manifest_path, const nn::ModelSpec& spec,
                                        const features::FeatureConfig& config, const features::Lexicon& lexicon) {
  std::vector<nn::Example> out;
  out.reserve(entries.size());
  for (const auto& entry : entries) {
    const auto path = corpus::resolve_entry_path(manifest_path, entry);
    const auto clip = audio::resample(audio::read_wav_file(path), config.pipeline_rate_hz);
    std::vector<std::string> words;
    if (spec.arch == nn::Arch::kFused) {
      const auto sidecar = MockTranscriber::sidecar_for(path);
      std::error_code ec;
      if (std::filesystem::is_regular_file(sidecar, ec)) words = MockTranscriber(sidecar).transcribe(clip).texts();
    }
    out.push_back({featurize(clip, spec, config, words, lexicon), entry.emotion});
  }
  return out;
}

std::vector<Segment> classify_segments(const nn::Model& model, const audio::AudioClip& clip,
                                       std::span<const TimeRange> windows, const ClassifyOptions& options) {
  const auto& lexicon = lexicon_or_builtin(options.lexicon);
  std::vector<Segment> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    std::vector<std::string> words;
    if (model.spec.arch == nn::Arch::kFused && options.transcript) {
      for (const auto& word : options.transcript->words) {
        const double mid = 0.5 * (word.start_s + word.end_s);
        if (mid >= w.start_s && mid < w.end_s) words.push_back(word.text);
      }
    }
    const auto input = featurize(slice(clip, w), model.spec, options.features, words, lexicon);
    Segment seg;
    seg.start_s = w.start_s;
    seg.end_s = w.end_s;
    seg.distribution = nn::predict(model, input);
    seg.top = kAllEmotions[nn::argmax(seg.distribution)];
    out.push_back(seg);
  }
  return out;
}

// --- transcripts ----------------------------------------------------------------

void TimedTranscript::validate() const {
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    const std::string where = "word " + std::to_string(i) + " ('" + w.text + "'): ";
    if (!std::isfinite(w.start_s) || !std::isfinite(w.end_s)) {
      throw Error(ErrorKind::kInvalidTimings, where + "non-finite time");
    }
    if (w.start_s < 0.0) throw Error(ErrorKind::kInvalidTimings, where + "negative start");
    if (w.end_s < w.start_s) throw Error(ErrorKind::kInvalidTimings, where + "ends before it starts");
    if (i > 0) {
      const auto& prev = words[i - 1];
      if (w.start_s < prev.start_s) throw Error(ErrorKind::kInvalidTimings, where + "start times decrease");
      if (w.start_s < prev.end_s) throw Error(ErrorKind::kInvalidTimings, where + "overlaps the previous word");
    }
  }
}

std::vector<std::string> TimedTranscript::texts() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.text);
  return out;
}

std::filesystem::path MockTranscriber::sidecar_for(const std::filesystem::path& audio_path) {
  auto p = audio_path;
  p.replace_extension(".words.json");
  return p;
}

TimedTranscript MockTranscriber::transcribe(const audio::AudioClip&) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(sidecar_, ec)) {
    throw Error(ErrorKind::kTranscriberUnavailable, "no transcript sidecar at " + sidecar_.string());
  }
  std::string text;
  try {
    const auto bytes = audio::read_file(sidecar_);
    text.assign(bytes.begin(), bytes.end());
  } catch (const Error& e) {
    throw Error(ErrorKind::kTranscriberUnavailable, e.what());
  }
  return parse_sidecar(text);
}

TimedTranscript transcribe(const audio::AudioClip& clip, TranscriberInterface& asr) {
  auto transcript = asr.transcribe(clip);
  transcript.validate();
  return transcript;
}

// --- alignment --------------------------------------------------------------------

std::size_t segment_at(std::span<const Segment> segments, double t) {
  if (segments.empty()) throw Error(ErrorKind::kInvalidArgument, "segment_at: no segments");
  std::size_t found = segments.size();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].start_s > t) break;
    if (t < segments[i].end_s) found = i;
  }
  if (found != segments.size()) return found;
  return t < segments.front().start_s ? 0 : segments.size() - 1;
}

std::vector<Emotion> word_emotions(std::span<const Segment> segments, const TimedTranscript& transcript) {
  std::vector<Emotion> out;
  out.reserve(transcript.words.size());
  for (const auto& w : transcript.words) {
    out.push_back(segments[segment_at(segments, 0.5 * (w.start_s + w.end_s))].top);
  }
  return out;
}

std::vector<TranscriptSpan> align(std::span<const Segment> segments, const TimedTranscript& transcript) {
  std::vector<TranscriptSpan> spans;
  if (transcript.words.empty()) return spans;
  const auto emotions = word_emotions(segments, transcript);
  for (std::size_t i = 0; i < transcript.words.size(); ++i) {
    const auto& w = transcript.words[i];
    if (!spans.empty() && spans.back().emotion == emotions[i]) {
      auto& span = spans.back();
      span.text += ' ';
      span.text += w.text;
      span.end_s = w.end_s;
      ++span.word_count;
      continue;
    }
    spans.push_back({w.text, w.start_s, w.end_s, emotions[i], i, 1, false});
  }
  return spans;
}

EmotionCounts summarize(std::span<const Segment> segments) {
  EmotionCounts counts{};
  for (const auto& s : segments) ++counts[index_of(s.top)];
  return counts;
}

std::vector<EnvelopeBin> waveform_envelope(const audio::AudioClip& clip, std::span<const Segment> segments,
                                           int bins_per_second) {
  if (bins_per_second <= 0) throw Error(ErrorKind::kInvalidArgument, "waveform_envelope: bins_per_second must be positive");
  if (clip.sample_rate <= 0) throw Error(ErrorKind::kInvalidArgument, "waveform_envelope: invalid sample rate");
  const auto n = static_cast<std::uint64_t>(clip.samples.size());
  const auto rate = static_cast<std::uint64_t>(clip.sample_rate);
  const auto bps = static_cast<std::uint64_t>(bins_per_second);
  const std::uint64_t bins = (n * bps + rate - 1) / rate;

  std::vector<EnvelopeBin> out(bins);
  for (std::uint64_t b = 0; b < bins; ++b) {
    const std::uint64_t begin = b * rate / bps;
    const std::uint64_t end = std::min(n, (b + 1) * rate / bps);
    auto& bin = out[b];
    if (begin < end) {
      const auto [lo, hi] = std::minmax_element(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                                clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
      bin.min = *lo;
      bin.max = *hi;
    }
    if (!segments.empty()) {
      const double mid = (static_cast<double>(b) + 0.5) / static_cast<double>(bps);
      bin.emotion = segments[segment_at(segments, mid)].top;
    }
  }
  return out;
}

SessionAnalysis filter_view(const SessionAnalysis& analysis, EmotionSet keep) {
  if (keep.empty()) throw Error(ErrorKind::kEmptyFilter, "emotion filter must keep at least one emotion");
  SessionAnalysis view = analysis;
  view.filter = keep;
  for (auto& s : view.segments) s.hidden = !keep.contains(s.top);
  for (auto& s : view.spans) s.hidden = !keep.contains(s.emotion);
  return view;
}

SessionAnalysis analyze(const audio::AudioClip& clip, const nn::Model& model, TranscriberInterface& asr,
                        const AnalyzeOptions& options) {
  const auto& lexicon = lexicon_or_builtin(options.lexicon);
  const auto resampled = audio::resample(clip, options.features.pipeline_rate_hz);
  const auto windows = segment_audio(resampled, options.window_s, options.hop_s);
  const auto transcript = transcribe(clip, asr);

  SessionAnalysis analysis;
  analysis.duration_s = resampled.duration_s();
  analysis.window_s = options.window_s;
  analysis.hop_s = options.hop_s;
  analysis.bins_per_second = options.bins_per_second;
  analysis.segments = classify_segments(model, resampled, windows, {options.features, &lexicon, &transcript});
  analysis.summary = summarize(analysis.segments);
  analysis.envelope = waveform_envelope(resampled, analysis.segments, options.bins_per_second);
  analysis.spans = align(analysis.segments, transcript);
  return analysis;
}

}  // namespace emolens::pipeline
