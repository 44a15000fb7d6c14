#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "emolens/audio_io.hpp"
#include "emolens/corpus.hpp"
#include "emolens/emotion.hpp"
#include "emolens/pipeline.hpp"
#include "emolens/random.hpp"

namespace emolens::fixtures {

// Synthetic stand-in corpus: one harmonic tone family per emotion, so the
// eight classes are separable from MFCCs alone.
struct FixtureOptions {
  std::size_t clips_per_emotion = 20;
  double clip_seconds = 1.0;
  int sample_rate = 16000;
  double session_seconds = 10.0;
  std::uint64_t seed = 7;
};

struct FixtureSet {
  std::filesystem::path manifest;
  std::filesystem::path lexicon;
  std::filesystem::path session_wav;
  std::filesystem::path session_sidecar;
  std::vector<corpus::ManifestEntry> entries;
};

double tone_frequency(Emotion e) noexcept;

// One clip of emotion `e`'s tone with jittered pitch and level plus light noise.
audio::AudioClip synth_tone(Emotion e, double seconds, int sample_rate, Rng& rng);

// Emotion of the fixture session at time t: blocks happy | sad | angry | calm.
Emotion session_emotion_at(double t_s, double session_seconds) noexcept;

audio::AudioClip synth_session(double seconds, int sample_rate, std::uint64_t seed);
pipeline::TimedTranscript session_transcript(double seconds);

// Writes clips/<emotion>_<nn>.wav (+ .words.json sidecars), manifest.csv,
// lexicon.txt, session.wav and session.words.json under `out_dir`.
FixtureSet generate_fixtures(const std::filesystem::path& out_dir, const FixtureOptions& options = {});

}  // namespace emolens::fixtures
