#include "emolens/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "emolens/error.hpp"
#include "emolens/features.hpp"

namespace emolens::fixtures {

namespace {

constexpr std::array<double, kNumEmotions> kToneHz = {220.0, 300.0, 410.0, 560.0, 760.0, 1030.0, 1400.0, 1900.0};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

std::string lexicon_text() {
  std::string out = "# Affect lexicon: one group per emotion, canonical order.\n";
  for (const auto& g : features::Lexicon::builtin().groups()) {
    out += g.name + ":";
    for (std::size_t i = 0; i < g.words.size(); ++i) out += (i ? ", " : " ") + g.words[i];
    out += '\n';
  }
  return out;
}

const std::string& lexicon_word(Emotion e, std::size_t i) {
  const auto& words = features::Lexicon::builtin().groups()[index_of(e)].words;
  return words[i % words.size()];
}

}  // namespace

double tone_frequency(Emotion e) noexcept { return kToneHz[index_of(e)]; }

audio::AudioClip synth_tone(Emotion e, double seconds, int sample_rate, Rng& rng) {
  const double f0 = tone_frequency(e) * rng.uniform(0.97, 1.03);
  const double level = rng.uniform(0.3, 0.7);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  const double fade = 0.01 * sample_rate;

  audio::AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double w = 2.0 * std::numbers::pi * f0 * t + phase;
    double s = std::sin(w) + 0.35 * std::sin(2.0 * w) + 0.15 * std::sin(3.0 * w);
    s = level * s / 1.5 + 0.01 * rng.normal();
    const double edge = std::min(static_cast<double>(i), static_cast<double>(n - 1 - i));
    if (edge < fade) s *= edge / fade;
    clip.samples[i] = std::clamp(s, -1.0, 1.0);
  }
  return clip;
}

Emotion session_emotion_at(double t_s, double session_seconds) noexcept {
  const double frac = t_s / session_seconds;
  if (frac < 0.3) return Emotion::kHappy;
  if (frac < 0.6) return Emotion::kSad;
  if (frac < 0.8) return Emotion::kAngry;
  return Emotion::kCalm;
}

audio::AudioClip synth_session(double seconds, int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  audio::AudioClip session;
  session.sample_rate = sample_rate;
  const auto total = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  // One continuous tone per emotion region.
  constexpr std::array<double, 5> kBounds = {0.0, 0.3, 0.6, 0.8, 1.0};
  for (std::size_t r = 0; r + 1 < kBounds.size(); ++r) {
    const auto end = r + 2 == kBounds.size() ? total : static_cast<std::size_t>(std::llround(kBounds[r + 1] * total));
    if (end <= session.samples.size()) continue;
    const double len = static_cast<double>(end - session.samples.size()) / sample_rate;
    const auto piece = synth_tone(session_emotion_at(kBounds[r] * seconds, seconds), len, sample_rate, rng);
    session.samples.insert(session.samples.end(), piece.samples.begin(),
                           piece.samples.begin() + static_cast<std::ptrdiff_t>(end - session.samples.size()));
  }
  return session;
}

pipeline::TimedTranscript session_transcript(double seconds) {
  pipeline::TimedTranscript t;
  const auto words = static_cast<std::size_t>(std::floor(seconds));
  for (std::size_t i = 0; i < words; ++i) {
    const double start = static_cast<double>(i) + 0.2;
    const Emotion e = session_emotion_at(start, seconds);
    t.words.push_back({lexicon_word(e, i), start, start + 0.5});
  }
  return t;
}

FixtureSet generate_fixtures(const std::filesystem::path& out_dir, const FixtureOptions& options) {
  namespace fs = std::filesystem;
  if (options.clips_per_emotion == 0 || !(options.clip_seconds > 0.0) || options.sample_rate <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "generate_fixtures: invalid options");
  }
  fs::create_directories(out_dir / "clips");
  Rng rng(options.seed);

  FixtureSet set;
  for (Emotion e : kAllEmotions) {
    for (std::size_t i = 0; i < options.clips_per_emotion; ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "clips/%s_%02zu.wav", std::string(to_string(e)).c_str(), i);
      const fs::path rel(name);
      audio::write_file(out_dir / rel, audio::write_wav(synth_tone(e, options.clip_seconds, options.sample_rate, rng)));

      pipeline::TimedTranscript words;
      words.words.push_back({lexicon_word(e, i), 0.1, 0.4});
      words.words.push_back({"and", 0.45, 0.55});
      words.words.push_back({lexicon_word(e, i + 1), 0.6, 0.9});
      write_text(pipeline::MockTranscriber::sidecar_for(out_dir / rel), pipeline::format_sidecar(words));

      char actor[8];
      std::snprintf(actor, sizeof(actor), "%02zu", i % 4 + 1);
      set.entries.push_back({rel.generic_string(), e, actor, corpus::DatasetTag::kOther});
    }
  }

  set.manifest = out_dir / "manifest.csv";
  corpus::save_manifest(set.entries, set.manifest);
  set.lexicon = out_dir / "lexicon.txt";
  write_text(set.lexicon, lexicon_text());

  set.session_wav = out_dir / "session.wav";
  audio::write_file(set.session_wav,
                    audio::write_wav(synth_session(options.session_seconds, options.sample_rate, options.seed + 1)));
  set.session_sidecar = pipeline::MockTranscriber::sidecar_for(set.session_wav);
  write_text(set.session_sidecar, pipeline::format_sidecar(session_transcript(options.session_seconds)));
  return set;
}

}  // namespace emolens::fixtures
