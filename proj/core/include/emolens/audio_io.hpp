#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace emolens::audio {

// Decoded mono PCM. Samples live in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_s() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// RIFF/WAVE, PCM 16-bit, 1 or 2 channels. Chunks may appear in any order and
// unknown chunks are skipped. Stereo is downmixed by the per-sample mean.
// Throws Error(kMalformedContainer) or Error(kUnsupportedFormat).
AudioClip parse_wav(std::span<const std::uint8_t> bytes);

// 16-bit PCM mono WAV with the canonical 44-byte header. Samples outside
// [-1, 1] are clamped.
std::vector<std::uint8_t> write_wav(const AudioClip& clip);

// Linear-interpolation resampling (no anti-alias filter). Output length is
// round(len * target / source).
AudioClip resample(const AudioClip& clip, int target_rate);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

inline AudioClip read_wav_file(const std::filesystem::path& path) { return parse_wav(read_file(path)); }

}  // namespace emolens::audio
