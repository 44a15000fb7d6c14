#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emolens/audio_io.hpp"

namespace emolens::features {

struct FeatureConfig {
  double frame_len_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  std::size_t num_mel_filters = 26;
  std::size_t num_cepstra = 13;
  int pipeline_rate_hz = 16000;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;

  std::size_t frame_len_samples() const;
  std::size_t hop_samples() const;
  // Cepstra plus the log-energy column.
  std::size_t num_columns() const { return num_cepstra + 1; }
  // Throws Error(kInvalidArgument) naming the violated constraint.
  void validate() const;
};

// Dense row-major matrix of reals.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Per-frame MFCC matrix: num_cepstra cepstral columns then log-energy.
using FeatureMatrix = Matrix;
using FeatureVector = std::vector<double>;

std::size_t frame_count(std::size_t num_samples, std::size_t frame_len, std::size_t hop);

// floor((N - frame_len) / hop) + 1 frames; a signal shorter than one frame
// yields a single zero-padded frame.
std::vector<std::vector<double>> frame_signal(std::span<const double> samples, std::size_t frame_len,
                                              std::size_t hop);

// 0.54 - 0.46 cos(2 pi k / (n - 1)); n >= 2.
std::vector<double> hamming(std::size_t n);

bool is_power_of_two(std::size_t n) noexcept;

// In-place iterative radix-2 FFT. Throws Error(kNotPowerOfTwo).
void fft_inplace(std::vector<std::complex<double>>& values);

// |DFT| bins 0..fft_size/2 of `frame` zero-padded to fft_size (radix-2).
std::vector<double> dft_magnitude(std::span<const double> frame, std::size_t fft_size);

// Same result by the direct O(N^2) sum. Any fft_size >= 1 is accepted.
std::vector<double> dft_magnitude_naive(std::span<const double> frame, std::size_t fft_size);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Filter centre frequencies (Hz), equally spaced on the mel scale.
std::vector<double> mel_center_frequencies(const FeatureConfig& config);

// num_mel_filters x (fft_size/2 + 1) triangular filters, each peaking at 1.
Matrix mel_filterbank(const FeatureConfig& config);

// Orthonormal DCT-II.
std::vector<double> dct_ii(std::span<const double> values);

FeatureMatrix mfcc(const audio::AudioClip& clip, const FeatureConfig& config);

// Per-column mean followed by per-column population standard deviation.
FeatureVector pool(const FeatureMatrix& matrix);

// Ordered word groups, one per emotion, used for text features.
class Lexicon {
 public:
  struct Group {
    std::string name;
    std::vector<std::string> words;  // lowercase
  };

  Lexicon() = default;
  explicit Lexicon(std::vector<Group> groups);

  // "emotion: word, word, ..." one group per line; '#' starts a comment.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  // Built-in eight-group lexicon; identical to data/lexicon.txt.
  static const Lexicon& builtin();

  std::size_t size() const noexcept { return groups_.size(); }
  const std::vector<Group>& groups() const noexcept { return groups_; }
  bool group_contains(std::size_t group, std::string_view normalized_word) const;

 private:
  std::vector<Group> groups_;
};

// Lowercases and strips leading/trailing punctuation.
std::string normalize_word(std::string_view word);

// Entry k = hits in group k / max(1, number of words).
FeatureVector text_features(std::span<const std::string> words, const Lexicon& lexicon);

// Concatenation, audio first.
FeatureVector fuse(std::span<const double> audio_vec, std::span<const double> text_vec);

}  // namespace emolens::features
