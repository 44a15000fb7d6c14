#include "emolens/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "emolens/error.hpp"

namespace emolens::features {

namespace {

constexpr double kLogFloor = 1e-10;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

constexpr std::string_view kBuiltinLexicon =
    "neutral: okay, fine, normal, usual, regular, alright, today, plan\n"
    "calm: calm, relaxed, peaceful, quiet, gentle, steady, rest, easy\n"
    "happy: happy, glad, great, wonderful, love, joy, excited, smile\n"
    "sad: sad, lonely, cry, miss, tired, hurt, lost, down\n"
    "angry: angry, mad, furious, hate, annoyed, unfair, yell, rage\n"
    "fearful: afraid, scared, worried, nervous, anxious, fear, panic, terrified\n"
    "disgust: gross, disgusting, sick, awful, nasty, revolting, yuck, filthy\n"
    "surprised: surprised, wow, unexpected, sudden, shocked, amazing, really, suddenly\n";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::size_t FeatureConfig::frame_len_samples() const {
  return static_cast<std::size_t>(std::llround(frame_len_ms * pipeline_rate_hz / 1000.0));
}

std::size_t FeatureConfig::hop_samples() const {
  return static_cast<std::size_t>(std::llround(hop_ms * pipeline_rate_hz / 1000.0));
}

void FeatureConfig::validate() const {
  if (pipeline_rate_hz <= 0) invalid("FeatureConfig: pipeline_rate_hz must be positive");
  if (frame_len_samples() < 2) invalid("FeatureConfig: frame length must be at least 2 samples");
  if (hop_samples() < 1) invalid("FeatureConfig: hop must be at least 1 sample");
  if (!is_power_of_two(fft_size)) invalid("FeatureConfig: fft_size must be a power of two");
  if (fft_size < frame_len_samples()) invalid("FeatureConfig: fft_size smaller than frame length");
  if (num_mel_filters < 1) invalid("FeatureConfig: num_mel_filters must be positive");
  if (num_cepstra < 1 || num_cepstra > num_mel_filters) {
    invalid("FeatureConfig: num_cepstra must lie in [1, num_mel_filters]");
  }
  if (fmin_hz < 0.0 || fmin_hz >= fmax_hz) invalid("FeatureConfig: need 0 <= fmin_hz < fmax_hz");
  if (fmax_hz > pipeline_rate_hz / 2.0) invalid("FeatureConfig: fmax_hz above Nyquist");
}

std::size_t frame_count(std::size_t num_samples, std::size_t frame_len, std::size_t hop) {
  if (frame_len < 1 || hop < 1) invalid("frame_signal: frame_len and hop must be >= 1");
  if (num_samples < frame_len) return 1;
  return (num_samples - frame_len) / hop + 1;
}

std::vector<std::vector<double>> frame_signal(std::span<const double> samples, std::size_t frame_len,
                                              std::size_t hop) {
  const std::size_t count = frame_count(samples.size(), frame_len, hop);
  std::vector<std::vector<double>> frames(count, std::vector<double>(frame_len, 0.0));
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t start = f * hop;
    const std::size_t take = std::min(frame_len, samples.size() - start);
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), take, frames[f].begin());
  }
  return frames;
}

std::vector<double> hamming(std::size_t n) {
  if (n < 2) invalid("hamming: n must be >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom);
  }
  return w;
}

bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

void fft_inplace(std::vector<std::complex<double>>& values) {
  const std::size_t n = values.size();
  if (!is_power_of_two(n)) {
    throw Error(ErrorKind::kNotPowerOfTwo, "fft size " + std::to_string(n) + " is not a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(values[i], values[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const double step = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Direct twiddles; a running product drifts past 1e-9 at N = 1024.
        const std::complex<double> w = std::polar(1.0, step * static_cast<double>(k));
        const std::complex<double> odd = w * values[start + k + half];
        values[start + k + half] = values[start + k] - odd;
        values[start + k] += odd;
      }
    }
  }
}

std::vector<double> dft_magnitude(std::span<const double> frame, std::size_t fft_size) {
  if (!is_power_of_two(fft_size)) {
    throw Error(ErrorKind::kNotPowerOfTwo, "fft size " + std::to_string(fft_size) + " is not a power of two");
  }
  if (frame.size() > fft_size) invalid("dft_magnitude: frame longer than fft_size");
  std::vector<std::complex<double>> buf(fft_size);
  std::copy(frame.begin(), frame.end(), buf.begin());
  fft_inplace(buf);
  std::vector<double> mags(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(buf[k]);
  return mags;
}

std::vector<double> dft_magnitude_naive(std::span<const double> frame, std::size_t fft_size) {
  if (fft_size < 1) invalid("dft_magnitude_naive: fft_size must be >= 1");
  if (frame.size() > fft_size) invalid("dft_magnitude_naive: frame longer than fft_size");
  std::vector<double> mags(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      // Reduce k*n modulo N so the angle stays small and exact.
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * n) % fft_size) /
                           static_cast<double>(fft_size);
      re += frame[n] * std::cos(angle);
      im += frame[n] * std::sin(angle);
    }
    mags[k] = std::hypot(re, im);
  }
  return mags;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

// num_mel_filters + 2 edge frequencies: left edge, centres, right edge.
std::vector<double> mel_edges_hz(const FeatureConfig& config) {
  const double lo = hz_to_mel(config.fmin_hz);
  const double hi = hz_to_mel(config.fmax_hz);
  const std::size_t points = config.num_mel_filters + 2;
  std::vector<double> hz(points);
  for (std::size_t i = 0; i < points; ++i) {
    hz[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return hz;
}

}  // namespace

std::vector<double> mel_center_frequencies(const FeatureConfig& config) {
  config.validate();
  auto edges = mel_edges_hz(config);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(const FeatureConfig& config) {
  config.validate();
  const auto edges = mel_edges_hz(config);
  const std::size_t bins = config.fft_size / 2 + 1;

  // Snap edges to FFT bins; the centre bin carries weight exactly 1.
  std::vector<std::size_t> bin(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    bin[i] = static_cast<std::size_t>(
        std::floor(static_cast<double>(config.fft_size + 1) * edges[i] / config.pipeline_rate_hz));
    bin[i] = std::min(bin[i], bins - 1);
  }
  for (std::size_t i = 1; i < bin.size(); ++i) {
    if (bin[i] <= bin[i - 1]) {
      invalid("mel_filterbank: filters " + std::to_string(i - 1) + " and " + std::to_string(i) +
              " collapse onto one FFT bin; use fewer filters or a larger fft_size");
    }
  }

  Matrix bank(config.num_mel_filters, bins);
  for (std::size_t m = 0; m < config.num_mel_filters; ++m) {
    const std::size_t left = bin[m];
    const std::size_t centre = bin[m + 1];
    const std::size_t right = bin[m + 2];
    for (std::size_t k = left; k <= centre; ++k) {
      bank.at(m, k) = static_cast<double>(k - left) / static_cast<double>(centre - left);
    }
    for (std::size_t k = centre; k <= right; ++k) {
      bank.at(m, k) = static_cast<double>(right - k) / static_cast<double>(right - centre);
    }
  }
  return bank;
}

std::vector<double> dct_ii(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) invalid("dct_ii: empty input");
  std::vector<double> out(n);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += values[i] *
             std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) * static_cast<double>(k) / static_cast<double>(n));
    }
    out[k] = (k == 0 ? scale0 : scale) * acc;
  }
  return out;
}

FeatureMatrix mfcc(const audio::AudioClip& clip, const FeatureConfig& config) {
  config.validate();
  if (clip.sample_rate != config.pipeline_rate_hz) {
    invalid("mfcc: clip rate " + std::to_string(clip.sample_rate) + " Hz differs from pipeline rate " +
            std::to_string(config.pipeline_rate_hz) + " Hz; resample first");
  }
  const std::size_t frame_len = config.frame_len_samples();
  const auto frames = frame_signal(clip.samples, frame_len, config.hop_samples());
  const auto window = hamming(frame_len);
  const Matrix bank = mel_filterbank(config);

  FeatureMatrix out(frames.size(), config.num_columns());
  std::vector<double> windowed(frame_len);
  std::vector<double> log_mel(config.num_mel_filters);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& frame = frames[f];
    double energy = 0.0;
    for (std::size_t i = 0; i < frame_len; ++i) {
      windowed[i] = frame[i] * window[i];
      energy += frame[i] * frame[i];
    }
    const auto spectrum = dft_magnitude(windowed, config.fft_size);
    for (std::size_t m = 0; m < config.num_mel_filters; ++m) {
      double e = 0.0;
      const auto weights = bank.row(m);
      for (std::size_t k = 0; k < spectrum.size(); ++k) e += weights[k] * spectrum[k];
      log_mel[m] = std::log(std::max(e, kLogFloor));
    }
    const auto cepstra = dct_ii(log_mel);
    auto row = out.row(f);
    std::copy_n(cepstra.begin(), config.num_cepstra, row.begin());
    row[config.num_cepstra] = std::log(std::max(energy, kLogFloor));
  }
  return out;
}

FeatureVector pool(const FeatureMatrix& matrix) {
  if (matrix.rows == 0) invalid("pool: matrix has no rows");
  FeatureVector out(2 * matrix.cols, 0.0);
  const double n = static_cast<double>(matrix.rows);
  for (std::size_t c = 0; c < matrix.cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < matrix.rows; ++r) sum += matrix.at(r, c);
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t r = 0; r < matrix.rows; ++r) {
      const double d = matrix.at(r, c) - mean;
      sq += d * d;
    }
    out[c] = mean;
    out[matrix.cols + c] = std::sqrt(sq / n);
  }
  return out;
}

Lexicon::Lexicon(std::vector<Group> groups) : groups_(std::move(groups)) {
  for (auto& g : groups_) {
    for (auto& w : g.words) w = normalize_word(w);
  }
}

Lexicon Lexicon::parse(std::string_view text) {
  std::vector<Group> groups;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || trim(line.substr(0, colon)).empty()) {
      invalid("lexicon line " + std::to_string(line_no) + ": expected 'emotion: word, word, ...'");
    }
    Group g{std::string(trim(line.substr(0, colon))), {}};
    std::string_view rest = line.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto word = normalize_word(rest.substr(0, comma));
      if (!word.empty()) g.words.push_back(word);
      rest.remove_prefix(comma == std::string_view::npos ? rest.size() : comma + 1);
    }
    groups.push_back(std::move(g));
  }
  return Lexicon(std::move(groups));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon = parse(kBuiltinLexicon);
  return lexicon;
}

bool Lexicon::group_contains(std::size_t group, std::string_view normalized_word) const {
  const auto& words = groups_.at(group).words;
  return std::find(words.begin(), words.end(), normalized_word) != words.end();
}

std::string normalize_word(std::string_view word) {
  word = trim(word);
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front()))) word.remove_prefix(1);
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) word.remove_suffix(1);
  std::string out(word);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

FeatureVector text_features(std::span<const std::string> words, const Lexicon& lexicon) {
  FeatureVector out(lexicon.size(), 0.0);
  const double denom = static_cast<double>(std::max<std::size_t>(1, words.size()));
  for (const auto& raw : words) {
    const auto w = normalize_word(raw);
    for (std::size_t k = 0; k < lexicon.size(); ++k) {
      if (lexicon.group_contains(k, w)) out[k] += 1.0;
    }
  }
  for (auto& v : out) v /= denom;
  return out;
}

FeatureVector fuse(std::span<const double> audio_vec, std::span<const double> text_vec) {
  FeatureVector out;
  out.reserve(audio_vec.size() + text_vec.size());
  out.insert(out.end(), audio_vec.begin(), audio_vec.end());
  out.insert(out.end(), text_vec.begin(), text_vec.end());
  return out;
}

}  // namespace emolens::features
