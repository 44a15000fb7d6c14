#pragma once

// Straight-line MFCC used as a test oracle. Deliberately shares no code with
// the library: quadratic DFT, explicit filter loops, textbook DCT-II.

#include <algorithm>
#include <cmath>
#include <vector>

#include "emolens/audio_io.hpp"
#include "emolens/features.hpp"

namespace emolens::testing {

inline std::vector<std::vector<double>> reference_mfcc(const audio::AudioClip& clip,
                                                       const features::FeatureConfig& cfg) {
  const double pi = 3.14159265358979323846;
  const auto frame_len = static_cast<std::size_t>(std::llround(cfg.frame_len_ms * cfg.pipeline_rate_hz / 1000.0));
  const auto hop = static_cast<std::size_t>(std::llround(cfg.hop_ms * cfg.pipeline_rate_hz / 1000.0));
  const std::size_t n_fft = cfg.fft_size;
  const std::size_t n_bins = n_fft / 2 + 1;
  const std::size_t n_mel = cfg.num_mel_filters;

  // Mel edges snapped to FFT bins.
  const double mel_lo = 2595.0 * std::log10(1.0 + cfg.fmin_hz / 700.0);
  const double mel_hi = 2595.0 * std::log10(1.0 + cfg.fmax_hz / 700.0);
  std::vector<std::size_t> edge(n_mel + 2);
  for (std::size_t i = 0; i < n_mel + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mel + 1);
    const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    edge[i] = std::min(n_bins - 1, static_cast<std::size_t>(std::floor((n_fft + 1) * hz / cfg.pipeline_rate_hz)));
  }

  const std::size_t n = clip.samples.size();
  const std::size_t frames = n < frame_len ? 1 : (n - frame_len) / hop + 1;
  std::vector<std::vector<double>> out;
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<double> x(frame_len, 0.0);
    for (std::size_t i = 0; i < frame_len && f * hop + i < n; ++i) x[i] = clip.samples[f * hop + i];

    double energy = 0.0;
    for (double v : x) energy += v * v;

    std::vector<double> mag(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t i = 0; i < frame_len; ++i) {
        const double w = 0.54 - 0.46 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(frame_len - 1));
        const double angle = 2.0 * pi * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(n_fft);
        re += x[i] * w * std::cos(angle);
        im -= x[i] * w * std::sin(angle);
      }
      mag[k] = std::sqrt(re * re + im * im);
    }

    std::vector<double> log_mel(n_mel);
    for (std::size_t m = 0; m < n_mel; ++m) {
      double acc = 0.0;
      for (std::size_t k = edge[m]; k <= edge[m + 2]; ++k) {
        double weight = 0.0;
        if (k <= edge[m + 1]) {
          weight = static_cast<double>(k - edge[m]) / static_cast<double>(edge[m + 1] - edge[m]);
        } else {
          weight = static_cast<double>(edge[m + 2] - k) / static_cast<double>(edge[m + 2] - edge[m + 1]);
        }
        acc += weight * mag[k];
      }
      log_mel[m] = std::log(acc > 1e-10 ? acc : 1e-10);
    }

    std::vector<double> row;
    for (std::size_t c = 0; c < cfg.num_cepstra; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n_mel; ++m) {
        acc += log_mel[m] * std::cos(pi * static_cast<double>(c) * (2.0 * static_cast<double>(m) + 1.0) /
                                     (2.0 * static_cast<double>(n_mel)));
      }
      const double norm = c == 0 ? std::sqrt(1.0 / static_cast<double>(n_mel)) : std::sqrt(2.0 / static_cast<double>(n_mel));
      row.push_back(norm * acc);
    }
    row.push_back(std::log(energy > 1e-10 ? energy : 1e-10));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace emolens::testing
