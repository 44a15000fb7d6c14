#include <cmath>
#include <numbers>

#include "doctest.h"
#include "emolens/error.hpp"
#include "emolens/features.hpp"
#include "emolens/fixtures.hpp"
#include "emolens/random.hpp"
#include "support/reference_mfcc.hpp"

using namespace emolens;
using namespace emolens::features;

TEST_CASE("frame_signal counts and padding") {
  const std::vector<double> ten = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto frames = frame_signal(ten, 4, 2);
  REQUIRE(frames.size() == 4);
  CHECK(frames[0][0] == 0);
  CHECK(frames[1][0] == 2);
  CHECK(frames[2][0] == 4);
  CHECK(frames[3][0] == 6);

  const std::vector<double> three = {1, 2, 3};
  const auto short_frames = frame_signal(three, 4, 2);
  REQUIRE(short_frames.size() == 1);
  CHECK(short_frames[0] == std::vector<double>{1, 2, 3, 0});

  const std::vector<double> four = {1, 2, 3, 4};
  CHECK(frame_signal(four, 4, 1).size() == 1);
}

TEST_CASE("hamming window") {
  const auto w4 = hamming(4);
  CHECK(w4[0] == doctest::Approx(0.08));
  CHECK(w4[1] == doctest::Approx(0.77));
  CHECK(w4[2] == doctest::Approx(0.77));
  CHECK(w4[3] == doctest::Approx(0.08));
  const auto w9 = hamming(9);
  CHECK(w9[4] == doctest::Approx(1.0));
  CHECK(w9[8] == doctest::Approx(0.08));
  CHECK_THROWS_AS(hamming(1), Error);
}

TEST_CASE("dft magnitude") {
  SUBCASE("impulse is flat") {
    std::vector<double> impulse(16, 0.0);
    impulse[0] = 1.0;
    for (double m : dft_magnitude(impulse, 16)) CHECK(m == doctest::Approx(1.0));
  }
  SUBCASE("cosine lands on its bin") {
    std::vector<double> x(16);
    for (std::size_t k = 0; k < 16; ++k) x[k] = std::cos(2.0 * std::numbers::pi * 3.0 * k / 16.0);
    const auto m = dft_magnitude(x, 16);
    for (std::size_t k = 0; k < m.size(); ++k) CHECK(m[k] == doctest::Approx(k == 3 ? 8.0 : 0.0));
  }
  SUBCASE("fast equals naive on random input") {
    Rng rng(5);
    std::vector<double> x(64);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const auto fast = dft_magnitude(x, 64);
    const auto slow = dft_magnitude_naive(x, 64);
    for (std::size_t k = 0; k < fast.size(); ++k) CHECK(std::abs(fast[k] - slow[k]) <= 1e-9);
  }
  SUBCASE("non power of two rejected on the fast path") {
    const std::vector<double> x(12, 1.0);
    try {
      dft_magnitude(x, 12);
      FAIL("expected NotPowerOfTwo");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNotPowerOfTwo);
    }
    CHECK(dft_magnitude_naive(x, 12).size() == 7);
  }
}

TEST_CASE("mel scale and filterbank") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(mel_to_hz(hz_to_mel(1234.5)) == doctest::Approx(1234.5));
  const FeatureConfig cfg;
  const auto centres = mel_center_frequencies(cfg);
  REQUIRE(centres.size() == cfg.num_mel_filters);
  for (std::size_t i = 1; i < centres.size(); ++i) CHECK(centres[i] > centres[i - 1]);

  const auto bank = mel_filterbank(cfg);
  REQUIRE(bank.rows == cfg.num_mel_filters);
  REQUIRE(bank.cols == cfg.fft_size / 2 + 1);
  for (std::size_t m = 0; m < bank.rows; ++m) {
    double peak = 0.0;
    double area = 0.0;
    for (double w : bank.row(m)) {
      CHECK(w >= 0.0);
      peak = std::max(peak, w);
      area += w;
    }
    CHECK(peak == 1.0);
    // The bank applied to an all-ones spectrum yields each row's area.
    const std::vector<double> ones(bank.cols, 1.0);
    double applied = 0.0;
    for (std::size_t k = 0; k < bank.cols; ++k) applied += bank.at(m, k) * ones[k];
    CHECK(applied == doctest::Approx(area));
  }

  FeatureConfig crowded;
  crowded.num_mel_filters = 200;
  crowded.num_cepstra = 13;
  CHECK_THROWS_AS(mel_filterbank(crowded), Error);
}

TEST_CASE("config validation") {
  FeatureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.fft_size = 256;  // shorter than a 400-sample frame
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.fmax_hz = 9000.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.num_cepstra = 30;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("dct_ii") {
  SUBCASE("constant input") {
    const std::vector<double> c(6, 2.0);
    const auto out = dct_ii(c);
    CHECK(out[0] == doctest::Approx(2.0 * std::sqrt(6.0)));
    for (std::size_t k = 1; k < out.size(); ++k) CHECK(std::abs(out[k]) < 1e-12);
  }
  SUBCASE("inverse and energy") {
    Rng rng(9);
    std::vector<double> x(26);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    const auto c = dct_ii(x);
    // Orthonormal DCT-III as the inverse.
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double acc = c[0] / std::sqrt(n);
      for (std::size_t k = 1; k < c.size(); ++k) {
        acc += std::sqrt(2.0 / n) * c[k] * std::cos(std::numbers::pi * (i + 0.5) * k / n);
      }
      CHECK(std::abs(acc - x[i]) <= 1e-9);
    }
    double ex = 0.0;
    double ec = 0.0;
    for (double v : x) ex += v * v;
    for (double v : c) ec += v * v;
    CHECK(std::abs(ex - ec) / ex <= 1e-9);
  }
  CHECK_THROWS_AS(dct_ii(std::vector<double>{}), Error);
}

TEST_CASE("mfcc") {
  const FeatureConfig cfg;
  SUBCASE("silence") {
    const audio::AudioClip clip{std::vector<double>(16000, 0.0), 16000};
    const auto m = mfcc(clip, cfg);
    CHECK(m.rows == frame_count(16000, 400, 160));
    CHECK(m.cols == 14);
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < 13; ++c) CHECK(m.at(r, c) == m.at(0, c));
      CHECK(m.at(r, 13) == doctest::Approx(std::log(1e-10)));
    }
  }
  SUBCASE("matches the straight-line reference") {
    Rng rng(21);
    const auto clip = fixtures::synth_tone(Emotion::kFearful, 0.3, 16000, rng);
    const auto fast = mfcc(clip, cfg);
    const auto ref = emolens::testing::reference_mfcc(clip, cfg);
    REQUIRE(fast.rows == ref.size());
    double worst = 0.0;
    for (std::size_t r = 0; r < fast.rows; ++r) {
      for (std::size_t c = 0; c < fast.cols; ++c) worst = std::max(worst, std::abs(fast.at(r, c) - ref[r][c]));
    }
    CHECK(worst <= 1e-6);
  }
  SUBCASE("deterministic") {
    Rng rng(2);
    const auto clip = fixtures::synth_tone(Emotion::kSad, 0.5, 16000, rng);
    CHECK(mfcc(clip, cfg) == mfcc(clip, cfg));
  }
  SUBCASE("wrong rate rejected") {
    CHECK_THROWS_AS(mfcc({std::vector<double>(800, 0.0), 8000}, cfg), Error);
  }
}

TEST_CASE("pool") {
  Matrix one(1, 3);
  one.data = {1.0, -2.0, 3.0};
  CHECK(pool(one) == FeatureVector{1.0, -2.0, 3.0, 0.0, 0.0, 0.0});

  Matrix pair(2, 2);
  pair.data = {1.5, -4.0, -1.5, 4.0};
  CHECK(pool(pair) == FeatureVector{0.0, 0.0, 1.5, 4.0});

  Rng rng(4);
  Matrix m(10, 14);
  for (double& v : m.data) v = rng.uniform(-5.0, 5.0);
  const auto p = pool(m);
  REQUIRE(p.size() == 28);
  for (std::size_t c = 0; c < 14; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < 10; ++r) sum += m.at(r, c);
    const double mean = sum / 10.0;
    double sq = 0.0;
    for (std::size_t r = 0; r < 10; ++r) sq += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    CHECK(std::abs(p[c] - mean) <= 1e-9);
    CHECK(std::abs(p[14 + c] - std::sqrt(sq / 10.0)) <= 1e-9);
  }
}

TEST_CASE("lexicon and text features") {
  const auto& lex = Lexicon::builtin();
  REQUIRE(lex.size() == 8);
  CHECK(lex.groups()[2].name == "happy");

  CHECK(text_features(std::vector<std::string>{}, lex) == FeatureVector(8, 0.0));

  const std::vector<std::string> all_happy = {"Happy", "glad!", "joy"};
  const auto f = text_features(all_happy, lex);
  for (std::size_t k = 0; k < 8; ++k) CHECK(f[k] == (k == 2 ? 1.0 : 0.0));

  const std::vector<std::string> mixed = {"the", "day", "was", "great", "and", "i", "felt", "glad", "about", "it"};
  CHECK(text_features(mixed, lex)[2] == doctest::Approx(0.2));

  CHECK(normalize_word("\"Wow!\"") == "wow");

  const auto parsed = Lexicon::parse("# comment\nhappy: Sunny, bright\n\nsad: grey\n");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed.groups()[0].words == std::vector<std::string>{"sunny", "bright"});
  CHECK(parsed.group_contains(1, "grey"));
  CHECK_THROWS_AS(Lexicon::parse("no colon here\n"), Error);
}

TEST_CASE("fuse") {
  const std::vector<double> a(28, 1.0);
  const std::vector<double> t(8, 2.0);
  const auto f = fuse(a, t);
  REQUIRE(f.size() == 36);
  CHECK(std::equal(a.begin(), a.end(), f.begin()));
  CHECK(fuse(a, std::vector<double>{}) == a);
}
