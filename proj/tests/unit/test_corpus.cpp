#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "emolens/corpus.hpp"
#include "emolens/error.hpp"
#include "support/test_support.hpp"

using namespace emolens;
using namespace emolens::corpus;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInvalidArgument;
}

std::vector<ManifestEntry> balanced(std::size_t per_emotion) {
  std::vector<ManifestEntry> out;
  for (Emotion e : kAllEmotions) {
    for (std::size_t i = 0; i < per_emotion; ++i) {
      out.push_back({std::string(to_string(e)) + "_" + std::to_string(i) + ".wav", e, "01", DatasetTag::kOther});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("parse_manifest") {
  const auto rows = parse_manifest("filepath,emotion,actor_id,dataset\na.wav,happy,01,ravdess\nb.wav,SAD,02,tess\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == ManifestEntry{"a.wav", Emotion::kHappy, "01", DatasetTag::kRavdess});
  CHECK(rows[1].emotion == Emotion::kSad);
  CHECK(rows[1].dataset == DatasetTag::kTess);

  CHECK(kind_of([] { parse_manifest("filepath,emotion,actor_id,dataset\na.wav,joyful,01,ravdess\n"); }) ==
        ErrorKind::kUnknownEmotion);
  CHECK(kind_of([] { parse_manifest("filepath,emotion,actor_id,dataset\na.wav,happy,01\n"); }) ==
        ErrorKind::kMalformedRow);
  CHECK(kind_of([] { parse_manifest("filepath,emotion,actor_id,dataset\n,happy,01,other\n"); }) ==
        ErrorKind::kMalformedRow);
  CHECK(kind_of([] { parse_manifest("path,label\na.wav,happy\n"); }) == ErrorKind::kMalformedRow);

  try {
    parse_manifest("filepath,emotion,actor_id,dataset\na.wav,happy,01,other\nb.wav,bored,01,other\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("manifest round trip and count preservation") {
  const auto entries = balanced(180);
  REQUIRE(entries.size() == 1440);
  const auto dir = emolens::testing::scratch_dir("corpus_manifest");
  save_manifest(entries, dir / "m.csv");
  const auto back = load_manifest(dir / "m.csv");
  CHECK(back.size() == 1440);
  CHECK(back == entries);
  CHECK(format_manifest(entries).rfind(std::string(kManifestHeader) + "\n", 0) == 0);
  CHECK(resolve_entry_path(dir / "m.csv", entries[0]) == dir / entries[0].filepath);
  ManifestEntry absolute{"/data/x.wav", Emotion::kSad, "1", DatasetTag::kOther};
  CHECK(resolve_entry_path(dir / "m.csv", absolute) == std::filesystem::path("/data/x.wav"));
  CHECK(kind_of([&] { load_manifest(dir / "missing.csv"); }) == ErrorKind::kIo);
}

TEST_CASE("RAVDESS filenames") {
  const auto angry = decode_ravdess_filename("03-01-05-01-01-01-12.wav");
  CHECK(angry.emotion == Emotion::kAngry);
  CHECK(angry.actor_id == "12");
  const auto neutral = decode_ravdess_filename("03-01-01-01-01-01-01.wav");
  CHECK(neutral.emotion == Emotion::kNeutral);
  CHECK(neutral.actor_id == "01");
  CHECK(decode_ravdess_filename("03-01-08-02-02-02-24.wav").emotion == Emotion::kSurprised);
  CHECK(kind_of([] { decode_ravdess_filename("not-a-ravdess-name.wav"); }) == ErrorKind::kBadFilename);
  CHECK(kind_of([] { decode_ravdess_filename("03-01-09-01-01-01-12.wav"); }) == ErrorKind::kBadFilename);

  const auto dir = emolens::testing::scratch_dir("corpus_ravdess");
  std::filesystem::create_directories(dir / "Actor_02");
  std::ofstream(dir / "Actor_02" / "03-01-04-01-01-01-02.wav") << "x";
  std::ofstream(dir / "Actor_02" / "readme.txt") << "x";
  const auto scanned = scan_ravdess_directory(dir);
  REQUIRE(scanned.size() == 1);
  CHECK(scanned[0].emotion == Emotion::kSad);
  CHECK(scanned[0].dataset == DatasetTag::kRavdess);
}

TEST_CASE("TESS labels") {
  CHECK(harmonize_tess("pleasant surprise") == Emotion::kSurprised);
  CHECK(harmonize_tess("neutral") == Emotion::kNeutral);
  CHECK(harmonize_tess("anger") == Emotion::kAngry);
  CHECK(harmonize_tess("happiness") == Emotion::kHappy);
  CHECK(harmonize_tess("fear") == Emotion::kFearful);
  CHECK(harmonize_tess("sadness") == Emotion::kSad);
  CHECK(harmonize_tess("disgust") == Emotion::kDisgust);
  CHECK(kind_of([] { harmonize_tess("calm"); }) == ErrorKind::kUnknownEmotion);
  for (const char* raw : {"anger", "disgust", "fear", "happiness", "pleasant surprise", "sadness", "neutral"}) {
    CHECK(harmonize_tess(raw) != Emotion::kCalm);
  }
}

TEST_CASE("stratified split") {
  SUBCASE("1440 balanced entries") {
    const auto split = stratified_split(balanced(180), 0.7, 42);
    CHECK(split.train.size() == 1008);
    CHECK(split.test.size() == 432);
    for (Emotion e : kAllEmotions) {
      const auto in_train = std::count_if(split.train.begin(), split.train.end(), [&](auto& x) { return x.emotion == e; });
      const auto in_test = std::count_if(split.test.begin(), split.test.end(), [&](auto& x) { return x.emotion == e; });
      CHECK(in_train == 126);
      CHECK(in_test == 54);
    }
  }
  SUBCASE("single emotion of ten") {
    std::vector<ManifestEntry> ten;
    for (int i = 0; i < 10; ++i) ten.push_back({std::to_string(i) + ".wav", Emotion::kSad, "1", DatasetTag::kOther});
    const auto split = stratified_split(ten, 0.7, 1);
    CHECK(split.train.size() == 7);
    CHECK(split.test.size() == 3);
  }
  SUBCASE("partition, determinism, seed independence of counts") {
    std::vector<ManifestEntry> uneven;
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
      for (std::size_t i = 0; i < 3 + 2 * k; ++i) {
        uneven.push_back({std::to_string(k) + "_" + std::to_string(i), kAllEmotions[k], "1", DatasetTag::kOther});
      }
    }
    const std::size_t total = uneven.size();
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
      const auto split = stratified_split(uneven, 0.7, seed);
      CHECK(split.train.size() == static_cast<std::size_t>(std::llround(0.7 * total)));
      std::multiset<std::string> all;
      for (const auto& e : split.train) all.insert(e.filepath);
      for (const auto& e : split.test) all.insert(e.filepath);
      CHECK(all.size() == total);
      CHECK(std::set<std::string>(all.begin(), all.end()).size() == total);
      for (std::size_t k = 0; k < kNumEmotions; ++k) {
        const double n = static_cast<double>(3 + 2 * k);
        const auto got = std::count_if(split.train.begin(), split.train.end(),
                                       [&](auto& x) { return x.emotion == kAllEmotions[k]; });
        CHECK(std::abs(static_cast<double>(got) - 0.7 * n) < 1.0);
      }
      const auto again = stratified_split(uneven, 0.7, seed);
      CHECK(again.train == split.train);
      CHECK(again.test == split.test);
    }
    const auto a = stratified_split(uneven, 0.7, 1);
    const auto b = stratified_split(uneven, 0.7, 2);
    CHECK(a.train != b.train);
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { stratified_split(std::vector<ManifestEntry>{}, 0.7, 1); }) == ErrorKind::kEmptyCorpus);
    CHECK(kind_of([] { stratified_split(balanced(2), 1.0, 1); }) == ErrorKind::kInvalidArgument);
    CHECK(kind_of([] { stratified_split(balanced(2), 0.0, 1); }) == ErrorKind::kInvalidArgument);
  }
}
