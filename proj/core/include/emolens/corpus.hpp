#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emolens/emotion.hpp"

namespace emolens::corpus {

enum class DatasetTag : std::uint8_t { kRavdess, kTess, kOther };

std::string_view to_string(DatasetTag tag) noexcept;

struct ManifestEntry {
  std::string filepath;
  Emotion emotion = Emotion::kNeutral;
  std::string actor_id;
  DatasetTag dataset = DatasetTag::kOther;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline constexpr std::string_view kManifestHeader = "filepath,emotion,actor_id,dataset";

// CSV with header "filepath,emotion,actor_id,dataset". Emotions match the
// canonical names case-insensitively. Throws Error(kUnknownEmotion) or
// Error(kMalformedRow); messages carry the 1-based line number.
std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

std::string format_manifest(std::span<const ManifestEntry> entries);
void save_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path);

// Relative entry paths are taken relative to the manifest's directory.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path, const ManifestEntry& entry);

struct RavdessCode {
  Emotion emotion;
  std::string actor_id;
};

// "MM-VV-EE-II-SS-RR-AA.wav": EE (01..08) is the emotion in canonical order,
// AA the actor. Throws Error(kBadFilename).
RavdessCode decode_ravdess_filename(std::string_view name);

// Builds manifest entries for every RAVDESS-named .wav below `root`, sorted by path.
std::vector<ManifestEntry> scan_ravdess_directory(const std::filesystem::path& root);

// Maps TESS's seven labels onto the canonical set. Calm is unreachable.
// Throws Error(kUnknownEmotion).
Emotion harmonize_tess(std::string_view raw_label);

struct Split {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> test;
};

// Per-emotion seeded shuffle, floor(fraction * count) of each emotion to
// train, then the remaining round(fraction * total) - sum(floor) slots go to
// the emotions with the largest fractional parts (lower index on ties).
// Throws Error(kEmptyCorpus) and Error(kInvalidArgument).
Split stratified_split(std::span<const ManifestEntry> entries, double train_fraction, std::uint64_t seed);

}  // namespace emolens::corpus
