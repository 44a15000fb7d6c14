#include "emolens/emotion.hpp"

#include <bit>
#include <cctype>
#include <string>

#include "emolens/error.hpp"

namespace emolens {

namespace {

constexpr std::array<std::string_view, kNumEmotions> kNames = {
    "neutral", "calm", "happy", "sad", "angry", "fearful", "disgust", "surprised"};

constexpr std::array<std::string_view, kNumEmotions> kDisplayNames = {
    "Neutral", "Calm", "Happy", "Sad", "Angry", "Fearful", "Disgust", "Surprised"};

constexpr std::array<std::string_view, kNumEmotions> kPalette = {
    "#9E9E9E", "#4DB6AC", "#FFD54F", "#5C6BC0", "#E53935", "#8E24AA", "#7CB342", "#FB8C00"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(Emotion e) noexcept { return kNames[index_of(e)]; }

std::string_view display_name(Emotion e) noexcept { return kDisplayNames[index_of(e)]; }

std::optional<Emotion> parse_emotion(std::string_view name) noexcept {
  name = trim(name);
  for (Emotion e : kAllEmotions) {
    if (iequals(name, kNames[index_of(e)])) return e;
  }
  return std::nullopt;
}

Emotion emotion_from_string(std::string_view name) {
  if (auto e = parse_emotion(name)) return *e;
  throw Error(ErrorKind::kUnknownEmotion, "unknown emotion '" + std::string(name) + "'");
}

std::optional<Emotion> emotion_from_index(std::size_t index) noexcept {
  if (index >= kNumEmotions) return std::nullopt;
  return kAllEmotions[index];
}

std::string_view palette_color(Emotion e) noexcept { return kPalette[index_of(e)]; }

std::size_t EmotionSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

}  // namespace emolens
