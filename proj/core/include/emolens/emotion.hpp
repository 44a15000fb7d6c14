#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace emolens {

// Canonical label order. Model outputs, colour palette, reports and summary
// counts are all indexed by this order.
enum class Emotion : std::uint8_t {
  kNeutral = 0,
  kCalm,
  kHappy,
  kSad,
  kAngry,
  kFearful,
  kDisgust,
  kSurprised,
};

inline constexpr std::size_t kNumEmotions = 8;

inline constexpr std::array<Emotion, kNumEmotions> kAllEmotions = {
    Emotion::kNeutral, Emotion::kCalm,    Emotion::kHappy,   Emotion::kSad,
    Emotion::kAngry,   Emotion::kFearful, Emotion::kDisgust, Emotion::kSurprised};

constexpr std::size_t index_of(Emotion e) noexcept { return static_cast<std::size_t>(e); }

// Lowercase canonical name, e.g. "fearful".
std::string_view to_string(Emotion e) noexcept;

// Capitalised name used in report tables, e.g. "Fearful".
std::string_view display_name(Emotion e) noexcept;

// Case-insensitive match against the canonical names (surrounding blanks ignored).
std::optional<Emotion> parse_emotion(std::string_view name) noexcept;

// Same as parse_emotion but throws Error(kUnknownEmotion).
Emotion emotion_from_string(std::string_view name);

std::optional<Emotion> emotion_from_index(std::size_t index) noexcept;

// "#RRGGBB" colour for the dashboard. Single source of truth for the palette.
std::string_view palette_color(Emotion e) noexcept;

// Bitmask set of emotions; bit i corresponds to canonical index i.
class EmotionSet {
 public:
  constexpr EmotionSet() = default;

  static constexpr EmotionSet all() noexcept { return EmotionSet(0xFF); }

  constexpr bool contains(Emotion e) const noexcept { return (bits_ >> index_of(e)) & 1U; }
  constexpr void insert(Emotion e) noexcept { bits_ |= static_cast<std::uint8_t>(1U << index_of(e)); }
  constexpr void erase(Emotion e) noexcept { bits_ &= static_cast<std::uint8_t>(~(1U << index_of(e))); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  std::size_t size() const noexcept;

  friend constexpr bool operator==(EmotionSet, EmotionSet) = default;

 private:
  constexpr explicit EmotionSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

}  // namespace emolens
