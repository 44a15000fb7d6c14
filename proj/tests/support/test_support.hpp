#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emolens::testing {

// Fresh, empty directory under the build tree.
inline std::filesystem::path scratch_dir(std::string_view name) {
  const auto dir = std::filesystem::path(EMOLENS_TEST_TMP) / std::string(name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) { out.insert(out.end(), tag.begin(), tag.end()); }

struct WavSpec {
  std::uint16_t format = 1;
  std::uint16_t channels = 1;
  std::uint32_t rate = 16000;
  std::uint16_t bits = 16;
  bool extra_chunk_first = false;  // a LIST chunk ahead of fmt
  bool data_before_fmt = false;
};

// Hand-assembled RIFF/WAVE with interleaved 16-bit samples.
inline std::vector<std::uint8_t> make_wav(const std::vector<std::int16_t>& interleaved, const WavSpec& spec = {}) {
  std::vector<std::uint8_t> fmt;
  put_tag(fmt, "fmt ");
  put_u32(fmt, 16);
  put_u16(fmt, spec.format);
  put_u16(fmt, spec.channels);
  put_u32(fmt, spec.rate);
  put_u32(fmt, spec.rate * spec.channels * (spec.bits / 8));
  put_u16(fmt, static_cast<std::uint16_t>(spec.channels * (spec.bits / 8)));
  put_u16(fmt, spec.bits);

  std::vector<std::uint8_t> data;
  put_tag(data, "data");
  put_u32(data, static_cast<std::uint32_t>(interleaved.size() * 2));
  for (auto s : interleaved) put_u16(data, static_cast<std::uint16_t>(s));

  std::vector<std::uint8_t> extra;
  put_tag(extra, "LIST");
  put_u32(extra, 3);
  put_tag(extra, "abc");
  extra.push_back(0);  // pad byte

  std::vector<std::uint8_t> body;
  put_tag(body, "WAVE");
  if (spec.extra_chunk_first) body.insert(body.end(), extra.begin(), extra.end());
  if (spec.data_before_fmt) {
    body.insert(body.end(), data.begin(), data.end());
    body.insert(body.end(), fmt.begin(), fmt.end());
  } else {
    body.insert(body.end(), fmt.begin(), fmt.end());
    body.insert(body.end(), data.begin(), data.end());
  }

  std::vector<std::uint8_t> out;
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace emolens::testing
