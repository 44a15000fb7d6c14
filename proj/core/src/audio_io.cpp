#include "emolens/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>

#include "emolens/error.hpp"

namespace emolens::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;

struct FmtChunk {
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits_per_sample = 0;
};

std::uint16_t load_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t load_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
  return std::equal(tag.begin(), tag.end(), b.begin() + static_cast<std::ptrdiff_t>(at),
                    [](char c, std::uint8_t u) { return static_cast<std::uint8_t>(c) == u; });
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::kMalformedContainer, what); }
[[noreturn]] void unsupported(const std::string& what) { throw Error(ErrorKind::kUnsupportedFormat, what); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  for (char c : tag) out.push_back(static_cast<std::uint8_t>(c));
}

}  // namespace

AudioClip parse_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) malformed("RIFF header: file shorter than 12 bytes");
  if (!tag_is(bytes, 0, "RIFF")) malformed("RIFF header: magic is not 'RIFF'");
  if (!tag_is(bytes, 8, "WAVE")) malformed("RIFF header: form type is not 'WAVE'");

  std::optional<FmtChunk> fmt;
  std::optional<std::span<const std::uint8_t>> data;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = load_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    const std::string id(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + 4));
    if (size > bytes.size() - body) malformed("chunk '" + id + "': size runs past end of file");

    if (id == "fmt ") {
      if (size < 16) malformed("fmt chunk: size " + std::to_string(size) + " < 16");
      fmt = FmtChunk{load_u16(bytes, body), load_u16(bytes, body + 2), load_u32(bytes, body + 4),
                     load_u16(bytes, body + 12), load_u16(bytes, body + 14)};
    } else if (id == "data") {
      data = bytes.subspan(body, size);
    }
    // RIFF chunks are word aligned: odd sizes carry one padding byte.
    pos = body + size + (size & 1U);
  }

  if (!fmt) malformed("missing 'fmt ' chunk");
  if (!data) malformed("missing 'data' chunk");
  if (fmt->format_tag != kFormatPcm) {
    unsupported("format_tag " + std::to_string(fmt->format_tag) + " (only PCM = 1)");
  }
  if (fmt->bits_per_sample != 16) {
    unsupported("bits_per_sample " + std::to_string(fmt->bits_per_sample) + " (only 16)");
  }
  if (fmt->channels < 1 || fmt->channels > 2) {
    unsupported("channels " + std::to_string(fmt->channels) + " (only 1 or 2)");
  }
  if (fmt->sample_rate == 0 || fmt->sample_rate > 1'000'000) {
    unsupported("sample_rate " + std::to_string(fmt->sample_rate));
  }

  const std::size_t frame_bytes = 2U * fmt->channels;
  const std::size_t frames = data->size() / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt->sample_rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt->channels; ++c) {
      const auto raw = static_cast<std::int16_t>(load_u16(*data, i * frame_bytes + 2 * c));
      acc += raw / 32768.0;
    }
    clip.samples[i] = acc / fmt->channels;
  }
  return clip;
}

std::vector<std::uint8_t> write_wav(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw Error(ErrorKind::kInvalidArgument, "write_wav: sample_rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : clip.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw Error(ErrorKind::kInvalidArgument, "resample: target_rate must be positive");
  if (clip.sample_rate <= 0) throw Error(ErrorKind::kInvalidArgument, "resample: source sample_rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  const std::size_t n = clip.samples.size();
  const double ratio = static_cast<double>(clip.sample_rate) / target_rate;
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(n) * target_rate / clip.sample_rate));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  if (n == 0) return out;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto left = static_cast<std::size_t>(pos);
    if (left + 1 >= n) {
      out.samples[i] = clip.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(left);
    out.samples[i] = clip.samples[left] + frac * (clip.samples[left + 1] - clip.samples[left]);
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace emolens::audio
