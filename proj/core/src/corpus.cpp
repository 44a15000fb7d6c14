#include "emolens/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emolens/error.hpp"
#include "emolens/random.hpp"

namespace emolens::corpus {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto at = line.find(sep);
    fields.push_back(trim(line.substr(0, at)));
    if (at == std::string_view::npos) break;
    line.remove_prefix(at + 1);
  }
  return fields;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kMalformedRow, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string_view to_string(DatasetTag tag) noexcept {
  switch (tag) {
    case DatasetTag::kRavdess: return "ravdess";
    case DatasetTag::kTess: return "tess";
    case DatasetTag::kOther: return "other";
  }
  return "other";
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (lower(line) != kManifestHeader) {
        bad_row(line_no, "expected header \"" + std::string(kManifestHeader) + "\"");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line, ',');
    if (fields.size() != 4) {
      bad_row(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) bad_row(line_no, "empty filepath");
    const auto emotion = parse_emotion(fields[1]);
    if (!emotion) {
      throw Error(ErrorKind::kUnknownEmotion,
                  "line " + std::to_string(line_no) + ": unknown emotion '" + std::string(fields[1]) + "'");
    }
    ManifestEntry entry{std::string(fields[0]), *emotion, std::string(fields[2]), DatasetTag::kOther};
    const auto tag = lower(fields[3]);
    if (tag == "ravdess") {
      entry.dataset = DatasetTag::kRavdess;
    } else if (tag == "tess") {
      entry.dataset = DatasetTag::kTess;
    } else if (tag != "other") {
      bad_row(line_no, "dataset must be ravdess, tess or other; got '" + std::string(fields[3]) + "'");
    }
    entries.push_back(std::move(entry));
  }
  if (!header_seen) bad_row(1, "missing header");
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string format_manifest(std::span<const ManifestEntry> entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : entries) {
    out += e.filepath + ',' + std::string(to_string(e.emotion)) + ',' + e.actor_id + ',' +
           std::string(to_string(e.dataset)) + '\n';
  }
  return out;
}

void save_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest " + path.string());
  out << format_manifest(entries);
}

std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path, const ManifestEntry& entry) {
  std::filesystem::path p(entry.filepath);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

RavdessCode decode_ravdess_filename(std::string_view name) {
  const std::string original(name);
  if (const auto slash = name.find_last_of("/\\"); slash != std::string_view::npos) name.remove_prefix(slash + 1);
  auto bad = [&](const std::string& why) -> RavdessCode {
    throw Error(ErrorKind::kBadFilename, "'" + original + "': " + why);
  };
  if (name.size() < 4 || lower(name.substr(name.size() - 4)) != ".wav") return bad("missing .wav extension");
  name.remove_suffix(4);
  const auto fields = split_fields(name, '-');
  if (fields.size() != 7) return bad("expected 7 dash-separated fields");
  for (const auto f : fields) {
    if (f.size() != 2 || !std::isdigit(static_cast<unsigned char>(f[0])) ||
        !std::isdigit(static_cast<unsigned char>(f[1]))) {
      return bad("fields must be two digits");
    }
  }
  const int code = (fields[2][0] - '0') * 10 + (fields[2][1] - '0');
  if (code < 1 || code > 8) return bad("emotion code " + std::string(fields[2]) + " outside 01..08");
  return {kAllEmotions[static_cast<std::size_t>(code - 1)], std::string(fields[6])};
}

std::vector<ManifestEntry> scan_ravdess_directory(const std::filesystem::path& root) {
  std::vector<ManifestEntry> entries;
  for (const auto& item : std::filesystem::recursive_directory_iterator(root)) {
    if (!item.is_regular_file()) continue;
    const auto name = item.path().filename().string();
    try {
      const auto code = decode_ravdess_filename(name);
      entries.push_back({std::filesystem::relative(item.path(), root).generic_string(), code.emotion,
                         code.actor_id, DatasetTag::kRavdess});
    } catch (const Error&) {
      // not a RAVDESS clip
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.filepath < b.filepath; });
  return entries;
}

Emotion harmonize_tess(std::string_view raw_label) {
  // Label names, plus the short tokens TESS uses in its file names.
  static constexpr std::array<std::pair<std::string_view, Emotion>, 13> kMap = {{
      {"anger", Emotion::kAngry},
      {"angry", Emotion::kAngry},
      {"disgust", Emotion::kDisgust},
      {"fear", Emotion::kFearful},
      {"happiness", Emotion::kHappy},
      {"happy", Emotion::kHappy},
      {"pleasant surprise", Emotion::kSurprised},
      {"pleasant_surprise", Emotion::kSurprised},
      {"pleasant_surprised", Emotion::kSurprised},
      {"ps", Emotion::kSurprised},
      {"sadness", Emotion::kSad},
      {"sad", Emotion::kSad},
      {"neutral", Emotion::kNeutral},
  }};
  const auto key = lower(trim(raw_label));
  for (const auto& [name, emotion] : kMap) {
    if (key == name) return emotion;
  }
  throw Error(ErrorKind::kUnknownEmotion, "'" + std::string(raw_label) + "' is not a TESS emotion label");
}

Split stratified_split(std::span<const ManifestEntry> entries, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "stratified_split: train_fraction must lie in (0, 1)");
  }
  if (entries.empty()) throw Error(ErrorKind::kEmptyCorpus, "stratified_split: no entries");

  std::array<std::vector<std::size_t>, kNumEmotions> by_emotion;
  for (std::size_t i = 0; i < entries.size(); ++i) by_emotion[index_of(entries[i].emotion)].push_back(i);

  // The epsilon keeps exact products such as 0.7 * 180 from flooring to 125.
  constexpr double kEps = 1e-9;
  std::array<std::size_t, kNumEmotions> take{};
  std::array<double, kNumEmotions> remainder{};
  std::size_t assigned = 0;
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    const double exact = train_fraction * static_cast<double>(by_emotion[e].size());
    take[e] = static_cast<std::size_t>(std::floor(exact + kEps));
    remainder[e] = std::max(0.0, exact - static_cast<double>(take[e]));
    assigned += take[e];
  }
  const auto target = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(entries.size()) + 0.5 + kEps));
  std::array<std::size_t, kNumEmotions> order{};
  for (std::size_t e = 0; e < kNumEmotions; ++e) order[e] = e;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t e : order) {
    if (assigned >= target) break;
    if (take[e] < by_emotion[e].size() && remainder[e] > 0.0) {
      ++take[e];
      ++assigned;
    }
  }

  Rng rng(seed);
  Split split;
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    auto& idx = by_emotion[e];
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < take[e] ? split.train : split.test).push_back(entries[idx[i]]);
    }
  }
  return split;
}

}  // namespace emolens::corpus
