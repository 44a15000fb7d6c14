#include <cctype>

#include "emolens/error.hpp"
#include "emolens/pipeline.hpp"
#include "json.hpp"

namespace emolens::pipeline {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad_analysis(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, "analysis JSON: " + what);
}

json emotion_list(EmotionSet set) {
  json out = json::array();
  for (Emotion e : kAllEmotions) {
    if (set.contains(e)) out.push_back(to_string(e));
  }
  return out;
}

Emotion emotion_field(const json& j) {
  if (!j.is_string()) bad_analysis("emotion must be a string");
  return emotion_from_string(j.get<std::string>());
}

}  // namespace

std::string to_json(const SessionAnalysis& a) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["duration_s"] = a.duration_s;
  j["window_s"] = a.window_s;
  j["hop_s"] = a.hop_s;
  j["labels"] = emotion_list(EmotionSet::all());
  j["filter"] = emotion_list(a.filter);

  json segments = json::array();
  for (const auto& s : a.segments) {
    json seg;
    seg["start_s"] = s.start_s;
    seg["end_s"] = s.end_s;
    seg["top"] = to_string(s.top);
    seg["distribution"] = s.distribution;
    seg["hidden"] = s.hidden;
    segments.push_back(std::move(seg));
  }
  j["segments"] = std::move(segments);

  json summary = json::object();
  for (Emotion e : kAllEmotions) summary[std::string(to_string(e))] = a.summary[index_of(e)];
  j["summary"] = std::move(summary);

  json env;
  env["bins_per_second"] = a.bins_per_second;
  json mins = json::array();
  json maxs = json::array();
  json emos = json::array();
  for (const auto& b : a.envelope) {
    mins.push_back(b.min);
    maxs.push_back(b.max);
    emos.push_back(index_of(b.emotion));
  }
  env["min"] = std::move(mins);
  env["max"] = std::move(maxs);
  env["emotion"] = std::move(emos);
  j["envelope"] = std::move(env);

  json spans = json::array();
  for (const auto& s : a.spans) {
    json span;
    span["text"] = s.text;
    span["start_s"] = s.start_s;
    span["end_s"] = s.end_s;
    span["emotion"] = to_string(s.emotion);
    span["first_word"] = s.first_word;
    span["word_count"] = s.word_count;
    span["hidden"] = s.hidden;
    spans.push_back(std::move(span));
  }
  j["spans"] = std::move(spans);
  return j.dump();
}

SessionAnalysis analysis_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_analysis(e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) bad_analysis("unsupported schema_version");
    SessionAnalysis a;
    a.duration_s = j.at("duration_s").get<double>();
    a.window_s = j.at("window_s").get<double>();
    a.hop_s = j.at("hop_s").get<double>();
    a.filter = EmotionSet{};
    for (const auto& e : j.at("filter")) a.filter.insert(emotion_field(e));
    for (const auto& s : j.at("segments")) {
      Segment seg;
      seg.start_s = s.at("start_s").get<double>();
      seg.end_s = s.at("end_s").get<double>();
      seg.top = emotion_field(s.at("top"));
      const auto dist = s.at("distribution").get<std::vector<double>>();
      if (dist.size() != kNumEmotions) bad_analysis("distribution must have 8 entries");
      std::copy(dist.begin(), dist.end(), seg.distribution.begin());
      seg.hidden = s.at("hidden").get<bool>();
      a.segments.push_back(seg);
    }
    const auto& summary = j.at("summary");
    for (Emotion e : kAllEmotions) a.summary[index_of(e)] = summary.at(std::string(to_string(e))).get<std::size_t>();
    const auto& env = j.at("envelope");
    a.bins_per_second = env.at("bins_per_second").get<int>();
    const auto mins = env.at("min").get<std::vector<double>>();
    const auto maxs = env.at("max").get<std::vector<double>>();
    const auto emos = env.at("emotion").get<std::vector<std::size_t>>();
    if (mins.size() != maxs.size() || mins.size() != emos.size()) bad_analysis("envelope arrays differ in length");
    for (std::size_t i = 0; i < mins.size(); ++i) {
      const auto e = emotion_from_index(emos[i]);
      if (!e) bad_analysis("envelope emotion index out of range");
      a.envelope.push_back({mins[i], maxs[i], *e});
    }
    for (const auto& s : j.at("spans")) {
      TranscriptSpan span;
      span.text = s.at("text").get<std::string>();
      span.start_s = s.at("start_s").get<double>();
      span.end_s = s.at("end_s").get<double>();
      span.emotion = emotion_field(s.at("emotion"));
      span.first_word = s.at("first_word").get<std::size_t>();
      span.word_count = s.at("word_count").get<std::size_t>();
      span.hidden = s.at("hidden").get<bool>();
      a.spans.push_back(std::move(span));
    }
    return a;
  } catch (const json::exception& e) {
    bad_analysis(e.what());
  }
}

TimedTranscript parse_sidecar(std::string_view text) {
  TimedTranscript t;
  try {
    const auto j = json::parse(text);
    if (!j.is_array()) throw Error(ErrorKind::kInvalidTimings, "sidecar must be a JSON array of words");
    for (const auto& w : j) {
      t.words.push_back({w.at("text").get<std::string>(), w.at("start_s").get<double>(), w.at("end_s").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidTimings, std::string("sidecar: ") + e.what());
  }
  t.validate();
  return t;
}

std::string format_sidecar(const TimedTranscript& transcript) {
  json j = json::array();
  for (const auto& w : transcript.words) {
    json word;
    word["text"] = w.text;
    word["start_s"] = w.start_s;
    word["end_s"] = w.end_s;
    j.push_back(std::move(word));
  }
  return j.dump(2) + "\n";
}

EmotionSet parse_emotion_list(std::string_view csv) {
  EmotionSet set;
  while (!csv.empty()) {
    const auto comma = csv.find(',');
    const auto item = csv.substr(0, comma);
    if (item.find_first_not_of(" \t") != std::string_view::npos) set.insert(emotion_from_string(item));
    csv.remove_prefix(comma == std::string_view::npos ? csv.size() : comma + 1);
  }
  if (set.empty()) throw Error(ErrorKind::kEmptyFilter, "emotion filter must keep at least one emotion");
  return set;
}

}  // namespace emolens::pipeline
