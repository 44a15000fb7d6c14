#pragma once

#include <cmath>
#include <string>

#include "json.hpp"

namespace emolens::testing {

// Structural check of a version-1 session analysis document. Returns an
// empty string when valid, otherwise the first problem found.
inline std::string analysis_schema_error(const nlohmann::json& j) {
  using nlohmann::json;
  auto is_num = [](const json& v) { return v.is_number(); };
  if (!j.is_object()) return "document is not an object";
  if (j.value("schema_version", 0) != 1) return "schema_version != 1";
  for (const char* key : {"duration_s", "window_s", "hop_s"}) {
    if (!j.contains(key) || !is_num(j[key])) return std::string(key) + " missing or not a number";
  }
  if (!j.contains("labels") || !j["labels"].is_array() || j["labels"].size() != 8) return "labels must list 8 emotions";
  const auto& labels = j["labels"];
  auto is_label = [&](const json& v) {
    if (!v.is_string()) return false;
    for (const auto& l : labels) {
      if (l == v) return true;
    }
    return false;
  };
  if (!j.contains("filter") || !j["filter"].is_array() || j["filter"].empty()) return "filter must be a non-empty array";
  for (const auto& f : j["filter"]) {
    if (!is_label(f)) return "filter holds an unknown emotion";
  }

  if (!j.contains("segments") || !j["segments"].is_array()) return "segments missing";
  for (const auto& s : j["segments"]) {
    if (!s.contains("start_s") || !is_num(s["start_s"]) || !s.contains("end_s") || !is_num(s["end_s"])) {
      return "segment times missing";
    }
    if (!(s["start_s"].get<double>() < s["end_s"].get<double>())) return "segment with start >= end";
    if (!s.contains("top") || !is_label(s["top"])) return "segment top is not an emotion";
    if (!s.contains("hidden") || !s["hidden"].is_boolean()) return "segment hidden flag missing";
    if (!s.contains("distribution") || !s["distribution"].is_array() || s["distribution"].size() != 8) {
      return "segment distribution must have 8 entries";
    }
    double sum = 0.0;
    for (const auto& p : s["distribution"]) {
      if (!is_num(p) || p.get<double>() < 0.0) return "distribution entry invalid";
      sum += p.get<double>();
    }
    if (std::abs(sum - 1.0) > 1e-6) return "distribution does not sum to 1";
  }

  if (!j.contains("summary") || !j["summary"].is_object() || j["summary"].size() != 8) return "summary must have 8 keys";
  for (const auto& [k, v] : j["summary"].items()) {
    if (!is_label(json(k)) || !v.is_number_unsigned()) return "summary entry invalid";
  }

  if (!j.contains("envelope") || !j["envelope"].is_object()) return "envelope missing";
  const auto& env = j["envelope"];
  for (const char* key : {"min", "max", "emotion"}) {
    if (!env.contains(key) || !env[key].is_array()) return std::string("envelope.") + key + " missing";
  }
  if (env["min"].size() != env["max"].size() || env["min"].size() != env["emotion"].size()) {
    return "envelope arrays differ in length";
  }

  if (!j.contains("spans") || !j["spans"].is_array()) return "spans missing";
  for (const auto& s : j["spans"]) {
    if (!s.contains("text") || !s["text"].is_string()) return "span text missing";
    if (!s.contains("emotion") || !is_label(s["emotion"])) return "span emotion invalid";
    if (!s.contains("start_s") || !is_num(s["start_s"]) || !s.contains("end_s") || !is_num(s["end_s"])) {
      return "span times missing";
    }
    if (!s.contains("first_word") || !s["first_word"].is_number_unsigned()) return "span first_word missing";
    if (!s.contains("word_count") || !s["word_count"].is_number_unsigned()) return "span word_count missing";
    if (!s.contains("hidden") || !s["hidden"].is_boolean()) return "span hidden flag missing";
  }
  return {};
}

}  // namespace emolens::testing
