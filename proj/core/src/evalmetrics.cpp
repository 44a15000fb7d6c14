#include "emolens/evalmetrics.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "emolens/error.hpp"
#include "json.hpp"

namespace emolens::metrics {

namespace {

constexpr std::string_view kUndefined = "\xE2\x80\x94";  // U+2014

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : cells) {
    for (auto v : row) sum += v;
  }
  return sum;
}

std::uint64_t ConfusionMatrix::detections(Emotion predicted) const {
  std::uint64_t sum = 0;
  for (const auto& row : cells) sum += row[index_of(predicted)];
  return sum;
}

std::uint64_t ConfusionMatrix::occurrences(Emotion truth) const {
  std::uint64_t sum = 0;
  for (auto v : cells[index_of(truth)]) sum += v;
  return sum;
}

ConfusionMatrix confusion(std::span<const Emotion> predictions, std::span<const Emotion> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                                std::to_string(truths.size()) + " truths");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truths.size(); ++i) ++m.at(truths[i], predictions[i]);
  return m;
}

PerEmotion per_emotion_error(const ConfusionMatrix& m) {
  PerEmotion out{};
  for (Emotion e : kAllEmotions) {
    const auto detections = m.detections(e);
    if (detections == 0) continue;
    const auto false_detections = detections - m.at(e, e);
    out[index_of(e)] = static_cast<double>(false_detections) / static_cast<double>(detections);
  }
  return out;
}

PerEmotion accuracy(const ConfusionMatrix& m) {
  PerEmotion out = per_emotion_error(m);
  for (auto& v : out) {
    if (v) *v = 1.0 - *v;
  }
  return out;
}

double overall_accuracy(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) return 0.0;
  std::uint64_t correct = 0;
  for (Emotion e : kAllEmotions) correct += m.at(e, e);
  return static_cast<double>(correct) / static_cast<double>(total);
}

int rounded_percent(double rate) {
  // Small slack so that e.g. 0.125 * 100 = 12.499999... still rounds up.
  return static_cast<int>(std::floor(rate * 100.0 + 0.5 + 1e-9));
}

std::string render_error_table(std::span<const ErrorColumn> columns) {
  std::string out = "Emotion";
  for (const auto& c : columns) out += "\t" + c.name + " (Err %)";
  out += '\n';
  for (Emotion e : kAllEmotions) {
    out += display_name(e);
    for (const auto& c : columns) {
      out += '\t';
      const auto& v = c.errors[index_of(e)];
      out += v ? std::to_string(rounded_percent(*v)) : std::string(kUndefined);
    }
    out += '\n';
  }
  return out;
}

std::string render_error_table(const PerEmotion& dnn_errors, const PerEmotion& cnn_errors) {
  const std::array<ErrorColumn, 2> cols = {ErrorColumn{"DNN", dnn_errors}, ErrorColumn{"CNN", cnn_errors}};
  return render_error_table(cols);
}

std::string render_error_csv(std::span<const ErrorColumn> columns) {
  std::string out = "emotion";
  for (const auto& c : columns) out += "," + lower(c.name) + "_err";
  out += '\n';
  char buf[32];
  for (Emotion e : kAllEmotions) {
    out += to_string(e);
    for (const auto& c : columns) {
      out += ',';
      if (const auto& v = c.errors[index_of(e)]) {
        std::snprintf(buf, sizeof(buf), "%.6f", *v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

std::string render_error_json(std::span<const ErrorColumn> columns) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : columns) j["columns"].push_back(c.name);
  auto rows = nlohmann::ordered_json::array();
  for (Emotion e : kAllEmotions) {
    nlohmann::ordered_json row;
    row["emotion"] = to_string(e);
    for (const auto& c : columns) {
      const auto& v = c.errors[index_of(e)];
      row[lower(c.name) + "_err"] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string render_confusion(const ConfusionMatrix& m) {
  std::string out = "truth\\pred";
  for (Emotion e : kAllEmotions) out += "\t" + std::string(to_string(e));
  out += '\n';
  for (Emotion t : kAllEmotions) {
    out += to_string(t);
    for (Emotion p : kAllEmotions) out += "\t" + std::to_string(m.at(t, p));
    out += '\n';
  }
  return out;
}

}  // namespace emolens::metrics
