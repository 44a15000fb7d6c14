#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emolens/emotion.hpp"

namespace emolens::metrics {

// Rows are the true emotion, columns the predicted one, canonical order.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions> cells{};

  std::uint64_t& at(Emotion truth, Emotion predicted) { return cells[index_of(truth)][index_of(predicted)]; }
  std::uint64_t at(Emotion truth, Emotion predicted) const { return cells[index_of(truth)][index_of(predicted)]; }
  std::uint64_t total() const;
  std::uint64_t detections(Emotion predicted) const;  // column sum
  std::uint64_t occurrences(Emotion truth) const;     // row sum

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// nullopt marks an emotion that was never predicted.
using PerEmotion = std::array<std::optional<double>, kNumEmotions>;

// Throws Error(kLengthMismatch).
ConfusionMatrix confusion(std::span<const Emotion> predictions, std::span<const Emotion> truths);

// error(e) = (detections(e) - correct(e)) / detections(e), where detections
// are the predictions of e; undefined when e was never predicted.
PerEmotion per_emotion_error(const ConfusionMatrix& m);

// 1 - error, undefined where the error is.
PerEmotion accuracy(const ConfusionMatrix& m);

// Share of all samples predicted correctly.
double overall_accuracy(const ConfusionMatrix& m);

// Half-up integer percentage of a rate in [0, 1].
int rounded_percent(double rate);

struct ErrorColumn {
  std::string name;  // e.g. "DNN"
  PerEmotion errors;
};

// Tab-separated table: header "Emotion\t<name> (Err %)..." then one row per
// emotion in canonical order with integer percentages; undefined cells are
// rendered as an em dash.
std::string render_error_table(std::span<const ErrorColumn> columns);
std::string render_error_table(const PerEmotion& dnn_errors, const PerEmotion& cnn_errors);

// "emotion,<name>_err,..." with error rates in [0, 1]; undefined cells empty.
std::string render_error_csv(std::span<const ErrorColumn> columns);
// {"schema_version":1,"columns":[...],"rows":[{"emotion":..,"<name>_err":..|null}]}
std::string render_error_json(std::span<const ErrorColumn> columns);

// Plain 8x8 dump for debugging.
std::string render_confusion(const ConfusionMatrix& m);

}  // namespace emolens::metrics
