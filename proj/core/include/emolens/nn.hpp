#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "emolens/emotion.hpp"

namespace emolens::nn {

// Row-major dense tensor. Network activations are rank 2: [time, channels]
// for convolutional inputs and [1, width] for vector inputs.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor row_vector(std::span<const double> values);

  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t size() const noexcept { return data.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

enum class Arch : std::uint8_t { kDnn = 0, kCnn = 1, kFused = 2 };

std::string_view to_string(Arch arch) noexcept;
Arch arch_from_string(std::string_view name);  // "dnn" | "cnn" | "fused"

struct DenseSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};
struct Conv1dSpec {
  std::size_t kernel = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  friend bool operator==(const Conv1dSpec&, const Conv1dSpec&) = default;
};
struct ReluSpec {
  friend bool operator==(const ReluSpec&, const ReluSpec&) = default;
};
// Mean over the whole time axis: [T, C] -> [1, C].
struct MeanPoolSpec {
  friend bool operator==(const MeanPoolSpec&, const MeanPoolSpec&) = default;
};

using LayerSpec = std::variant<DenseSpec, Conv1dSpec, ReluSpec, MeanPoolSpec>;

struct ModelSpec {
  Arch arch = Arch::kDnn;
  std::size_t input_width = 0;  // columns of the input tensor
  std::vector<LayerSpec> layers;

  // Throws Error(kShapeMismatch) if consecutive layers do not compose or the
  // output width is not kNumEmotions.
  void validate() const;
  // Shapes of the trainable tensors in layer order (weights then bias).
  std::vector<std::vector<std::size_t>> parameter_shapes() const;
  // Fewest input rows the network accepts.
  std::size_t min_input_rows() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// dense 256 -> ReLU -> dense 128 -> ReLU -> dense 8
ModelSpec default_dnn_spec(std::size_t input_width);
// conv1d(k=5, 16ch) -> ReLU -> mean-pool over time -> dense 64 -> ReLU -> dense 8
ModelSpec default_cnn_spec(std::size_t channels);
// The DNN topology over fused audio+text vectors.
ModelSpec default_fused_spec(std::size_t audio_width, std::size_t text_width);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 600;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  AdamConfig adam;
  std::uint64_t seed = 0;

  void validate() const;
};

// Fixed per-column input standardisation fitted on the training set.
struct InputNorm {
  std::vector<double> mean;
  std::vector<double> scale;

  friend bool operator==(const InputNorm&, const InputNorm&) = default;
};

using EmotionDistribution = std::array<double, kNumEmotions>;

// Output unit i corresponds to kAllEmotions[i].
struct Model {
  ModelSpec spec;
  InputNorm norm;
  std::vector<Tensor> params;

  friend bool operator==(const Model&, const Model&) = default;
};

struct Example {
  Tensor input;
  Emotion label = Emotion::kNeutral;
};

// --- primitive ops ---------------------------------------------------------

// y = x W + b, x: [R, in], W: [in, out], b: [out].
Tensor dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias);
// Valid cross-correlation along time, stride 1. x: [T, Cin], W: [K, Cin, Cout].
Tensor conv1d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias);
Tensor relu(const Tensor& x);
Tensor mean_pool_time(const Tensor& x);
// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
// -log(max(p[target], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t target);

// Argmax with ties going to the lower index.
std::size_t argmax(std::span<const double> values) noexcept;

// --- models ------------------------------------------------------------------

// Glorot-uniform weights, zero biases, identity input norm.
Model initialize(const ModelSpec& spec, std::uint64_t seed);
// All parameters zero: predicts the uniform distribution.
Model zero_model(const ModelSpec& spec);

// Raw output scores [1, kNumEmotions].
std::vector<double> logits(const Model& model, const Tensor& input);
EmotionDistribution predict(const Model& model, const Tensor& input);
Emotion predict_label(const Model& model, const Tensor& input);

// Mean cross-entropy over the batch.
double batch_loss(const Model& model, std::span<const Example> batch);

struct Gradients {
  std::vector<Tensor> grads;  // aligned with Model::params
  double loss = 0.0;          // mean batch loss
};

// Reverse-mode gradients of the mean batch loss.
Gradients backward(const Model& model, std::span<const Example> batch);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const std::vector<Tensor>& params);
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               double learning_rate, const AdamConfig& config);

InputNorm fit_input_norm(std::span<const Example> dataset, std::size_t width);

struct TrainResult {
  Model model;
  std::vector<double> loss_history;  // one mean loss per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

TrainResult train(std::span<const Example> dataset, const ModelSpec& spec, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// "epoch,loss" CSV, epochs numbered from 1.
std::string loss_history_csv(std::span<const double> history);

// --- serialisation -------------------------------------------------------------
//
// Layout (little-endian): "EMOV", u8 version, u8 arch, u32 input_width,
// u32 layer count, per layer u8 kind + u32 fields, u32 norm width + f64 mean[]
// + f64 scale[], u32 tensor count, per tensor u32 rank + u32 dims[] + f64 data[].

std::vector<std::uint8_t> serialize(const Model& model);
Model deserialize(std::span<const std::uint8_t> bytes);  // throws Error(kMalformedModel)
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace emolens::nn
