#include "emolens/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "emolens/error.hpp"
#include "emolens/random.hpp"

namespace emolens::nn {

namespace {

[[noreturn]] void shape_error(const std::string& what) { throw Error(ErrorKind::kShapeMismatch, what); }

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : shape(std::move(dims)), data(shape_product(shape), fill) {}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) shape_error("Tensor::matrix: value count does not match shape");
  Tensor t;
  t.shape = {rows, cols};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::row_vector(std::span<const double> values) {
  return matrix(1, values.size(), {values.begin(), values.end()});
}

std::size_t shape_product(std::span<const std::size_t> shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string_view to_string(Arch arch) noexcept {
  switch (arch) {
    case Arch::kDnn: return "dnn";
    case Arch::kCnn: return "cnn";
    case Arch::kFused: return "fused";
  }
  return "unknown";
}

Arch arch_from_string(std::string_view name) {
  if (name == "dnn" || name == "DNN") return Arch::kDnn;
  if (name == "cnn" || name == "CNN") return Arch::kCnn;
  if (name == "fused" || name == "FUSED") return Arch::kFused;
  throw Error(ErrorKind::kInvalidArgument, "unknown architecture '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (input_width == 0) shape_error("ModelSpec: input_width is zero");
  bool has_time = arch == Arch::kCnn;
  std::size_t cols = input_width;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + ": ";
    std::visit(Overloaded{
                   [&](const DenseSpec& d) {
                     if (has_time) shape_error(where + "dense layer before the time axis is pooled");
                     if (d.in != cols || d.out == 0) {
                       shape_error(where + "dense expects " + std::to_string(d.in) + " inputs, got " +
                                   std::to_string(cols));
                     }
                     cols = d.out;
                   },
                   [&](const Conv1dSpec& c) {
                     if (!has_time) shape_error(where + "conv1d needs a time axis");
                     if (c.in_channels != cols || c.kernel == 0 || c.out_channels == 0) {
                       shape_error(where + "conv1d expects " + std::to_string(c.in_channels) +
                                   " channels, got " + std::to_string(cols));
                     }
                     cols = c.out_channels;
                   },
                   [](const ReluSpec&) {},
                   [&](const MeanPoolSpec&) {
                     if (!has_time) shape_error(where + "mean-pool needs a time axis");
                     has_time = false;
                   },
               },
               layers[i]);
  }
  if (has_time) shape_error("ModelSpec: time axis never pooled");
  if (cols != kNumEmotions) {
    shape_error("ModelSpec: output width " + std::to_string(cols) + " != " + std::to_string(kNumEmotions));
  }
}

std::vector<std::vector<std::size_t>> ModelSpec::parameter_shapes() const {
  std::vector<std::vector<std::size_t>> shapes;
  for (const auto& layer : layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      shapes.push_back({d->in, d->out});
      shapes.push_back({d->out});
    } else if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
      shapes.push_back({c->kernel, c->in_channels, c->out_channels});
      shapes.push_back({c->out_channels});
    }
  }
  return shapes;
}

std::size_t ModelSpec::min_input_rows() const {
  std::size_t rows = 1;
  for (const auto& layer : layers) {
    if (const auto* c = std::get_if<Conv1dSpec>(&layer)) rows += c->kernel - 1;
  }
  return rows;
}

ModelSpec default_dnn_spec(std::size_t input_width) {
  return {Arch::kDnn,
          input_width,
          {DenseSpec{input_width, 256}, ReluSpec{}, DenseSpec{256, 128}, ReluSpec{},
           DenseSpec{128, kNumEmotions}}};
}

ModelSpec default_cnn_spec(std::size_t channels) {
  return {Arch::kCnn,
          channels,
          {Conv1dSpec{5, channels, 16}, ReluSpec{}, MeanPoolSpec{}, DenseSpec{16, 64}, ReluSpec{},
           DenseSpec{64, kNumEmotions}}};
}

ModelSpec default_fused_spec(std::size_t audio_width, std::size_t text_width) {
  ModelSpec spec = default_dnn_spec(audio_width + text_width);
  spec.arch = Arch::kFused;
  return spec;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::kInvalidArgument, "TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::kInvalidArgument, "TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kInvalidArgument, "TrainConfig: learning_rate must be > 0");
}

// --- primitive ops ----------------------------------------------------------

Tensor dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  if (x.rank() != 2 || weights.rank() != 2 || bias.rank() != 1 || x.cols() != weights.rows() ||
      bias.shape[0] != weights.cols()) {
    shape_error("dense: x " + shape_str(x.shape) + ", W " + shape_str(weights.shape) + ", b " +
                shape_str(bias.shape));
  }
  const std::size_t rows = x.rows();
  const std::size_t in = weights.rows();
  const std::size_t out = weights.cols();
  Tensor y({rows, out});
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = &y.data[r * out];
    std::copy(bias.data.begin(), bias.data.end(), yr);
    for (std::size_t a = 0; a < in; ++a) {
      const double xa = x.data[r * in + a];
      if (xa == 0.0) continue;
      const double* wa = &weights.data[a * out];
      for (std::size_t o = 0; o < out; ++o) yr[o] += xa * wa[o];
    }
  }
  return y;
}

Tensor conv1d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias) {
  if (x.rank() != 2 || kernels.rank() != 3 || bias.rank() != 1 || kernels.shape[1] != x.cols() ||
      bias.shape[0] != kernels.shape[2] || kernels.shape[0] == 0 || kernels.shape[0] > x.rows()) {
    shape_error("conv1d: x " + shape_str(x.shape) + ", W " + shape_str(kernels.shape) + ", b " +
                shape_str(bias.shape));
  }
  const std::size_t width = kernels.shape[0];
  const std::size_t cin = kernels.shape[1];
  const std::size_t cout = kernels.shape[2];
  const std::size_t steps = x.rows() - width + 1;
  Tensor y({steps, cout});
  for (std::size_t t = 0; t < steps; ++t) {
    double* yt = &y.data[t * cout];
    std::copy(bias.data.begin(), bias.data.end(), yt);
    for (std::size_t k = 0; k < width; ++k) {
      for (std::size_t c = 0; c < cin; ++c) {
        const double xv = x.data[(t + k) * cin + c];
        const double* w = &kernels.data[(k * cin + c) * cout];
        for (std::size_t o = 0; o < cout; ++o) yt[o] += xv * w[o];
      }
    }
  }
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor mean_pool_time(const Tensor& x) {
  if (x.rank() != 2 || x.rows() == 0) shape_error("mean_pool: x " + shape_str(x.shape));
  Tensor y({1, x.cols()});
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t c = 0; c < x.cols(); ++c) y.data[c] += x.at(t, c);
  }
  for (auto& v : y.data) v /= static_cast<double>(x.rows());
  return y;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

double cross_entropy(std::span<const double> probs, std::size_t target) {
  return -std::log(std::max(probs[target], 1e-12));
}

std::size_t argmax(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// --- model evaluation -------------------------------------------------------

namespace {

void check_input(const ModelSpec& spec, const Tensor& input) {
  if (input.rank() != 2 || input.cols() != spec.input_width) {
    shape_error("input " + shape_str(input.shape) + " does not match model input width " +
                std::to_string(spec.input_width));
  }
  if (spec.arch == Arch::kCnn) {
    if (input.rows() < spec.min_input_rows()) {
      shape_error("input has " + std::to_string(input.rows()) + " frames; model needs at least " +
                  std::to_string(spec.min_input_rows()));
    }
  } else if (input.rows() != 1) {
    shape_error("vector model expects a single input row, got " + std::to_string(input.rows()));
  }
}

Tensor normalize_input(const Model& model, const Tensor& input) {
  Tensor x = input;
  const auto& norm = model.norm;
  if (norm.mean.empty()) return x;
  const std::size_t cols = x.cols();
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const std::size_t c = i % cols;
    x.data[i] = (x.data[i] - norm.mean[c]) / norm.scale[c];
  }
  return x;
}

// activations[0] is the normalised input; activations[i + 1] is layer i's output.
std::vector<Tensor> forward_trace(const Model& model, const Tensor& input) {
  check_input(model.spec, input);
  std::vector<Tensor> acts;
  acts.reserve(model.spec.layers.size() + 1);
  acts.push_back(normalize_input(model, input));
  std::size_t p = 0;
  for (const auto& layer : model.spec.layers) {
    const Tensor& x = acts.back();
    Tensor y = std::visit(Overloaded{
                              [&](const DenseSpec&) {
                                p += 2;
                                return dense_forward(x, model.params[p - 2], model.params[p - 1]);
                              },
                              [&](const Conv1dSpec&) {
                                p += 2;
                                return conv1d_forward(x, model.params[p - 2], model.params[p - 1]);
                              },
                              [&](const ReluSpec&) { return relu(x); },
                              [&](const MeanPoolSpec&) { return mean_pool_time(x); },
                          },
                          layer);
    acts.push_back(std::move(y));
  }
  return acts;
}

void check_params(const Model& model) {
  const auto shapes = model.spec.parameter_shapes();
  if (shapes.size() != model.params.size()) shape_error("model parameter count does not match its spec");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (shapes[i] != model.params[i].shape) {
      shape_error("parameter " + std::to_string(i) + " has shape " + shape_str(model.params[i].shape) +
                  ", spec wants " + shape_str(shapes[i]));
    }
  }
  const std::size_t width = model.spec.input_width;
  if (!model.norm.mean.empty() && (model.norm.mean.size() != width || model.norm.scale.size() != width)) {
    shape_error("input normalisation width does not match the model input");
  }
}

Model initialize_with(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Model model{spec, {}, {}};
  for (const auto& layer : spec.layers) {
    double fan_in = 0.0;
    double fan_out = 0.0;
    std::vector<std::size_t> wshape;
    std::size_t out = 0;
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      fan_in = static_cast<double>(d->in);
      fan_out = static_cast<double>(d->out);
      wshape = {d->in, d->out};
      out = d->out;
    } else if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
      fan_in = static_cast<double>(c->kernel * c->in_channels);
      fan_out = static_cast<double>(c->kernel * c->out_channels);
      wshape = {c->kernel, c->in_channels, c->out_channels};
      out = c->out_channels;
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w(wshape);
    for (auto& v : w.data) v = rng.uniform(-limit, limit);
    model.params.push_back(std::move(w));
    model.params.emplace_back(std::vector<std::size_t>{out});
  }
  return model;
}

// Accumulates gradients of scale * loss(example) into `grads`; returns the loss.
double accumulate_gradients(const Model& model, const Example& ex, double scale, std::vector<Tensor>& grads) {
  const auto acts = forward_trace(model, ex.input);
  const auto probs = softmax(acts.back().data);
  const std::size_t target = index_of(ex.label);
  const double loss = cross_entropy(probs, target);

  Tensor dy({1, kNumEmotions});
  for (std::size_t i = 0; i < kNumEmotions; ++i) dy.data[i] = scale * (probs[i] - (i == target ? 1.0 : 0.0));

  std::size_t p = model.params.size();
  for (std::size_t li = model.spec.layers.size(); li-- > 0;) {
    const Tensor& x = acts[li];
    const bool need_dx = li > 0;
    Tensor dx;
    std::visit(Overloaded{
                   [&](const DenseSpec& d) {
                     p -= 2;
                     const Tensor& w = model.params[p];
                     Tensor& gw = grads[p];
                     Tensor& gb = grads[p + 1];
                     const std::size_t rows = x.rows();
                     if (need_dx) dx = Tensor({rows, d.in});
                     for (std::size_t r = 0; r < rows; ++r) {
                       const double* dyr = &dy.data[r * d.out];
                       for (std::size_t o = 0; o < d.out; ++o) gb.data[o] += dyr[o];
                       for (std::size_t a = 0; a < d.in; ++a) {
                         const double xa = x.data[r * d.in + a];
                         double* gwa = &gw.data[a * d.out];
                         const double* wa = &w.data[a * d.out];
                         double acc = 0.0;
                         for (std::size_t o = 0; o < d.out; ++o) {
                           gwa[o] += xa * dyr[o];
                           acc += dyr[o] * wa[o];
                         }
                         if (need_dx) dx.data[r * d.in + a] = acc;
                       }
                     }
                   },
                   [&](const Conv1dSpec& c) {
                     p -= 2;
                     const Tensor& w = model.params[p];
                     Tensor& gw = grads[p];
                     Tensor& gb = grads[p + 1];
                     const std::size_t steps = dy.rows();
                     if (need_dx) dx = Tensor({x.rows(), c.in_channels});
                     for (std::size_t t = 0; t < steps; ++t) {
                       const double* dyt = &dy.data[t * c.out_channels];
                       for (std::size_t o = 0; o < c.out_channels; ++o) gb.data[o] += dyt[o];
                       for (std::size_t k = 0; k < c.kernel; ++k) {
                         for (std::size_t ch = 0; ch < c.in_channels; ++ch) {
                           const double xv = x.data[(t + k) * c.in_channels + ch];
                           const std::size_t wbase = (k * c.in_channels + ch) * c.out_channels;
                           double acc = 0.0;
                           for (std::size_t o = 0; o < c.out_channels; ++o) {
                             gw.data[wbase + o] += xv * dyt[o];
                             acc += w.data[wbase + o] * dyt[o];
                           }
                           if (need_dx) dx.data[(t + k) * c.in_channels + ch] += acc;
                         }
                       }
                     }
                   },
                   [&](const ReluSpec&) {
                     dx = dy;
                     for (std::size_t i = 0; i < dx.data.size(); ++i) {
                       if (!(x.data[i] > 0.0)) dx.data[i] = 0.0;
                     }
                   },
                   [&](const MeanPoolSpec&) {
                     const std::size_t rows = x.rows();
                     dx = Tensor({rows, x.cols()});
                     for (std::size_t t = 0; t < rows; ++t) {
                       for (std::size_t ch = 0; ch < x.cols(); ++ch) {
                         dx.at(t, ch) = dy.data[ch] / static_cast<double>(rows);
                       }
                     }
                   },
               },
               model.spec.layers[li]);
    if (!need_dx) break;
    dy = std::move(dx);
  }
  return loss;
}

}  // namespace

Model initialize(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return initialize_with(spec, rng);
}

Model zero_model(const ModelSpec& spec) {
  spec.validate();
  Model model{spec, {}, {}};
  for (auto& shape : spec.parameter_shapes()) model.params.emplace_back(std::move(shape));
  return model;
}

std::vector<double> logits(const Model& model, const Tensor& input) {
  check_params(model);
  return forward_trace(model, input).back().data;
}

EmotionDistribution predict(const Model& model, const Tensor& input) {
  const auto p = softmax(logits(model, input));
  EmotionDistribution out{};
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

Emotion predict_label(const Model& model, const Tensor& input) {
  return kAllEmotions[argmax(predict(model, input))];
}

double batch_loss(const Model& model, std::span<const Example> batch) {
  check_params(model);
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : batch) {
    const auto acts = forward_trace(model, ex.input);
    total += cross_entropy(softmax(acts.back().data), index_of(ex.label));
  }
  return total / static_cast<double>(batch.size());
}

Gradients backward(const Model& model, std::span<const Example> batch) {
  check_params(model);
  Gradients out;
  for (const auto& p : model.params) out.grads.emplace_back(p.shape);
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) total += accumulate_gradients(model, ex, scale, out.grads);
  out.loss = total * scale;
  return out;
}

AdamState make_adam_state(const std::vector<Tensor>& params) {
  AdamState state;
  for (const auto& p : params) {
    state.m.emplace_back(p.shape);
    state.v.emplace_back(p.shape);
  }
  return state;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               double learning_rate, const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    shape_error("adam_step: parameter, gradient and state counts differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].data;
    const auto& g = grads[i].data;
    auto& m = state.m[i].data;
    auto& v = state.v[i].data;
    if (g.size() != p.size()) shape_error("adam_step: gradient " + std::to_string(i) + " has wrong size");
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correct1;
      const double v_hat = v[j] / correct2;
      p[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

InputNorm fit_input_norm(std::span<const Example> dataset, std::size_t width) {
  InputNorm norm{std::vector<double>(width, 0.0), std::vector<double>(width, 1.0)};
  std::vector<double> sum(width, 0.0);
  std::size_t rows = 0;
  for (const auto& ex : dataset) {
    for (std::size_t i = 0; i < ex.input.data.size(); ++i) sum[i % width] += ex.input.data[i];
    rows += ex.input.rows();
  }
  if (rows == 0) return norm;
  for (std::size_t c = 0; c < width; ++c) norm.mean[c] = sum[c] / static_cast<double>(rows);
  std::vector<double> sq(width, 0.0);
  for (const auto& ex : dataset) {
    for (std::size_t i = 0; i < ex.input.data.size(); ++i) {
      const double d = ex.input.data[i] - norm.mean[i % width];
      sq[i % width] += d * d;
    }
  }
  for (std::size_t c = 0; c < width; ++c) {
    const double sd = std::sqrt(sq[c] / static_cast<double>(rows));
    norm.scale[c] = sd > 1e-8 ? sd : 1.0;
  }
  return norm;
}

TrainResult train(std::span<const Example> dataset, const ModelSpec& spec, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  spec.validate();
  if (dataset.empty()) throw Error(ErrorKind::kEmptyDataset, "train: dataset is empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    try {
      check_input(spec, dataset[i].input);
    } catch (const Error& e) {
      shape_error("example " + std::to_string(i) + ": " + e.what());
    }
  }

  Rng rng(config.seed);
  TrainResult result{initialize_with(spec, rng), {}};
  Model& model = result.model;
  model.norm = fit_input_norm(dataset, spec.input_width);

  AdamState state = make_adam_state(model.params);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  result.loss_history.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Tensor> grads;
      for (const auto& p : model.params) grads.emplace_back(p.shape);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        epoch_loss += accumulate_gradients(model, dataset[order[i]], scale, grads);
      }
      adam_step(model.params, grads, state, config.learning_rate, config.adam);
    }
    epoch_loss /= static_cast<double>(order.size());
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
  }
  return result;
}

std::string loss_history_csv(std::span<const double> history) {
  std::string out = "epoch,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, history[i]);
    out += buf;
  }
  return out;
}

}  // namespace emolens::nn
