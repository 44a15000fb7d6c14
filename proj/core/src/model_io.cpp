#include <bit>
#include <cstring>

#include "emolens/audio_io.hpp"
#include "emolens/error.hpp"
#include "emolens/nn.hpp"

namespace emolens::nn {

namespace {

constexpr std::uint8_t kFormatVersion = 1;
constexpr std::uint32_t kMaxCount = 1U << 28;

enum class LayerKind : std::uint8_t { kDense = 1, kConv1d = 2, kRelu = 3, kMeanPool = 4 };

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void size(std::size_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<std::uint8_t>(bits >> s));
  }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::size_t count() {
    const auto v = u32();
    if (v > kMaxCount) fail("count " + std::to_string(v) + " is implausibly large");
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  bool at_end() const { return pos_ == in_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::kMalformedModel, "offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("unexpected end of model data");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Model& model) {
  Writer w;
  w.bytes("EMOV");
  w.u8(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(model.spec.arch));
  w.size(model.spec.input_width);
  w.size(model.spec.layers.size());
  for (const auto& layer : model.spec.layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerKind::kDense));
      w.size(d->in);
      w.size(d->out);
    } else if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerKind::kConv1d));
      w.size(c->kernel);
      w.size(c->in_channels);
      w.size(c->out_channels);
    } else if (std::holds_alternative<ReluSpec>(layer)) {
      w.u8(static_cast<std::uint8_t>(LayerKind::kRelu));
    } else {
      w.u8(static_cast<std::uint8_t>(LayerKind::kMeanPool));
    }
  }
  w.size(model.norm.mean.size());
  for (double v : model.norm.mean) w.f64(v);
  for (double v : model.norm.scale) w.f64(v);
  w.size(model.params.size());
  for (const auto& t : model.params) {
    w.size(t.shape.size());
    for (auto d : t.shape) w.size(d);
    for (double v : t.data) w.f64(v);
  }
  return w.take();
}

Model deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (char c : std::string_view("EMOV")) {
    if (r.u8() != static_cast<std::uint8_t>(c)) r.fail("bad magic (expected \"EMOV\")");
  }
  if (const auto version = r.u8(); version != kFormatVersion) {
    r.fail("unsupported format version " + std::to_string(version));
  }
  Model model;
  const auto arch = r.u8();
  if (arch > static_cast<std::uint8_t>(Arch::kFused)) r.fail("unknown arch tag " + std::to_string(arch));
  model.spec.arch = static_cast<Arch>(arch);
  model.spec.input_width = r.count();
  const auto layers = r.count();
  for (std::size_t i = 0; i < layers; ++i) {
    switch (static_cast<LayerKind>(r.u8())) {
      case LayerKind::kDense: {
        const auto in = r.count();
        model.spec.layers.emplace_back(DenseSpec{in, r.count()});
        break;
      }
      case LayerKind::kConv1d: {
        const auto k = r.count();
        const auto cin = r.count();
        model.spec.layers.emplace_back(Conv1dSpec{k, cin, r.count()});
        break;
      }
      case LayerKind::kRelu: model.spec.layers.emplace_back(ReluSpec{}); break;
      case LayerKind::kMeanPool: model.spec.layers.emplace_back(MeanPoolSpec{}); break;
      default: r.fail("unknown layer kind");
    }
  }
  try {
    model.spec.validate();
  } catch (const Error& e) {
    r.fail(std::string("invalid spec: ") + e.what());
  }

  const auto norm_width = r.count();
  if (norm_width != 0 && norm_width != model.spec.input_width) r.fail("normalisation width mismatch");
  model.norm.mean.resize(norm_width);
  model.norm.scale.resize(norm_width);
  for (auto& v : model.norm.mean) v = r.f64();
  for (auto& v : model.norm.scale) v = r.f64();

  const auto expected = model.spec.parameter_shapes();
  const auto tensors = r.count();
  if (tensors != expected.size()) r.fail("tensor count does not match spec");
  for (std::size_t i = 0; i < tensors; ++i) {
    std::vector<std::size_t> shape(r.count());
    for (auto& d : shape) d = r.count();
    if (shape != expected[i]) r.fail("tensor " + std::to_string(i) + " shape does not match spec");
    Tensor t(shape);
    for (auto& v : t.data) v = r.f64();
    model.params.push_back(std::move(t));
  }
  if (!r.at_end()) r.fail("trailing bytes after model data");
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  audio::write_file(path, serialize(model));
}

Model load_model(const std::filesystem::path& path) { return deserialize(audio::read_file(path)); }

}  // namespace emolens::nn
