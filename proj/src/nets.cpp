#include "cganseg/nets.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "cganseg/errors.hpp"

namespace cganseg {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::GenAutoEnc: return "autoenc";
    case Variant::GenUnet: return "unet";
    case Variant::Discriminator: return "discriminator";
    case Variant::ShapeCNN: return "shape_cnn";
  }
  return "unknown";
}

bool is_generator(Variant v) { return v == Variant::GenAutoEnc || v == Variant::GenUnet; }

void NetworkSpec::validate() const {
  if (static_cast<std::uint32_t>(variant) > 3) throw InvalidArgument("unknown network variant");
  if (depth < 2) throw InvalidArgument("network depth must be >= 2");
  if (base_channels < 4) throw InvalidArgument("base_channels must be >= 4");
  if (input_resolution < 2 || !std::has_single_bit(static_cast<unsigned>(input_resolution))) {
    throw InvalidArgument("input resolution " + std::to_string(input_resolution) + " is not a power of two");
  }
  if (depth >= 31 || input_resolution % (1 << depth) != 0) {
    throw InvalidArgument("input resolution " + std::to_string(input_resolution) + " is not divisible by 2^" +
                          std::to_string(depth));
  }
}

int generator_dropout_stages(int depth) { return std::max(1, depth / 2); }

int encoder_channels(const NetworkSpec& spec, int stage) {
  return spec.base_channels << std::min(stage, 3);
}

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

std::string stage_name(const char* prefix, int i, const char* field) {
  return std::string(prefix) + std::to_string(i) + "." + field;
}

int decoder_in_channels(const NetworkSpec& spec, int j) {
  const int d = spec.depth;
  if (j == 0) return encoder_channels(spec, d - 1);
  const int previous = encoder_channels(spec, d - 1 - j);
  return spec.variant == Variant::GenUnet ? 2 * previous : previous;
}

int decoder_out_channels(const NetworkSpec& spec, int j) {
  return j == spec.depth - 1 ? 1 : encoder_channels(spec, spec.depth - 2 - j);
}

}  // namespace

std::vector<ParamSlot> parameter_layout(const NetworkSpec& spec) {
  spec.validate();
  std::vector<ParamSlot> slots;
  const int d = spec.depth;
  switch (spec.variant) {
    case Variant::GenAutoEnc:
    case Variant::GenUnet: {
      for (int i = 0; i < d; ++i) {
        const int in = i == 0 ? 1 : encoder_channels(spec, i - 1);
        const int out = encoder_channels(spec, i);
        slots.push_back({stage_name("enc", i, "weight"), {sz(out), sz(in), 4, 4}});
        slots.push_back({stage_name("enc", i, "bias"), {sz(out)}});
      }
      for (int j = 0; j < d; ++j) {
        // Transposed-convolution kernels are laid out [in, out, kH, kW].
        const int in = decoder_in_channels(spec, j);
        const int out = decoder_out_channels(spec, j);
        slots.push_back({stage_name("dec", j, "weight"), {sz(in), sz(out), 4, 4}});
        slots.push_back({stage_name("dec", j, "bias"), {sz(out)}});
      }
      break;
    }
    case Variant::Discriminator: {
      for (int i = 0; i < d; ++i) {
        const int in = i == 0 ? 2 : encoder_channels(spec, i - 1);
        const int out = encoder_channels(spec, i);
        slots.push_back({stage_name("conv", i, "weight"), {sz(out), sz(in), 4, 4}});
        slots.push_back({stage_name("conv", i, "bias"), {sz(out)}});
      }
      const int side = spec.input_resolution >> d;
      const int features = encoder_channels(spec, d - 1) * side * side;
      slots.push_back({"head.weight", {1, sz(features)}});
      slots.push_back({"head.bias", {1}});
      break;
    }
    case Variant::ShapeCNN: {
      const int c0 = spec.base_channels;
      const int c1 = 2 * spec.base_channels;
      const int hidden = 8 * spec.base_channels;
      const int side = spec.input_resolution / 4;
      slots.push_back({"conv0.weight", {sz(c0), 1, 3, 3}});
      slots.push_back({"conv0.bias", {sz(c0)}});
      slots.push_back({"conv1.weight", {sz(c1), sz(c0), 3, 3}});
      slots.push_back({"conv1.bias", {sz(c1)}});
      slots.push_back({"fc0.weight", {sz(hidden), sz(c1 * side * side)}});
      slots.push_back({"fc0.bias", {sz(hidden)}});
      slots.push_back({"fc1.weight", {4, sz(hidden)}});
      slots.push_back({"fc1.bias", {4}});
      break;
    }
  }
  return slots;
}

Weights::Weights(NetworkSpec spec, std::uint64_t seed, std::vector<NamedTensor> params)
    : spec_(spec), seed_(seed), params_(std::move(params)) {
  const std::vector<ParamSlot> layout = parameter_layout(spec_);
  if (layout.size() != params_.size()) {
    throw ShapeError("expected " + std::to_string(layout.size()) + " parameters for " +
                     std::string(variant_name(spec_.variant)) + ", got " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].name != params_[i].name || layout[i].shape != params_[i].value.shape()) {
      throw ShapeError("parameter " + std::to_string(i) + " is " + params_[i].name +
                       shape_to_string(params_[i].value.shape()) + ", expected " + layout[i].name +
                       shape_to_string(layout[i].shape));
    }
  }
}

const Tensor& Weights::get(std::string_view name) const {
  for (const NamedTensor& p : params_) {
    if (p.name == name) return p.value;
  }
  throw ShapeError("no parameter named " + std::string(name));
}

std::vector<Tensor> Weights::tensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const NamedTensor& p : params_) out.push_back(p.value);
  return out;
}

std::size_t Weights::parameter_count() const {
  std::size_t n = 0;
  for (const NamedTensor& p : params_) n += p.value.numel();
  return n;
}

Weights Weights::clone() const {
  std::vector<NamedTensor> copies;
  copies.reserve(params_.size());
  for (const NamedTensor& p : params_) {
    Tensor copy = p.value.clone();
    copy.set_requires_grad(p.value.requires_grad());
    copies.push_back({p.name, std::move(copy)});
  }
  return Weights(spec_, seed_, std::move(copies));
}

void Weights::set_trainable(bool on) {
  for (NamedTensor& p : params_) p.value.set_requires_grad(on);
}

bool Weights::bit_identical(const Weights& other) const {
  if (!(spec_ == other.spec_) || params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto a = params_[i].value.data();
    auto b = other.params_[i].value.data();
    if (params_[i].name != other.params_[i].name || a.size() != b.size() ||
        std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

Weights build(const NetworkSpec& spec, std::uint64_t seed) {
  const std::vector<ParamSlot> layout = parameter_layout(spec);
  Rng rng(seed);
  std::vector<NamedTensor> params;
  params.reserve(layout.size());
  for (const ParamSlot& slot : layout) {
    Tensor t(slot.shape, true);
    const bool is_bias = slot.name.ends_with(".bias");
    if (!is_bias) {
      for (double& v : t.data_mut()) v = rng.normal(0.0, 0.02);
    }
    params.push_back({slot.name, std::move(t)});
  }
  return Weights(spec, seed, std::move(params));
}

namespace {

void require_unit_range(const Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " values must lie in [0,1]");
  }
}

void require_square_single_channel(const Tensor& t, const char* what) {
  const Shape& s = t.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != s[3]) {
    throw ShapeError(std::string(what) + " must be [N,1,R,R], got " + shape_to_string(s));
  }
}

Tensor conv_stage(Tape& tape, const Weights& w, const Tensor& x, const std::string& prefix, int stride,
                  int padding) {
  Tensor y = conv2d(tape, x, w.get(prefix + ".weight"), stride, padding);
  return add_channel_bias(tape, y, w.get(prefix + ".bias"));
}

}  // namespace

Tensor generator_forward(Tape& tape, const Weights& weights, const Tensor& x, bool dropout_active, Rng& rng) {
  const NetworkSpec& spec = weights.spec();
  if (!is_generator(spec.variant)) throw ShapeError("generator_forward needs generator weights");
  require_square_single_channel(x, "generator input");
  const std::size_t side = x.dim(2);
  const std::size_t factor = std::size_t{1} << spec.depth;
  if (side % factor != 0) {
    throw ShapeError("generator input resolution " + std::to_string(side) + " is not divisible by 2^" +
                     std::to_string(spec.depth));
  }
  require_unit_range(x, "generator input");

  const int d = spec.depth;
  std::vector<Tensor> skips;
  Tensor h = x;
  for (int i = 0; i < d; ++i) {
    h = leaky_relu(tape, conv_stage(tape, weights, h, "enc" + std::to_string(i), 2, 1), kLeakySlope);
    skips.push_back(h);
  }
  const int dropout_stages = generator_dropout_stages(d);
  for (int j = 0; j < d; ++j) {
    if (j > 0 && spec.variant == Variant::GenUnet) {
      const Tensor parts[] = {h, skips[static_cast<std::size_t>(d - 1 - j)]};
      h = concat(tape, parts, 1);
    }
    const std::string prefix = "dec" + std::to_string(j);
    h = conv2d_transpose(tape, h, weights.get(prefix + ".weight"), 2, 1);
    h = add_channel_bias(tape, h, weights.get(prefix + ".bias"));
    if (j == d - 1) {
      h = sigmoid(tape, h);
    } else {
      h = relu(tape, h);
      if (j < dropout_stages) h = dropout(tape, h, kGeneratorDropout, dropout_active, rng);
    }
  }
  return h;
}

Tensor discriminator_forward(Tape& tape, const Weights& weights, const Tensor& x, const Tensor& mask) {
  const NetworkSpec& spec = weights.spec();
  if (spec.variant != Variant::Discriminator) throw ShapeError("discriminator_forward needs discriminator weights");
  if (x.shape() != mask.shape()) {
    throw ShapeError("discriminator image " + shape_to_string(x.shape()) + " and mask " +
                     shape_to_string(mask.shape()) + " differ in shape");
  }
  require_square_single_channel(x, "discriminator input");
  if (x.dim(2) != static_cast<std::size_t>(spec.input_resolution)) {
    throw ShapeError("discriminator expects resolution " + std::to_string(spec.input_resolution) + ", got " +
                     std::to_string(x.dim(2)));
  }
  const Tensor parts[] = {x, mask};
  Tensor h = concat(tape, parts, 1);
  for (int i = 0; i < spec.depth; ++i) {
    h = leaky_relu(tape, conv_stage(tape, weights, h, "conv" + std::to_string(i), 2, 1), kLeakySlope);
  }
  const std::size_t batch = x.dim(0);
  h = reshape(tape, h, {batch, h.numel() / batch});
  h = linear(tape, h, weights.get("head.weight"), weights.get("head.bias"));
  return reshape(tape, sigmoid(tape, h), {batch});
}

Tensor shape_cnn_logits(Tape& tape, const Weights& weights, const Tensor& mask) {
  const NetworkSpec& spec = weights.spec();
  if (spec.variant != Variant::ShapeCNN) throw ShapeError("shape_cnn_forward needs shape-CNN weights");
  require_square_single_channel(mask, "shape classifier input");
  if (mask.dim(2) != static_cast<std::size_t>(spec.input_resolution)) {
    throw ShapeError("shape classifier expects resolution " + std::to_string(spec.input_resolution) + ", got " +
                     std::to_string(mask.dim(2)));
  }
  require_unit_range(mask, "shape classifier input");
  Tensor h = relu(tape, conv_stage(tape, weights, mask, "conv0", 2, 1));
  h = relu(tape, conv_stage(tape, weights, h, "conv1", 2, 1));
  const std::size_t batch = mask.dim(0);
  h = reshape(tape, h, {batch, h.numel() / batch});
  h = relu(tape, linear(tape, h, weights.get("fc0.weight"), weights.get("fc0.bias")));
  return linear(tape, h, weights.get("fc1.weight"), weights.get("fc1.bias"));
}

Tensor shape_cnn_forward(Tape& tape, const Weights& weights, const Tensor& mask) {
  return softmax(tape, shape_cnn_logits(tape, weights, mask));
}

}  // namespace cganseg
