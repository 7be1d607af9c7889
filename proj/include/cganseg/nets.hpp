#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cganseg/autodiff.hpp"
#include "cganseg/rng.hpp"
#include "cganseg/tensor.hpp"

namespace cganseg {

enum class Variant : std::uint32_t {
  GenAutoEnc = 0,  // encoder-decoder generator, no skip connections
  GenUnet = 1,     // encoder-decoder generator with skip connections
  Discriminator = 2,
  ShapeCNN = 3,
};

std::string_view variant_name(Variant v);
bool is_generator(Variant v);

struct NetworkSpec {
  Variant variant = Variant::GenUnet;
  int input_resolution = 64;
  int depth = 4;  // encoder stages (generator, discriminator)
  int base_channels = 16;

  // Throws InvalidArgument unless the resolution is a power of two divisible
  // by 2^depth, depth >= 2 and base_channels >= 4.
  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

// Generator architecture, per encoder stage i (0-based):
//   conv 4x4 stride 2 pad 1 -> bias -> leaky_relu(0.2), channels base*2^min(i,3)
// per decoder stage j:
//   conv_transpose 4x4 stride 2 pad 1 -> bias -> relu, dropout(0.5) on the
//   first generator_dropout_stages(depth) stages; the last stage emits one
//   channel through a sigmoid instead.
// In GenUnet, decoder stage j >= 1 takes its predecessor's output
// concatenated with encoder stage depth-1-j on the channel axis.
constexpr double kGeneratorDropout = 0.5;
constexpr double kLeakySlope = 0.2;
int generator_dropout_stages(int depth);

// Channel count of encoder stage i.
int encoder_channels(const NetworkSpec& spec, int stage);

struct ParamSlot {
  std::string name;
  Shape shape;
};

// Parameter names and shapes, fully determined by the spec.
std::vector<ParamSlot> parameter_layout(const NetworkSpec& spec);

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// A network's learned parameters in layout order, plus the spec and seed
/// they were built from.
class Weights {
 public:
  Weights() = default;
  // Throws ShapeError unless `params` matches parameter_layout(spec) exactly.
  Weights(NetworkSpec spec, std::uint64_t seed, std::vector<NamedTensor> params);

  const NetworkSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<NamedTensor>& params() const { return params_; }
  const Tensor& get(std::string_view name) const;
  std::vector<Tensor> tensors() const;
  std::size_t parameter_count() const;

  // Deep copy that shares nothing with this set.
  Weights clone() const;
  // Turns gradient buffers on or off for every parameter.
  void set_trainable(bool on);
  bool bit_identical(const Weights& other) const;

 private:
  NetworkSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<NamedTensor> params_;
};

// Weights ~ normal(0, 0.02), biases zero, drawn in layout order from
// Rng(seed). Parameters are created trainable.
Weights build(const NetworkSpec& spec, std::uint64_t seed);

// x [N,1,R,R] with values in [0,1] -> predicted mask [N,1,R,R] in (0,1).
// Accepts any square resolution divisible by 2^depth. Dropout is applied
// only when `dropout_active` is set, drawing from `rng`.
Tensor generator_forward(Tape& tape, const Weights& weights, const Tensor& x, bool dropout_active, Rng& rng);

// Scores whether `mask` is the true annotation of `x`: one value in (0,1)
// per sample, shape [N]. x and mask are joined on the channel axis.
Tensor discriminator_forward(Tape& tape, const Weights& weights, const Tensor& x, const Tensor& mask);

// mask [N,1,R,R] -> unnormalized class scores [N,4].
Tensor shape_cnn_logits(Tape& tape, const Weights& weights, const Tensor& mask);
// mask [N,1,R,R] -> class probabilities [N,4], column order = ShapeLabel codes.
Tensor shape_cnn_forward(Tape& tape, const Weights& weights, const Tensor& mask);

// Checkpoint file, little-endian:
//   "CGANSEG1" | u32 format version | u32 variant, resolution, depth,
//   base_channels | u64 seed | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rank, u64 extents[rank],
//   f64 payload.
constexpr std::uint32_t kCheckpointVersion = 1;

void save_weights(const Weights& weights, const std::filesystem::path& path);
// Throws FormatError (bad magic, version, truncation), ShapeError (spec or
// tensor shape mismatch) or IoError.
Weights load_weights(const NetworkSpec& spec, const std::filesystem::path& path);
// Reads whatever spec the file records.
Weights load_weights(const std::filesystem::path& path);

}  // namespace cganseg
