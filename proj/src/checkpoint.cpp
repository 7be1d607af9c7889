#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "cganseg/errors.hpp"
#include "cganseg/nets.hpp"

namespace cganseg {
namespace {

constexpr char kMagic[8] = {'C', 'G', 'A', 'N', 'S', 'E', 'G', '1'};
constexpr std::uint32_t kMaxNameLength = 1024;
constexpr std::uint32_t kMaxRank = 8;

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buffer_.insert(buffer_.end(), p, p + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buffer_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  const std::vector<unsigned char>& buffer() const { return buffer_; }

 private:
  std::vector<unsigned char> buffer_;
};

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> data, std::string origin)
      : data_(std::move(data)), origin_(std::move(origin)) {}

  void bytes(void* out, std::size_t n) {
    need(n);
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), n, static_cast<unsigned char*>(out));
    pos_ += n;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_++]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& origin() const { return origin_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError(origin_ + ": checkpoint is truncated");
  }
  std::vector<unsigned char> data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

struct Header {
  NetworkSpec spec;
  std::uint64_t seed = 0;
};

Header read_header(ByteReader& in) {
  char magic[8];
  in.bytes(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw FormatError(in.origin() + ": not a checkpoint (bad magic bytes)");
  }
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(in.origin() + ": checkpoint format version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Header h;
  const std::uint32_t variant = in.u32();
  if (variant > 3) throw FormatError(in.origin() + ": unknown network variant " + std::to_string(variant));
  h.spec.variant = static_cast<Variant>(variant);
  h.spec.input_resolution = static_cast<int>(in.u32());
  h.spec.depth = static_cast<int>(in.u32());
  h.spec.base_channels = static_cast<int>(in.u32());
  h.seed = in.u64();
  try {
    h.spec.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(in.origin() + ": invalid spec in header: " + e.what());
  }
  return h;
}

Weights read_body(ByteReader& in, const Header& header) {
  const std::vector<ParamSlot> layout = parameter_layout(header.spec);
  const std::uint32_t count = in.u32();
  if (count != layout.size()) {
    throw ShapeError(in.origin() + ": checkpoint holds " + std::to_string(count) + " tensors, spec needs " +
                     std::to_string(layout.size()));
  }
  std::vector<NamedTensor> params;
  params.reserve(count);
  for (const ParamSlot& slot : layout) {
    const std::uint32_t name_length = in.u32();
    if (name_length > kMaxNameLength) throw FormatError(in.origin() + ": tensor name length out of range");
    std::string name(name_length, '\0');
    in.bytes(name.data(), name_length);
    const std::uint32_t rank = in.u32();
    if (rank == 0 || rank > kMaxRank) throw FormatError(in.origin() + ": tensor rank out of range");
    Shape shape(rank);
    for (auto& extent : shape) extent = static_cast<std::size_t>(in.u64());
    if (name != slot.name || shape != slot.shape) {
      throw ShapeError(in.origin() + ": tensor " + name + shape_to_string(shape) + " does not match expected " +
                       slot.name + shape_to_string(slot.shape));
    }
    std::vector<double> values(shape_numel(shape));
    if (in.remaining() / 8 < values.size()) throw FormatError(in.origin() + ": checkpoint is truncated");
    for (double& v : values) v = in.f64();
    params.push_back({std::move(name), Tensor(std::move(shape), std::move(values), true)});
  }
  if (in.remaining() != 0) throw FormatError(in.origin() + ": trailing bytes after last tensor");
  return Weights(header.spec, header.seed, std::move(params));
}

ByteReader open_reader(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return ByteReader(std::move(data), path.string());
}

}  // namespace

void save_weights(const Weights& weights, const std::filesystem::path& path) {
  ByteWriter out;
  out.bytes(kMagic, sizeof kMagic);
  out.u32(kCheckpointVersion);
  const NetworkSpec& spec = weights.spec();
  out.u32(static_cast<std::uint32_t>(spec.variant));
  out.u32(static_cast<std::uint32_t>(spec.input_resolution));
  out.u32(static_cast<std::uint32_t>(spec.depth));
  out.u32(static_cast<std::uint32_t>(spec.base_channels));
  out.u64(weights.seed());
  out.u32(static_cast<std::uint32_t>(weights.params().size()));
  for (const NamedTensor& p : weights.params()) {
    out.u32(static_cast<std::uint32_t>(p.name.size()));
    out.bytes(p.name.data(), p.name.size());
    const Shape& shape = p.value.shape();
    out.u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t extent : shape) out.u64(extent);
    for (double v : p.value.data()) out.f64(v);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write checkpoint " + path.string());
  const auto& buffer = out.buffer();
  file.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (!file) throw IoError("failed writing checkpoint " + path.string());
}

Weights load_weights(const NetworkSpec& spec, const std::filesystem::path& path) {
  ByteReader in = open_reader(path);
  const Header header = read_header(in);
  if (!(header.spec == spec)) {
    throw ShapeError(path.string() + ": checkpoint holds a " + std::string(variant_name(header.spec.variant)) +
                     " network (resolution " + std::to_string(header.spec.input_resolution) + ", depth " +
                     std::to_string(header.spec.depth) + ", base " + std::to_string(header.spec.base_channels) +
                     ") which does not match the requested spec");
  }
  return read_body(in, header);
}

Weights load_weights(const std::filesystem::path& path) {
  ByteReader in = open_reader(path);
  const Header header = read_header(in);
  return read_body(in, header);
}

}  // namespace cganseg
