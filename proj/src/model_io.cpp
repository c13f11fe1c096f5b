#include "gad/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gad/errors.hpp"

namespace gad {
namespace {

constexpr char kMagic[8] = {'G', 'A', 'D', 'M', 'O', 'D', 'E', 'L'};

std::uint64_t fnv1a(const std::string& bytes, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { little(v, 4); }
  void u64(std::uint64_t v) { little(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string& str() { return out_; }

 private:
  void little(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& in, std::size_t limit) : in_(in), limit_(limit) {}

  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw FormatError("model file is truncated");
  }
  bool magic() {
    need(sizeof kMagic);
    const bool ok = std::memcmp(in_.data() + pos_, kMagic, sizeof kMagic) == 0;
    pos_ += sizeof kMagic;
    return ok;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }
  std::uint64_t u64() { return little(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }

 private:
  std::uint64_t little(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_++])) << (8 * i);
    return v;
  }
  const std::string& in_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const GAEModel& model) {
  model.validate();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u32(model.encoder_kind == EncoderKind::gat ? 0 : 1);
  w.u8(model.self_loops ? 1 : 0);
  w.f64(model.lambda);
  w.f64(model.leaky_slope);
  w.u32(static_cast<std::uint32_t>(model.layer_dims.size()));
  for (std::size_t d : model.layer_dims) w.u64(d);
  for (const auto& layer : model.layers) {
    for (double v : layer.weight.data()) w.f64(v);
    for (double v : layer.attention) w.f64(v);
  }
  w.u64(fnv1a(w.str(), w.str().size()));
  return std::move(w.str());
}

GAEModel deserialize_model(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 8) {
    if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
      throw FormatError("not a model file (bad magic)");
    }
    throw FormatError("model file is truncated");
  }
  const std::size_t body = bytes.size() - 8;
  Reader r(bytes, body);
  if (!r.magic()) throw FormatError("not a model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("incompatible model format version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }

  // Checksum covers the whole body; verify before trusting any length field.
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
  if (stored != fnv1a(bytes, body)) throw FormatError("model file is truncated or corrupt (checksum mismatch)");

  GAEModel m;
  const std::uint32_t kind = r.u32();
  if (kind > 1) throw FormatError("unknown encoder kind code " + std::to_string(kind));
  m.encoder_kind = kind == 0 ? EncoderKind::gat : EncoderKind::gcn;
  const std::uint8_t loops = r.u8();
  if (loops > 1) throw FormatError("invalid self-loop flag");
  m.self_loops = loops == 1;
  m.lambda = r.f64();
  m.leaky_slope = r.f64();
  const std::uint32_t num_dims = r.u32();
  if (num_dims < 2) throw FormatError("model has fewer than two layer dimensions");
  r.need(static_cast<std::size_t>(num_dims) * 8);
  for (std::uint32_t k = 0; k < num_dims; ++k) m.layer_dims.push_back(r.u64());

  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    const std::size_t rows = m.layer_dims[l], cols = m.layer_dims[l + 1];
    if (rows == 0 || cols == 0 || rows > body / 8 || cols > body / 8 || rows * cols > body / 8) {
      throw FormatError("layer dimensions inconsistent with file size");
    }
    r.need(rows * cols * 8);
    LayerParams p;
    p.weight = DenseMatrix(rows, cols);
    for (double& v : p.weight.data()) v = r.f64();
    if (m.encoder_kind == EncoderKind::gat) {
      p.attention.resize(2 * cols);
      for (double& v : p.attention) v = r.f64();
    }
    m.layers.push_back(std::move(p));
  }
  if (r.pos() != body) throw FormatError("model file has trailing bytes");
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model file is inconsistent: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const GAEModel& model) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

GAEModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace gad
