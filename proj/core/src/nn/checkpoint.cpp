#include "mspec/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "mspec/common/errors.hpp"

namespace mspec::nn {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'P', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_f64(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  size_t offset() const { return off_; }

  void need(size_t n, const char* what) {
    if (off_ + n > data_.size()) {
      throw ParseError(std::string("checkpoint truncated while reading ") +
                           what,
                       off_);
    }
  }

  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[off_ + i]))
           << (8 * i);
    }
    off_ += 4;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<uint64_t>(static_cast<unsigned char>(data_[off_ + i]))
              << (8 * i);
    }
    off_ += 8;
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }

  std::string str(uint32_t len, const char* what) {
    need(len, what);
    std::string s = data_.substr(off_, len);
    off_ += len;
    return s;
  }

  bool at_end() const { return off_ == data_.size(); }

 private:
  std::string data_;
  size_t off_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);

  put_u32(out, static_cast<uint32_t>(c.metadata.size()));
  out.append(c.metadata);

  put_u32(out, static_cast<uint32_t>(c.spec.kind));
  put_u32(out, static_cast<uint32_t>(c.spec.hidden_size));
  put_u32(out, static_cast<uint32_t>(c.spec.n_attention_heads));
  put_u32(out, static_cast<uint32_t>(c.spec.layer_sizes.size()));
  for (int s : c.spec.layer_sizes) put_u32(out, static_cast<uint32_t>(s));

  put_u32(out, static_cast<uint32_t>(c.params.size()));
  for (const auto& [name, tensor] : c.params.items()) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    put_u32(out, static_cast<uint32_t>(tensor.shape.size()));
    for (int d : tensor.shape) put_u32(out, static_cast<uint32_t>(d));
    for (double v : tensor.values) put_f64(out, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ConfigError("short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  Reader r(ss.str());

  const std::string magic = r.str(8, "magic");
  if (std::memcmp(magic.data(), kMagic, 8) != 0) {
    throw ParseError("bad checkpoint magic", 0);
  }
  const uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " +
                         std::to_string(version),
                     r.offset() - 4);
  }

  Checkpoint c;
  const uint32_t meta_len = r.u32("metadata length");
  c.metadata = r.str(meta_len, "metadata");

  const uint32_t kind = r.u32("arch kind");
  if (kind > 2) throw ParseError("bad arch kind", r.offset() - 4);
  c.spec.kind = static_cast<ArchKind>(kind);
  c.spec.hidden_size = static_cast<int>(r.u32("hidden size"));
  c.spec.n_attention_heads = static_cast<int>(r.u32("attention heads"));
  const uint32_t n_layers = r.u32("layer count");
  c.spec.layer_sizes.clear();
  for (uint32_t i = 0; i < n_layers; ++i) {
    c.spec.layer_sizes.push_back(static_cast<int>(r.u32("layer size")));
  }

  const uint32_t n_params = r.u32("parameter count");
  for (uint32_t i = 0; i < n_params; ++i) {
    const uint32_t name_len = r.u32("name length");
    const std::string name = r.str(name_len, "parameter name");
    const uint32_t ndim = r.u32("rank");
    if (ndim == 0 || ndim > 8) {
      throw ParseError("bad tensor rank for " + name, r.offset() - 4);
    }
    std::vector<int> shape;
    size_t numel = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      const uint32_t dim = r.u32("dimension");
      if (dim == 0) throw ParseError("zero dimension in " + name, r.offset() - 4);
      shape.push_back(static_cast<int>(dim));
      numel *= dim;
    }
    std::vector<double> values(numel);
    for (size_t k = 0; k < numel; ++k) values[k] = r.f64("tensor data");
    c.params.insert(name, Tensor(std::move(shape), std::move(values)));
  }
  if (!r.at_end()) {
    throw ParseError("trailing bytes after checkpoint payload", r.offset());
  }
  return c;
}

Checkpoint load_checkpoint_expecting(const std::string& path,
                                     const ArchSpec& expected) {
  Checkpoint c = load_checkpoint(path);
  if (!(c.spec == expected)) {
    throw ConfigError("checkpoint '" + path +
                      "' was written for a different architecture (stored " +
                      to_string(c.spec.kind) + "/h" +
                      std::to_string(c.spec.hidden_size) + ", expected " +
                      to_string(expected.kind) + "/h" +
                      std::to_string(expected.hidden_size) + ")");
  }
  return c;
}

}  // namespace mspec::nn
