#include "meshconv/checkpoint.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "meshconv/config.hpp"

namespace meshconv {
namespace {

constexpr std::array<char, 8> kMagic{'M', 'C', 'O', 'N', 'V', 'C', 'K', 'P'};
constexpr std::uint32_t kElementWidth = 8;

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointError("checkpoint: truncated at byte " + std::to_string(pos_));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ModelParams& params, const ModelConfig& config) {
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.str(format_key_values(model_config_key_values(config)));
  auto refs = tensors(const_cast<ModelParams&>(params));
  w.u32(static_cast<std::uint32_t>(refs.size()));
  for (const TensorRef& t : refs) {
    w.str(t.name);
    w.u32(kElementWidth);
    w.u32(2);
    w.u64(t.rows);
    w.u64(t.cols);
    for (std::size_t i = 0; i < t.size; ++i) w.f64(t.data[i]);
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) throw CheckpointError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  try {
    std::istringstream cfg(r.str());
    ck.config = model_config_from_key_values(parse_key_values(cfg));
    ck.params = ModelParams::zeros(ck.config);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: invalid config block: ") + e.what());
  }

  auto refs = tensors(ck.params);
  const std::uint32_t count = r.u32();
  if (count != refs.size()) {
    throw CheckpointError("checkpoint: " + std::to_string(count) + " arrays, config implies " +
                          std::to_string(refs.size()));
  }
  for (const TensorRef& t : refs) {
    const std::string name = r.str();
    if (name != t.name) throw CheckpointError("checkpoint: expected array '" + t.name + "', found '" + name + "'");
    const std::uint32_t width = r.u32();
    if (width != kElementWidth) throw CheckpointError("checkpoint: unsupported element width for " + name);
    const std::uint32_t ndims = r.u32();
    if (ndims != 2) throw CheckpointError("checkpoint: expected 2 dims for " + name);
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != t.rows || cols != t.cols) throw CheckpointError("checkpoint: shape mismatch for " + name);
    for (std::size_t i = 0; i < t.size; ++i) t.data[i] = r.f64();
  }
  if (!r.done()) throw CheckpointError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ModelConfig& config) {
  const auto bytes = serialize_checkpoint(params, config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ck = load_checkpoint(path);
  const KeyValues have = model_config_key_values(ck.config);
  const KeyValues want = model_config_key_values(expected);
  for (std::size_t i = 0; i < have.size(); ++i) {
    if (have[i].second != want[i].second) {
      throw CheckpointError("checkpoint: config mismatch for " + have[i].first + " (stored " + have[i].second +
                            ", expected " + want[i].second + ")");
    }
  }
  return ck;
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace meshconv
