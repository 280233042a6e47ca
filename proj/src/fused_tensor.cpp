#include "probfuse/fused_tensor.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'U', 'S', 'E'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4 + 4;

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <class T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(std::uint8_t(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t offset() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n) {
      throw FormatError(pos_, std::string("truncated file while reading ") + what);
    }
  }
  template <class T>
  T le(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= T(T(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_fused(const FusedTensor& t) {
  if (t.data.size() != std::size_t(t.channels()) * t.plane_size()) {
    throw ShapeError("fused tensor payload size does not match C x H x W");
  }
  ByteWriter w;
  w.buffer().reserve(kHeaderSize + t.data.size() * 4 + 64 * t.channels() + 4);
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kFusedFormatVersion);
  w.le<std::uint32_t>(t.channels());
  w.le<std::uint32_t>(t.height);
  w.le<std::uint32_t>(t.width);
  for (const auto& name : t.channel_names) {
    if (name.size() > 0xFFFF) throw InputError("channel name longer than 65535 bytes");
    w.le<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
  }
  for (float f : t.data) w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(f));
  w.le<std::uint32_t>(crc32_ieee(w.buffer()));
  return std::move(w.buffer());
}

FusedTensor decode_fused(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError(0, "bad magic, not a .fus file");
  const auto version = r.le<std::uint16_t>("version");
  if (version != kFusedFormatVersion) {
    throw FormatError(4, "unsupported format version " + std::to_string(version));
  }
  FusedTensor t;
  const auto channels = r.le<std::uint32_t>("channel count");
  t.height = r.le<std::uint32_t>("height");
  t.width = r.le<std::uint32_t>("width");

  std::set<std::string> seen;
  for (std::uint32_t c = 0; c < channels; ++c) {
    const std::size_t at = r.offset();
    const auto len = r.le<std::uint16_t>("channel name length");
    auto name = r.take(len, "channel name");
    t.channel_names.emplace_back(name.begin(), name.end());
    if (!seen.insert(t.channel_names.back()).second) {
      throw FormatError(at, "duplicate channel name '" + t.channel_names.back() + "'");
    }
  }

  const std::uint64_t count = std::uint64_t(channels) * t.height * t.width;
  const std::size_t payload_at = r.offset();
  if (count > (bytes.size() - payload_at) / 4) {
    throw FormatError(payload_at, "truncated file while reading payload");
  }
  auto payload = r.take(std::size_t(count) * 4, "payload");
  const std::size_t crc_at = r.offset();
  const auto stored = r.le<std::uint32_t>("CRC footer");
  if (r.offset() != bytes.size()) throw FormatError(r.offset(), "trailing bytes after CRC footer");
  const auto actual = crc32_ieee(bytes.first(crc_at));
  if (stored != actual) throw FormatError(crc_at, "CRC mismatch");

  t.data.resize(std::size_t(count));
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    std::uint32_t u = std::uint32_t(payload[4 * i]) | std::uint32_t(payload[4 * i + 1]) << 8 |
                      std::uint32_t(payload[4 * i + 2]) << 16 |
                      std::uint32_t(payload[4 * i + 3]) << 24;
    t.data[i] = std::bit_cast<float>(u);
  }
  return t;
}

void write_fused(const FusedTensor& tensor, const std::string& path) {
  const auto bytes = encode_fused(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

FusedTensor read_fused(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_fused(bytes);
}

}  // namespace probfuse
