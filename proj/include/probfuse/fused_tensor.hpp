#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace probfuse {

/// C x H x W planar float stack: R, G, B then one channel per context class.
struct FusedTensor {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::string> channel_names;
  std::vector<float> data;  // channel-major, then row-major

  std::uint32_t channels() const noexcept { return static_cast<std::uint32_t>(channel_names.size()); }
  std::size_t plane_size() const noexcept { return std::size_t(height) * std::size_t(width); }

  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[c * plane_size() + y * width + x];
  }
  std::span<const float> plane(std::size_t c) const {
    return std::span<const float>(data).subspan(c * plane_size(), plane_size());
  }

  friend bool operator==(const FusedTensor&, const FusedTensor&) = default;
};

inline constexpr std::uint16_t kFusedFormatVersion = 1;

/// Encodes the .fus layout (all integers and floats little-endian):
///
///   "FUSE" | u16 version | u32 C | u32 H | u32 W
///   C x (u16 byte length | UTF-8 name)
///   C*H*W f32 payload, planar, row-major per channel
///   u32 CRC-32 (IEEE) of every preceding byte
std::vector<std::uint8_t> encode_fused(const FusedTensor& tensor);

/// Inverse of encode_fused. Throws FormatError (with byte offset) on bad magic, unsupported
/// version, truncation, trailing bytes or CRC mismatch.
FusedTensor decode_fused(std::span<const std::uint8_t> bytes);

void write_fused(const FusedTensor& tensor, const std::string& path);
FusedTensor read_fused(const std::string& path);

/// CRC-32 with the IEEE 802.3 polynomial, as used in the footer.
std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

}  // namespace probfuse
