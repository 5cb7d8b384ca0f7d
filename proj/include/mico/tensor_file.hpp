#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mico/status.hpp"
#include "mico/types.hpp"

namespace mico {

// MTEN tensor file: 24-byte header (magic "MTEN", u8 dtype, u8 rank,
// u16 pad, 4 x u32 dims) followed by the raw little-endian payload.

inline constexpr uint8_t kMtenMagic[4] = {0x4D, 0x54, 0x45, 0x4E};
inline constexpr size_t kMtenHeaderSize = 24;

struct TensorFile {
  DType dtype = DType::F32;
  Shape shape;
  std::vector<uint8_t> data;
};

std::vector<uint8_t> encode_tensor(DType dtype, const Shape& shape,
                                   std::span<const uint8_t> data);
Result<TensorFile> decode_tensor(std::span<const uint8_t> bytes);

Result<TensorFile> read_tensor_file(const std::string& path);
Status write_tensor_file(const std::string& path, DType dtype, const Shape& shape,
                         std::span<const uint8_t> data);

// Calibration file: one text line "<dtype> <d0>x<d1>x..." followed by the
// raw little-endian payload, e.g. "f32 1x16x16x1\n" + 1024 bytes.
Result<TensorFile> read_calibration_file(const std::string& path);
Status write_calibration_file(const std::string& path, DType dtype, const Shape& shape,
                              std::span<const uint8_t> data);

Result<std::vector<uint8_t>> read_file(const std::string& path);
Status write_file(const std::string& path, std::span<const uint8_t> bytes);

}  // namespace mico
