#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mico/status.hpp"

namespace mico {

enum class DType : uint8_t {
  F32 = 0,  // 4-byte IEEE-754
  I8 = 1,   // signed byte
  I32 = 2,  // 4-byte signed, bias/accumulator domain
};

inline constexpr size_t align_up(size_t v, size_t align) {
  return (v + align - 1) & ~(align - 1);
}
inline constexpr size_t align_down(size_t v, size_t align) {
  return v & ~(align - 1);
}

inline size_t dtype_size(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::I8: return 1;
    case DType::I32: return 4;
  }
  return 0;
}

const char* dtype_name(DType t);
std::optional<DType> dtype_from_name(const std::string& name);

/// Affine per-tensor quantization: real = scale * (q - zero_point).
struct QuantParams {
  float scale = 1.0f;      // > 0
  int32_t zero_point = 0;  // in [-128, 127] for I8 tensors

  bool operator==(const QuantParams&) const = default;
};

inline constexpr uint8_t kMaxRank = 4;

/// Tensor extents, rank 0..4, NHWC layout for rank 4. Value type.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<uint32_t> dims) {
    assert(dims.size() <= kMaxRank);
    for (uint32_t d : dims) dims_[rank_++] = d;
  }

  static Result<Shape> from(std::span<const uint32_t> dims) {
    if (dims.size() > kMaxRank)
      return Result<Shape>(ErrCode::MalformedRecord, "shape rank exceeds 4");
    Shape s;
    for (uint32_t d : dims) s.dims_[s.rank_++] = d;
    return s;
  }

  uint8_t rank() const { return rank_; }
  uint32_t dim(size_t i) const {
    assert(i < rank_);
    return dims_[i];
  }
  size_t elem_count() const {
    size_t n = 1;
    for (uint8_t i = 0; i < rank_; ++i) n *= dims_[i];
    return n;
  }
  std::span<const uint32_t> dims() const { return {dims_.data(), rank_}; }

  bool operator==(const Shape&) const = default;

  std::string to_string() const;

 private:
  std::array<uint32_t, kMaxRank> dims_{0, 0, 0, 0};
  uint8_t rank_ = 0;
};

// Opcode values are stable; they are serialized in .mico files.
enum class Opcode : uint8_t {
  CONV_2D = 0,
  DEPTHWISE_CONV_2D = 1,
  FULLY_CONNECTED = 2,
  MAX_POOL_2D = 3,
  AVG_POOL_2D = 4,
  SOFTMAX = 5,
  RELU = 6,
  ADD = 7,
  RESHAPE = 8,
  QUANTIZE = 9,
  DEQUANTIZE = 10,
};

inline constexpr uint8_t kOpcodeCount = 11;

const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(const std::string& name);

enum class Padding : uint8_t { SAME = 0, VALID = 1 };
enum class Activation : uint8_t { NONE = 0, RELU = 1 };

/// Per-op parameter record. One flat record serves all opcodes; each kernel
/// reads only the fields it defines. Dilation is fixed at 1.
struct OpParams {
  int32_t stride_h = 1;
  int32_t stride_w = 1;
  Padding padding = Padding::VALID;
  Activation activation = Activation::NONE;
  int32_t filter_h = 1;  // pooling window
  int32_t filter_w = 1;
  int32_t depth_multiplier = 1;  // depthwise conv
  int32_t axis = -1;             // softmax; -1 means last axis
  Shape new_shape;               // reshape target

  bool operator==(const OpParams&) const = default;
};

}  // namespace mico
