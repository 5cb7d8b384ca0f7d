#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "mico/status.hpp"
#include "mico/types.hpp"

namespace mico {

/// Read-only view of a tensor's metadata and bytes.
struct ConstTensor {
  DType dtype = DType::F32;
  Shape shape;
  std::optional<QuantParams> quant;
  std::span<const uint8_t> data;

  const float* f32() const { return reinterpret_cast<const float*>(data.data()); }
  const int8_t* i8() const { return reinterpret_cast<const int8_t*>(data.data()); }
  const int32_t* i32() const { return reinterpret_cast<const int32_t*>(data.data()); }
  size_t elem_count() const { return shape.elem_count(); }
};

/// Writable view of a tensor's metadata and bytes.
struct MutTensor {
  DType dtype = DType::F32;
  Shape shape;
  std::optional<QuantParams> quant;
  std::span<uint8_t> data;

  float* f32() const { return reinterpret_cast<float*>(data.data()); }
  int8_t* i8() const { return reinterpret_cast<int8_t*>(data.data()); }
  int32_t* i32() const { return reinterpret_cast<int32_t*>(data.data()); }
  size_t elem_count() const { return shape.elem_count(); }

  ConstTensor as_const() const { return {dtype, shape, quant, data}; }
};

// Reference kernels, written for readability rather than performance.
// All are pure functions over caller-provided buffers; repeated evaluation
// is bit-identical. I8 kernels follow the per-tensor affine convention
// real = scale * (q - zero_point), accumulate in I32, take I32 biases with
// scale = input_scale * weight_scale and zero point 0, and requantize with
// clamp(round_half_away_from_zero(acc * s_in*s_w/s_out) + zp_out, -128, 127)
// using a double-precision effective scale.
namespace kernels {

/// Output spatial extent for one dimension under SAME/VALID padding.
/// VALID: floor((in - filter) / stride) + 1; SAME: ceil(in / stride).
int32_t out_extent(int32_t in, int32_t filter, int32_t stride, Padding padding);

/// Leading (top/left) pad for SAME; the remainder pads bottom/right.
int32_t pad_before(int32_t in, int32_t filter, int32_t stride, Padding padding);

/// Expected output shape for an op given its input shapes and params.
/// Shared by kernel prepare checks and converter shape inference.
Result<Shape> compute_output_shape(Opcode opcode, std::span<const Shape> input_shapes,
                                   const OpParams& params);

Status quantize(const ConstTensor& input, MutTensor& out);
Status dequantize(const ConstTensor& input, MutTensor& out);

Status conv_2d(const ConstTensor& input, const ConstTensor& weights, const ConstTensor& bias,
               const OpParams& params, MutTensor& out);
Status depthwise_conv_2d(const ConstTensor& input, const ConstTensor& weights,
                         const ConstTensor& bias, const OpParams& params, MutTensor& out);
Status fully_connected(const ConstTensor& input, const ConstTensor& weights,
                       const ConstTensor& bias, const OpParams& params, MutTensor& out);

Status max_pool_2d(const ConstTensor& input, const OpParams& params, MutTensor& out);
Status avg_pool_2d(const ConstTensor& input, const OpParams& params, MutTensor& out);

/// I8 softmax stages the row through `scratch` as F32; scratch must hold
/// elem_count * sizeof(float) bytes. F32 softmax ignores scratch.
Status softmax(const ConstTensor& input, const OpParams& params, MutTensor& out,
               std::span<uint8_t> scratch = {});

Status relu(const ConstTensor& input, MutTensor& out);
Status add(const ConstTensor& a, const ConstTensor& b, const OpParams& params, MutTensor& out);
Status reshape(const ConstTensor& input, const OpParams& params, MutTensor& out);

/// clamp(round_half_away_from_zero(value / scale) + zero_point, -128, 127)
int8_t quantize_value(double value, const QuantParams& q);

}  // namespace kernels
}  // namespace mico
