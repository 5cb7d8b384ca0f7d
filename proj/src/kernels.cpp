#include "mico/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mico::kernels {

namespace {

// NHWC element offset.
inline size_t at4(const Shape& s, size_t n, size_t y, size_t x, size_t c) {
  return ((n * s.dim(1) + y) * s.dim(2) + x) * s.dim(3) + c;
}

inline float apply_activation(float v, Activation act) {
  return act == Activation::RELU ? std::max(v, 0.0f) : v;
}

// Requantization clamp window; fused RELU lifts the floor to the real-zero
// codepoint.
inline int32_t clamp_floor(Activation act, int32_t zero_point) {
  return act == Activation::RELU ? std::max<int32_t>(-128, zero_point) : -128;
}

inline int8_t saturate(int64_t q, int32_t lo) {
  return static_cast<int8_t>(std::clamp<int64_t>(q, lo, 127));
}

Status shape_error(const std::string& what) { return Status(ErrCode::ShapeMismatch, what); }

bool all_f32(std::initializer_list<const ConstTensor*> ts) {
  for (const auto* t : ts)
    if (t->dtype != DType::F32) return false;
  return true;
}

}  // namespace

int8_t quantize_value(double value, const QuantParams& q) {
  const int64_t rounded = std::llround(value / q.scale) + q.zero_point;
  return static_cast<int8_t>(std::clamp<int64_t>(rounded, -128, 127));
}

int32_t out_extent(int32_t in, int32_t filter, int32_t stride, Padding padding) {
  if (padding == Padding::VALID) return in < filter ? 0 : (in - filter) / stride + 1;
  return (in + stride - 1) / stride;  // ceil(in / stride)
}

int32_t pad_before(int32_t in, int32_t filter, int32_t stride, Padding padding) {
  if (padding == Padding::VALID) return 0;
  const int32_t out = out_extent(in, filter, stride, padding);
  const int32_t total = std::max<int32_t>(0, (out - 1) * stride + filter - in);
  return total / 2;  // remainder pads bottom/right
}

Result<Shape> compute_output_shape(Opcode opcode, std::span<const Shape> in, const OpParams& p) {
  auto fail = [](const std::string& m) { return Result<Shape>(ErrCode::ShapeMismatch, m); };
  switch (opcode) {
    case Opcode::CONV_2D: {
      if (in.size() != 3) return fail("conv_2d takes input, weights, bias");
      const Shape &x = in[0], &w = in[1], &b = in[2];
      if (x.rank() != 4 || w.rank() != 4) return fail("conv_2d operands must be rank 4");
      if (w.dim(3) != x.dim(3)) return fail("conv_2d channel mismatch");
      if (b.rank() != 1 || b.dim(0) != w.dim(0)) return fail("conv_2d bias must be [out_channels]");
      const int32_t oh = out_extent(x.dim(1), w.dim(1), p.stride_h, p.padding);
      const int32_t ow = out_extent(x.dim(2), w.dim(2), p.stride_w, p.padding);
      if (oh < 1 || ow < 1) return fail("conv_2d filter larger than input");
      return Shape{x.dim(0), static_cast<uint32_t>(oh), static_cast<uint32_t>(ow), w.dim(0)};
    }
    case Opcode::DEPTHWISE_CONV_2D: {
      if (in.size() != 3) return fail("depthwise_conv_2d takes input, weights, bias");
      const Shape &x = in[0], &w = in[1], &b = in[2];
      if (x.rank() != 4 || w.rank() != 4) return fail("depthwise operands must be rank 4");
      if (w.dim(0) != 1) return fail("depthwise weights must be [1,h,w,channels]");
      const uint32_t oc = x.dim(3) * static_cast<uint32_t>(p.depth_multiplier);
      if (w.dim(3) != oc) return fail("depthwise channel count must be in_channels * multiplier");
      if (b.rank() != 1 || b.dim(0) != oc) return fail("depthwise bias must be [out_channels]");
      const int32_t oh = out_extent(x.dim(1), w.dim(1), p.stride_h, p.padding);
      const int32_t ow = out_extent(x.dim(2), w.dim(2), p.stride_w, p.padding);
      if (oh < 1 || ow < 1) return fail("depthwise filter larger than input");
      return Shape{x.dim(0), static_cast<uint32_t>(oh), static_cast<uint32_t>(ow), oc};
    }
    case Opcode::FULLY_CONNECTED: {
      if (in.size() != 3) return fail("fully_connected takes input, weights, bias");
      const Shape &x = in[0], &w = in[1], &b = in[2];
      if (x.rank() != 2 || w.rank() != 2) return fail("fully_connected operands must be rank 2");
      if (w.dim(1) != x.dim(1)) return fail("fully_connected inner dimensions disagree");
      if (b.rank() != 1 || b.dim(0) != w.dim(0)) return fail("fully_connected bias must be [out]");
      return Shape{x.dim(0), w.dim(0)};
    }
    case Opcode::MAX_POOL_2D:
    case Opcode::AVG_POOL_2D: {
      if (in.size() != 1) return fail("pooling takes one input");
      const Shape& x = in[0];
      if (x.rank() != 4) return fail("pooling input must be rank 4");
      const int32_t oh = out_extent(x.dim(1), p.filter_h, p.stride_h, p.padding);
      const int32_t ow = out_extent(x.dim(2), p.filter_w, p.stride_w, p.padding);
      if (oh < 1 || ow < 1) return fail("pooling window larger than input");
      return Shape{x.dim(0), static_cast<uint32_t>(oh), static_cast<uint32_t>(ow), x.dim(3)};
    }
    case Opcode::SOFTMAX: {
      if (in.size() != 1) return fail("softmax takes one input");
      if (in[0].rank() < 1) return fail("softmax input must have rank >= 1");
      if (p.axis != -1 && p.axis != in[0].rank() - 1)
        return fail("softmax supports only the last axis");
      return in[0];
    }
    case Opcode::RELU:
    case Opcode::QUANTIZE:
    case Opcode::DEQUANTIZE: {
      if (in.size() != 1) return fail("op takes one input");
      return in[0];
    }
    case Opcode::ADD: {
      if (in.size() != 2) return fail("add takes two inputs");
      if (!(in[0] == in[1])) return fail("add requires equal shapes (no broadcasting)");
      return in[0];
    }
    case Opcode::RESHAPE: {
      if (in.size() != 1) return fail("reshape takes one input");
      if (p.new_shape.rank() == 0) return fail("reshape requires a target shape");
      if (p.new_shape.elem_count() != in[0].elem_count())
        return fail("reshape element count mismatch: " + in[0].to_string() + " -> " +
                    p.new_shape.to_string());
      return p.new_shape;
    }
  }
  return fail("unknown opcode");
}

Status quantize(const ConstTensor& input, MutTensor& out) {
  if (input.dtype != DType::F32 || out.dtype != DType::I8 || !out.quant)
    return shape_error("quantize maps F32 to I8 with output quant params");
  const QuantParams q = *out.quant;
  for (size_t i = 0; i < input.elem_count(); ++i) out.i8()[i] = quantize_value(input.f32()[i], q);
  return Status{};
}

Status dequantize(const ConstTensor& input, MutTensor& out) {
  if (input.dtype != DType::I8 || !input.quant || out.dtype != DType::F32)
    return shape_error("dequantize maps quantized I8 to F32");
  const QuantParams q = *input.quant;
  for (size_t i = 0; i < input.elem_count(); ++i)
    out.f32()[i] = q.scale * static_cast<float>(input.i8()[i] - q.zero_point);
  return Status{};
}

namespace {

// Shared spatial walk for the two convolution flavors. `accumulate` sums
// input*weight products over one output position's receptive field.
struct ConvGeometry {
  int32_t in_h, in_w, out_h, out_w, k_h, k_w;
  int32_t pad_top, pad_left;
  const OpParams* p;
};

ConvGeometry conv_geometry(const Shape& x, int32_t k_h, int32_t k_w, const Shape& o,
                           const OpParams& p) {
  return ConvGeometry{
      static_cast<int32_t>(x.dim(1)), static_cast<int32_t>(x.dim(2)),
      static_cast<int32_t>(o.dim(1)), static_cast<int32_t>(o.dim(2)),
      k_h, k_w,
      pad_before(x.dim(1), k_h, p.stride_h, p.padding),
      pad_before(x.dim(2), k_w, p.stride_w, p.padding),
      &p};
}

}  // namespace

Status conv_2d(const ConstTensor& input, const ConstTensor& weights, const ConstTensor& bias,
               const OpParams& params, MutTensor& out) {
  auto shape = compute_output_shape(Opcode::CONV_2D,
                                    std::array{input.shape, weights.shape, bias.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape)) return shape_error("conv_2d output shape mismatch");

  const ConvGeometry g = conv_geometry(input.shape, weights.shape.dim(1), weights.shape.dim(2),
                                       out.shape, params);
  const int32_t batches = input.shape.dim(0);
  const int32_t in_c = input.shape.dim(3);
  const int32_t out_c = weights.shape.dim(0);

  if (all_f32({&input, &weights, &bias}) && out.dtype == DType::F32) {
    for (int32_t n = 0; n < batches; ++n)
      for (int32_t oy = 0; oy < g.out_h; ++oy)
        for (int32_t ox = 0; ox < g.out_w; ++ox)
          for (int32_t oc = 0; oc < out_c; ++oc) {
            float acc = 0.0f;
            for (int32_t ky = 0; ky < g.k_h; ++ky)
              for (int32_t kx = 0; kx < g.k_w; ++kx) {
                const int32_t iy = oy * params.stride_h - g.pad_top + ky;
                const int32_t ix = ox * params.stride_w - g.pad_left + kx;
                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
                for (int32_t ic = 0; ic < in_c; ++ic)
                  acc += input.f32()[at4(input.shape, n, iy, ix, ic)] *
                         weights.f32()[at4(weights.shape, oc, ky, kx, ic)];
              }
            acc += bias.f32()[oc];
            out.f32()[at4(out.shape, n, oy, ox, oc)] = apply_activation(acc, params.activation);
          }
    return Status{};
  }

  if (input.dtype == DType::I8 && weights.dtype == DType::I8 && bias.dtype == DType::I32 &&
      out.dtype == DType::I8 && input.quant && weights.quant && out.quant) {
    const int32_t in_zp = input.quant->zero_point;
    const int32_t w_zp = weights.quant->zero_point;
    const double eff_scale =
        static_cast<double>(input.quant->scale) * weights.quant->scale / out.quant->scale;
    const int32_t lo = clamp_floor(params.activation, out.quant->zero_point);
    for (int32_t n = 0; n < batches; ++n)
      for (int32_t oy = 0; oy < g.out_h; ++oy)
        for (int32_t ox = 0; ox < g.out_w; ++ox)
          for (int32_t oc = 0; oc < out_c; ++oc) {
            int32_t acc = 0;
            for (int32_t ky = 0; ky < g.k_h; ++ky)
              for (int32_t kx = 0; kx < g.k_w; ++kx) {
                const int32_t iy = oy * params.stride_h - g.pad_top + ky;
                const int32_t ix = ox * params.stride_w - g.pad_left + kx;
                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
                for (int32_t ic = 0; ic < in_c; ++ic)
                  acc += (input.i8()[at4(input.shape, n, iy, ix, ic)] - in_zp) *
                         (weights.i8()[at4(weights.shape, oc, ky, kx, ic)] - w_zp);
              }
            acc += bias.i32()[oc];
            const int64_t q = std::llround(acc * eff_scale) + out.quant->zero_point;
            out.i8()[at4(out.shape, n, oy, ox, oc)] = saturate(q, lo);
          }
    return Status{};
  }

  return shape_error("conv_2d dtype combination unsupported");
}

Status depthwise_conv_2d(const ConstTensor& input, const ConstTensor& weights,
                         const ConstTensor& bias, const OpParams& params, MutTensor& out) {
  auto shape = compute_output_shape(Opcode::DEPTHWISE_CONV_2D,
                                    std::array{input.shape, weights.shape, bias.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape)) return shape_error("depthwise output shape mismatch");

  const ConvGeometry g = conv_geometry(input.shape, weights.shape.dim(1), weights.shape.dim(2),
                                       out.shape, params);
  const int32_t batches = input.shape.dim(0);
  const int32_t mult = params.depth_multiplier;
  const int32_t out_c = out.shape.dim(3);

  if (all_f32({&input, &weights, &bias}) && out.dtype == DType::F32) {
    for (int32_t n = 0; n < batches; ++n)
      for (int32_t oy = 0; oy < g.out_h; ++oy)
        for (int32_t ox = 0; ox < g.out_w; ++ox)
          for (int32_t oc = 0; oc < out_c; ++oc) {
            const int32_t ic = oc / mult;  // no cross-channel accumulation
            float acc = 0.0f;
            for (int32_t ky = 0; ky < g.k_h; ++ky)
              for (int32_t kx = 0; kx < g.k_w; ++kx) {
                const int32_t iy = oy * params.stride_h - g.pad_top + ky;
                const int32_t ix = ox * params.stride_w - g.pad_left + kx;
                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
                acc += input.f32()[at4(input.shape, n, iy, ix, ic)] *
                       weights.f32()[at4(weights.shape, 0, ky, kx, oc)];
              }
            acc += bias.f32()[oc];
            out.f32()[at4(out.shape, n, oy, ox, oc)] = apply_activation(acc, params.activation);
          }
    return Status{};
  }

  if (input.dtype == DType::I8 && weights.dtype == DType::I8 && bias.dtype == DType::I32 &&
      out.dtype == DType::I8 && input.quant && weights.quant && out.quant) {
    const int32_t in_zp = input.quant->zero_point;
    const int32_t w_zp = weights.quant->zero_point;
    const double eff_scale =
        static_cast<double>(input.quant->scale) * weights.quant->scale / out.quant->scale;
    const int32_t lo = clamp_floor(params.activation, out.quant->zero_point);
    for (int32_t n = 0; n < batches; ++n)
      for (int32_t oy = 0; oy < g.out_h; ++oy)
        for (int32_t ox = 0; ox < g.out_w; ++ox)
          for (int32_t oc = 0; oc < out_c; ++oc) {
            const int32_t ic = oc / mult;
            int32_t acc = 0;
            for (int32_t ky = 0; ky < g.k_h; ++ky)
              for (int32_t kx = 0; kx < g.k_w; ++kx) {
                const int32_t iy = oy * params.stride_h - g.pad_top + ky;
                const int32_t ix = ox * params.stride_w - g.pad_left + kx;
                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
                acc += (input.i8()[at4(input.shape, n, iy, ix, ic)] - in_zp) *
                       (weights.i8()[at4(weights.shape, 0, ky, kx, oc)] - w_zp);
              }
            acc += bias.i32()[oc];
            const int64_t q = std::llround(acc * eff_scale) + out.quant->zero_point;
            out.i8()[at4(out.shape, n, oy, ox, oc)] = saturate(q, lo);
          }
    return Status{};
  }

  return shape_error("depthwise_conv_2d dtype combination unsupported");
}

Status fully_connected(const ConstTensor& input, const ConstTensor& weights,
                       const ConstTensor& bias, const OpParams& params, MutTensor& out) {
  auto shape = compute_output_shape(Opcode::FULLY_CONNECTED,
                                    std::array{input.shape, weights.shape, bias.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape)) return shape_error("fully_connected output shape mismatch");

  const size_t batches = input.shape.dim(0);
  const size_t in_n = input.shape.dim(1);
  const size_t out_n = weights.shape.dim(0);

  if (all_f32({&input, &weights, &bias}) && out.dtype == DType::F32) {
    for (size_t b = 0; b < batches; ++b)
      for (size_t o = 0; o < out_n; ++o) {
        float acc = 0.0f;
        for (size_t i = 0; i < in_n; ++i)
          acc += input.f32()[b * in_n + i] * weights.f32()[o * in_n + i];
        acc += bias.f32()[o];
        out.f32()[b * out_n + o] = apply_activation(acc, params.activation);
      }
    return Status{};
  }

  if (input.dtype == DType::I8 && weights.dtype == DType::I8 && bias.dtype == DType::I32 &&
      out.dtype == DType::I8 && input.quant && weights.quant && out.quant) {
    const int32_t in_zp = input.quant->zero_point;
    const int32_t w_zp = weights.quant->zero_point;
    const double eff_scale =
        static_cast<double>(input.quant->scale) * weights.quant->scale / out.quant->scale;
    const int32_t lo = clamp_floor(params.activation, out.quant->zero_point);
    for (size_t b = 0; b < batches; ++b)
      for (size_t o = 0; o < out_n; ++o) {
        int32_t acc = 0;
        for (size_t i = 0; i < in_n; ++i)
          acc += (input.i8()[b * in_n + i] - in_zp) * (weights.i8()[o * in_n + i] - w_zp);
        acc += bias.i32()[o];
        const int64_t q = std::llround(acc * eff_scale) + out.quant->zero_point;
        out.i8()[b * out_n + o] = saturate(q, lo);
      }
    return Status{};
  }

  return shape_error("fully_connected dtype combination unsupported");
}

namespace {

// Pooling walk; SAME-padding positions are excluded from the max and from
// the average's denominator.
template <typename Visit>
void pool_windows(const Shape& in, const Shape& out, const OpParams& p, Visit visit) {
  const int32_t in_h = in.dim(1), in_w = in.dim(2);
  const int32_t pad_top = pad_before(in_h, p.filter_h, p.stride_h, p.padding);
  const int32_t pad_left = pad_before(in_w, p.filter_w, p.stride_w, p.padding);
  for (uint32_t n = 0; n < out.dim(0); ++n)
    for (uint32_t oy = 0; oy < out.dim(1); ++oy)
      for (uint32_t ox = 0; ox < out.dim(2); ++ox)
        for (uint32_t c = 0; c < out.dim(3); ++c) {
          const int32_t y0 = static_cast<int32_t>(oy) * p.stride_h - pad_top;
          const int32_t x0 = static_cast<int32_t>(ox) * p.stride_w - pad_left;
          visit(n, oy, ox, c, std::max(y0, 0), std::min(y0 + p.filter_h, in_h), std::max(x0, 0),
                std::min(x0 + p.filter_w, in_w));
        }
}

}  // namespace

Status max_pool_2d(const ConstTensor& input, const OpParams& params, MutTensor& out) {
  auto shape = compute_output_shape(Opcode::MAX_POOL_2D, std::array{input.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape) || input.dtype != out.dtype)
    return shape_error("max_pool_2d output mismatch");
  if (input.dtype == DType::I8 && input.quant != out.quant)
    return Status(ErrCode::QuantMismatch, "max_pool_2d preserves quant params");

  if (input.dtype == DType::F32) {
    pool_windows(input.shape, out.shape, params,
                 [&](uint32_t n, uint32_t oy, uint32_t ox, uint32_t c, int32_t y0, int32_t y1,
                     int32_t x0, int32_t x1) {
                   float best = -std::numeric_limits<float>::infinity();
                   for (int32_t y = y0; y < y1; ++y)
                     for (int32_t x = x0; x < x1; ++x)
                       best = std::max(best, input.f32()[at4(input.shape, n, y, x, c)]);
                   out.f32()[at4(out.shape, n, oy, ox, c)] = best;
                 });
    return Status{};
  }
  if (input.dtype == DType::I8) {
    pool_windows(input.shape, out.shape, params,
                 [&](uint32_t n, uint32_t oy, uint32_t ox, uint32_t c, int32_t y0, int32_t y1,
                     int32_t x0, int32_t x1) {
                   int8_t best = -128;
                   for (int32_t y = y0; y < y1; ++y)
                     for (int32_t x = x0; x < x1; ++x)
                       best = std::max(best, input.i8()[at4(input.shape, n, y, x, c)]);
                   out.i8()[at4(out.shape, n, oy, ox, c)] = best;
                 });
    return Status{};
  }
  return shape_error("max_pool_2d dtype unsupported");
}

Status avg_pool_2d(const ConstTensor& input, const OpParams& params, MutTensor& out) {
  auto shape = compute_output_shape(Opcode::AVG_POOL_2D, std::array{input.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape) || input.dtype != out.dtype)
    return shape_error("avg_pool_2d output mismatch");
  if (input.dtype == DType::I8 && input.quant != out.quant)
    return Status(ErrCode::QuantMismatch, "avg_pool_2d requires equal input/output quant params");

  if (input.dtype == DType::F32) {
    pool_windows(input.shape, out.shape, params,
                 [&](uint32_t n, uint32_t oy, uint32_t ox, uint32_t c, int32_t y0, int32_t y1,
                     int32_t x0, int32_t x1) {
                   float sum = 0.0f;
                   for (int32_t y = y0; y < y1; ++y)
                     for (int32_t x = x0; x < x1; ++x)
                       sum += input.f32()[at4(input.shape, n, y, x, c)];
                   const int32_t count = (y1 - y0) * (x1 - x0);
                   out.f32()[at4(out.shape, n, oy, ox, c)] = sum / static_cast<float>(count);
                 });
    return Status{};
  }
  if (input.dtype == DType::I8) {
    pool_windows(input.shape, out.shape, params,
                 [&](uint32_t n, uint32_t oy, uint32_t ox, uint32_t c, int32_t y0, int32_t y1,
                     int32_t x0, int32_t x1) {
                   int32_t sum = 0;
                   for (int32_t y = y0; y < y1; ++y)
                     for (int32_t x = x0; x < x1; ++x)
                       sum += input.i8()[at4(input.shape, n, y, x, c)];
                   const int32_t count = (y1 - y0) * (x1 - x0);
                   const int64_t q = std::llround(static_cast<double>(sum) / count);
                   out.i8()[at4(out.shape, n, oy, ox, c)] = saturate(q, -128);
                 });
    return Status{};
  }
  return shape_error("avg_pool_2d dtype unsupported");
}

namespace {

void softmax_row_f32(const float* in, float* out, size_t n) {
  float max_v = in[0];
  for (size_t i = 1; i < n; ++i) max_v = std::max(max_v, in[i]);
  float sum = 0.0f;
  for (size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - max_v);
    sum += out[i];
  }
  for (size_t i = 0; i < n; ++i) out[i] /= sum;
}

}  // namespace

Status softmax(const ConstTensor& input, const OpParams& params, MutTensor& out,
               std::span<uint8_t> scratch) {
  auto shape = compute_output_shape(Opcode::SOFTMAX, std::array{input.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape)) return shape_error("softmax output shape mismatch");

  const size_t row = input.shape.dim(input.shape.rank() - 1);
  const size_t rows = input.elem_count() / row;

  if (input.dtype == DType::F32 && out.dtype == DType::F32) {
    for (size_t r = 0; r < rows; ++r)
      softmax_row_f32(input.f32() + r * row, out.f32() + r * row, row);
    return Status{};
  }

  if (input.dtype == DType::I8 && out.dtype == DType::I8 && input.quant && out.quant) {
    assert(scratch.size() >= input.elem_count() * sizeof(float) &&
           "i8 softmax needs a float staging buffer");
    float* stage = reinterpret_cast<float*>(scratch.data());
    const QuantParams in_q = *input.quant;
    for (size_t i = 0; i < input.elem_count(); ++i)
      stage[i] = in_q.scale * static_cast<float>(input.i8()[i] - in_q.zero_point);
    for (size_t r = 0; r < rows; ++r) softmax_row_f32(stage + r * row, stage + r * row, row);
    for (size_t i = 0; i < input.elem_count(); ++i)
      out.i8()[i] = quantize_value(stage[i], *out.quant);
    return Status{};
  }

  return shape_error("softmax dtype combination unsupported");
}

Status relu(const ConstTensor& input, MutTensor& out) {
  if (!(input.shape == out.shape) || input.dtype != out.dtype)
    return shape_error("relu output mismatch");
  if (input.dtype == DType::F32) {
    for (size_t i = 0; i < input.elem_count(); ++i) out.f32()[i] = std::max(input.f32()[i], 0.0f);
    return Status{};
  }
  if (input.dtype == DType::I8) {
    if (!input.quant || input.quant != out.quant)
      return Status(ErrCode::QuantMismatch, "relu preserves quant params");
    const int8_t zp = static_cast<int8_t>(input.quant->zero_point);
    for (size_t i = 0; i < input.elem_count(); ++i) out.i8()[i] = std::max(input.i8()[i], zp);
    return Status{};
  }
  return shape_error("relu dtype unsupported");
}

Status add(const ConstTensor& a, const ConstTensor& b, const OpParams& params, MutTensor& out) {
  if (!(a.shape == b.shape) || !(a.shape == out.shape))
    return shape_error("add requires equal shapes (no broadcasting)");
  if (a.dtype == DType::F32 && b.dtype == DType::F32 && out.dtype == DType::F32) {
    for (size_t i = 0; i < a.elem_count(); ++i)
      out.f32()[i] = apply_activation(a.f32()[i] + b.f32()[i], params.activation);
    return Status{};
  }
  if (a.dtype == DType::I8 && b.dtype == DType::I8 && out.dtype == DType::I8 && a.quant &&
      b.quant && out.quant) {
    const int32_t lo = clamp_floor(params.activation, out.quant->zero_point);
    for (size_t i = 0; i < a.elem_count(); ++i) {
      const double real = static_cast<double>(a.quant->scale) * (a.i8()[i] - a.quant->zero_point) +
                          static_cast<double>(b.quant->scale) * (b.i8()[i] - b.quant->zero_point);
      const int64_t q = std::llround(real / out.quant->scale) + out.quant->zero_point;
      out.i8()[i] = saturate(q, lo);
    }
    return Status{};
  }
  return shape_error("add dtype combination unsupported");
}

Status reshape(const ConstTensor& input, const OpParams& params, MutTensor& out) {
  auto shape = compute_output_shape(Opcode::RESHAPE, std::array{input.shape}, params);
  if (!shape.ok()) return shape.status();
  if (!(shape.value() == out.shape) || input.dtype != out.dtype)
    return shape_error("reshape output mismatch");
  std::copy(input.data.begin(), input.data.end(), out.data.begin());
  return Status{};
}

}  // namespace mico::kernels
