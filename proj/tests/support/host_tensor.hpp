#pragma once

#include <cstring>
#include <optional>
#include <vector>

#include "mico/kernels.hpp"
#include "mico/types.hpp"

namespace mico::test {

// Heap-backed tensor for driving kernels directly in tests.
struct HostTensor {
  DType dtype = DType::F32;
  Shape shape;
  std::optional<QuantParams> quant;
  std::vector<uint8_t> bytes;

  static HostTensor f32(Shape shape, std::vector<float> values) {
    HostTensor t{DType::F32, shape, std::nullopt, {}};
    t.bytes.resize(values.size() * 4);
    std::memcpy(t.bytes.data(), values.data(), t.bytes.size());
    return t;
  }
  static HostTensor i8(Shape shape, std::vector<int8_t> values, QuantParams q) {
    HostTensor t{DType::I8, shape, q, {}};
    t.bytes.assign(values.begin(), values.end());
    return t;
  }
  static HostTensor i32(Shape shape, std::vector<int32_t> values, QuantParams q) {
    HostTensor t{DType::I32, shape, q, {}};
    t.bytes.resize(values.size() * 4);
    std::memcpy(t.bytes.data(), values.data(), t.bytes.size());
    return t;
  }
  static HostTensor zeros(DType dtype, Shape shape, std::optional<QuantParams> q = std::nullopt) {
    HostTensor t{dtype, shape, q, {}};
    t.bytes.assign(shape.elem_count() * dtype_size(dtype), 0);
    return t;
  }

  ConstTensor cview() const { return {dtype, shape, quant, bytes}; }
  MutTensor mview() { return {dtype, shape, quant, bytes}; }

  float* f32s() { return reinterpret_cast<float*>(bytes.data()); }
  const float* f32s() const { return reinterpret_cast<const float*>(bytes.data()); }
  int8_t* i8s() { return reinterpret_cast<int8_t*>(bytes.data()); }
  const int8_t* i8s() const { return reinterpret_cast<const int8_t*>(bytes.data()); }
  int32_t* i32s() { return reinterpret_cast<int32_t*>(bytes.data()); }
  const int32_t* i32s() const { return reinterpret_cast<const int32_t*>(bytes.data()); }
  size_t elem_count() const { return shape.elem_count(); }
};

}  // namespace mico::test
