#include "mico/types.hpp"

namespace mico {

const char* dtype_name(DType t) {
  switch (t) {
    case DType::F32: return "f32";
    case DType::I8: return "i8";
    case DType::I32: return "i32";
  }
  return "?";
}

std::optional<DType> dtype_from_name(const std::string& name) {
  if (name == "f32") return DType::F32;
  if (name == "i8") return DType::I8;
  if (name == "i32") return DType::I32;
  return std::nullopt;
}

std::string Shape::to_string() const {
  std::string s = "[";
  for (uint8_t i = 0; i < rank_; ++i) {
    if (i) s += ",";
    s += std::to_string(dims_[i]);
  }
  s += "]";
  return s;
}

namespace {
struct OpcodeName {
  Opcode op;
  const char* upper;  // display / error names
  const char* lower;  // graph-spec names
};
constexpr OpcodeName kOpcodeNames[] = {
    {Opcode::CONV_2D, "CONV_2D", "conv_2d"},
    {Opcode::DEPTHWISE_CONV_2D, "DEPTHWISE_CONV_2D", "depthwise_conv_2d"},
    {Opcode::FULLY_CONNECTED, "FULLY_CONNECTED", "fully_connected"},
    {Opcode::MAX_POOL_2D, "MAX_POOL_2D", "max_pool_2d"},
    {Opcode::AVG_POOL_2D, "AVG_POOL_2D", "avg_pool_2d"},
    {Opcode::SOFTMAX, "SOFTMAX", "softmax"},
    {Opcode::RELU, "RELU", "relu"},
    {Opcode::ADD, "ADD", "add"},
    {Opcode::RESHAPE, "RESHAPE", "reshape"},
    {Opcode::QUANTIZE, "QUANTIZE", "quantize"},
    {Opcode::DEQUANTIZE, "DEQUANTIZE", "dequantize"},
};
}  // namespace

const char* opcode_name(Opcode op) {
  for (const auto& n : kOpcodeNames)
    if (n.op == op) return n.upper;
  return "UNKNOWN";
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  for (const auto& n : kOpcodeNames)
    if (name == n.lower || name == n.upper) return n.op;
  return std::nullopt;
}

}  // namespace mico
