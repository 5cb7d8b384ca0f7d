#include "mico/model_json.hpp"

namespace mico {

namespace {

constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

const char* padding_name(Padding p) { return p == Padding::SAME ? "SAME" : "VALID"; }
const char* activation_name(Activation a) { return a == Activation::RELU ? "RELU" : "NONE"; }

}  // namespace

std::string base64_encode(std::span<const uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (size_t i = 0; i < bytes.size(); i += 3) {
    uint32_t chunk = uint32_t{bytes[i]} << 16;
    if (i + 1 < bytes.size()) chunk |= uint32_t{bytes[i + 1]} << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out.push_back(kB64Chars[(chunk >> 18) & 63]);
    out.push_back(kB64Chars[(chunk >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kB64Chars[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? kB64Chars[chunk & 63] : '=');
  }
  return out;
}

Result<std::vector<uint8_t>> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0)
    return Result<std::vector<uint8_t>>(ErrCode::ParseError, "base64 length not a multiple of 4");
  std::vector<uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && k >= 2 && i + 4 == text.size()) {
        vals[k] = 0;
        ++pad;
      } else {
        vals[k] = b64_value(c);
        if (vals[k] < 0 || pad > 0)
          return Result<std::vector<uint8_t>>(ErrCode::ParseError, "invalid base64 character");
      }
    }
    const uint32_t chunk = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back(static_cast<uint8_t>(chunk >> 16));
    if (pad < 2) out.push_back(static_cast<uint8_t>(chunk >> 8));
    if (pad < 1) out.push_back(static_cast<uint8_t>(chunk));
  }
  return out;
}

nlohmann::json model_to_json(const Model& model) {
  nlohmann::json j;
  j["version"] = model.version;

  j["tensors"] = nlohmann::json::array();
  for (const TensorSpec& t : model.tensors) {
    nlohmann::json tj;
    tj["name"] = t.name;
    tj["dtype"] = dtype_name(t.dtype);
    tj["shape"] = std::vector<uint32_t>(t.shape.dims().begin(), t.shape.dims().end());
    tj["role"] = tensor_role_name(t.role);
    if (t.role == TensorRole::Const) tj["buffer_index"] = t.buffer_index;
    if (t.quant) tj["quant"] = {{"scale", t.quant->scale}, {"zero_point", t.quant->zero_point}};
    j["tensors"].push_back(std::move(tj));
  }

  j["ops"] = nlohmann::json::array();
  for (const OpEntry& op : model.ops) {
    nlohmann::json oj;
    oj["opcode"] = opcode_name(op.opcode);
    oj["inputs"] = op.inputs;
    oj["outputs"] = op.outputs;
    oj["params"] = {
        {"stride_h", op.params.stride_h},
        {"stride_w", op.params.stride_w},
        {"padding", padding_name(op.params.padding)},
        {"fused_activation", activation_name(op.params.activation)},
        {"filter_h", op.params.filter_h},
        {"filter_w", op.params.filter_w},
        {"depth_multiplier", op.params.depth_multiplier},
        {"axis", op.params.axis},
        {"new_shape", std::vector<uint32_t>(op.params.new_shape.dims().begin(),
                                            op.params.new_shape.dims().end())},
    };
    j["ops"].push_back(std::move(oj));
  }

  j["buffers"] = nlohmann::json::array();
  for (const ConstBlob& b : model.buffers) j["buffers"].push_back(base64_encode(b.bytes()));

  j["inputs"] = model.inputs;
  j["outputs"] = model.outputs;

  j["metadata"] = nlohmann::json::array();
  for (const auto& [key, blob] : model.metadata)
    j["metadata"].push_back({{"key", key}, {"value", base64_encode(blob.bytes())}});

  return j;
}

namespace {

Result<Shape> shape_from_json(const nlohmann::json& j) {
  if (!j.is_array()) return Result<Shape>(ErrCode::ParseError, "shape must be an array");
  std::vector<uint32_t> dims;
  for (const auto& d : j) {
    if (!d.is_number_integer() || d.get<int64_t>() < 0)
      return Result<Shape>(ErrCode::ParseError, "bad shape extent");
    dims.push_back(d.get<uint32_t>());
  }
  auto shape = Shape::from(dims);
  if (!shape.ok()) return Result<Shape>(ErrCode::ParseError, shape.error().message);
  return shape;
}

}  // namespace

Result<Model> model_from_json(const nlohmann::json& j) {
  using R = Result<Model>;
  try {
    Model model;
    model.version = j.at("version").get<uint16_t>();

    for (const auto& tj : j.at("tensors")) {
      TensorSpec t;
      t.name = tj.at("name").get<std::string>();
      auto dtype = dtype_from_name(tj.at("dtype").get<std::string>());
      if (!dtype) return R(ErrCode::ParseError, "unknown dtype in tensor \"" + t.name + "\"");
      t.dtype = *dtype;
      auto shape = shape_from_json(tj.at("shape"));
      if (!shape.ok()) return shape.error();
      t.shape = shape.value();
      const std::string role = tj.at("role").get<std::string>();
      if (role == "const") t.role = TensorRole::Const;
      else if (role == "input") t.role = TensorRole::ModelInput;
      else if (role == "output") t.role = TensorRole::ModelOutput;
      else if (role == "intermediate") t.role = TensorRole::Intermediate;
      else return R(ErrCode::ParseError, "unknown role \"" + role + "\"");
      if (t.role == TensorRole::Const) t.buffer_index = tj.at("buffer_index").get<uint32_t>();
      if (tj.contains("quant"))
        t.quant = QuantParams{tj.at("quant").at("scale").get<float>(),
                              tj.at("quant").at("zero_point").get<int32_t>()};
      model.tensors.push_back(std::move(t));
    }

    for (const auto& oj : j.at("ops")) {
      OpEntry op;
      auto opcode = opcode_from_name(oj.at("opcode").get<std::string>());
      if (!opcode) return R(ErrCode::ParseError, "unknown opcode in op list");
      op.opcode = *opcode;
      op.inputs = oj.at("inputs").get<std::vector<uint32_t>>();
      op.outputs = oj.at("outputs").get<std::vector<uint32_t>>();
      const auto& pj = oj.at("params");
      op.params.stride_h = pj.at("stride_h").get<int32_t>();
      op.params.stride_w = pj.at("stride_w").get<int32_t>();
      const std::string padding = pj.at("padding").get<std::string>();
      if (padding == "SAME") op.params.padding = Padding::SAME;
      else if (padding == "VALID") op.params.padding = Padding::VALID;
      else return R(ErrCode::ParseError, "unknown padding \"" + padding + "\"");
      const std::string act = pj.at("fused_activation").get<std::string>();
      if (act == "NONE") op.params.activation = Activation::NONE;
      else if (act == "RELU") op.params.activation = Activation::RELU;
      else return R(ErrCode::ParseError, "unknown activation \"" + act + "\"");
      op.params.filter_h = pj.at("filter_h").get<int32_t>();
      op.params.filter_w = pj.at("filter_w").get<int32_t>();
      op.params.depth_multiplier = pj.at("depth_multiplier").get<int32_t>();
      op.params.axis = pj.at("axis").get<int32_t>();
      auto new_shape = shape_from_json(pj.at("new_shape"));
      if (!new_shape.ok()) return new_shape.error();
      op.params.new_shape = new_shape.value();
      model.ops.push_back(std::move(op));
    }

    for (const auto& bj : j.at("buffers")) {
      auto bytes = base64_decode(bj.get<std::string>());
      if (!bytes.ok()) return bytes.error();
      model.buffers.emplace_back(bytes.take());
    }

    model.inputs = j.at("inputs").get<std::vector<uint32_t>>();
    model.outputs = j.at("outputs").get<std::vector<uint32_t>>();

    for (const auto& mj : j.at("metadata")) {
      auto bytes = base64_decode(mj.at("value").get<std::string>());
      if (!bytes.ok()) return bytes.error();
      model.metadata.emplace_back(mj.at("key").get<std::string>(), ConstBlob(bytes.take()));
    }

    return model;
  } catch (const nlohmann::json::exception& e) {
    return R(ErrCode::ParseError, std::string("model json: ") + e.what());
  }
}

}  // namespace mico
