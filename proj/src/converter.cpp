#include "mico/converter.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "mico/interpreter.hpp"
#include "mico/kernels.hpp"
#include "mico/model_json.hpp"
#include "mico/planner.hpp"
#include "mico/registry.hpp"

namespace mico {

namespace {

Result<Shape> parse_shape_list(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array())
    return Result<Shape>(ErrCode::ParseError, what + " must be an array of extents");
  std::vector<uint32_t> dims;
  for (const auto& d : j) {
    if (!d.is_number_integer() || d.get<int64_t>() <= 0)
      return Result<Shape>(ErrCode::ParseError, what + " extents must be positive integers");
    dims.push_back(d.get<uint32_t>());
  }
  auto s = Shape::from(dims);
  if (!s.ok()) return Result<Shape>(ErrCode::ParseError, what + ": " + s.error().message);
  return s;
}

Result<std::vector<uint8_t>> encode_data_array(const nlohmann::json& j, DType dtype,
                                               const std::string& name) {
  using R = Result<std::vector<uint8_t>>;
  if (!j.is_array()) return R(ErrCode::ParseError, "tensor \"" + name + "\" data must be an array");
  std::vector<uint8_t> bytes;
  bytes.reserve(j.size() * dtype_size(dtype));
  for (const auto& v : j) {
    if (!v.is_number()) return R(ErrCode::ParseError, "tensor \"" + name + "\" data must be numeric");
    switch (dtype) {
      case DType::F32: {
        const float f = v.get<float>();
        const auto* p = reinterpret_cast<const uint8_t*>(&f);
        bytes.insert(bytes.end(), p, p + 4);
        break;
      }
      case DType::I8: {
        const int64_t i = v.get<int64_t>();
        if (i < -128 || i > 127)
          return R(ErrCode::ParseError, "tensor \"" + name + "\" i8 value out of range");
        bytes.push_back(static_cast<uint8_t>(static_cast<int8_t>(i)));
        break;
      }
      case DType::I32: {
        const int32_t i = v.get<int32_t>();
        const auto* p = reinterpret_cast<const uint8_t*>(&i);
        bytes.insert(bytes.end(), p, p + 4);
        break;
      }
    }
  }
  return bytes;
}

struct PendingTensor {
  TensorSpec spec;
  bool has_shape = false;
  bool is_const = false;
  std::vector<uint8_t> data;
};

Result<OpParams> parse_params(const nlohmann::json& oj) {
  using R = Result<OpParams>;
  OpParams p;
  if (!oj.contains("params")) return p;
  const auto& pj = oj.at("params");
  if (!pj.is_object()) return R(ErrCode::ParseError, "params must be an object");
  for (const auto& [key, value] : pj.items()) {
    if (key == "stride") {
      if (!value.is_array() || value.size() != 2)
        return R(ErrCode::ParseError, "stride must be [h, w]");
      p.stride_h = value[0].get<int32_t>();
      p.stride_w = value[1].get<int32_t>();
    } else if (key == "window") {
      if (!value.is_array() || value.size() != 2)
        return R(ErrCode::ParseError, "window must be [h, w]");
      p.filter_h = value[0].get<int32_t>();
      p.filter_w = value[1].get<int32_t>();
    } else if (key == "padding") {
      const std::string s = value.get<std::string>();
      if (s == "same") p.padding = Padding::SAME;
      else if (s == "valid") p.padding = Padding::VALID;
      else return R(ErrCode::ParseError, "padding must be \"same\" or \"valid\"");
    } else if (key == "activation") {
      const std::string s = value.get<std::string>();
      if (s == "relu") p.activation = Activation::RELU;
      else if (s == "none") p.activation = Activation::NONE;
      else return R(ErrCode::ParseError, "activation must be \"none\" or \"relu\"");
    } else if (key == "depth_multiplier") {
      p.depth_multiplier = value.get<int32_t>();
    } else if (key == "axis") {
      p.axis = value.get<int32_t>();
    } else if (key == "new_shape") {
      auto s = parse_shape_list(value, "new_shape");
      if (!s.ok()) return s.error();
      p.new_shape = s.value();
    } else {
      return R(ErrCode::ParseError, "unknown param \"" + key + "\"");
    }
  }
  return p;
}

}  // namespace

Result<Model> graph_build_text(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    return Result<Model>(ErrCode::ParseError, "graph spec is not valid JSON");
  return graph_build(j);
}

Result<Model> graph_build(const nlohmann::json& spec) {
  using R = Result<Model>;
  try {
    std::vector<PendingTensor> tensors;
    std::map<std::string, uint32_t> index_of;

    auto add_tensor = [&](PendingTensor t) -> Result<uint32_t> {
      if (index_of.count(t.spec.name))
        return Result<uint32_t>(ErrCode::ParseError,
                                "duplicate tensor name \"" + t.spec.name + "\"");
      const auto idx = static_cast<uint32_t>(tensors.size());
      index_of[t.spec.name] = idx;
      tensors.push_back(std::move(t));
      return idx;
    };

    if (spec.contains("tensors")) {
      for (const auto& tj : spec.at("tensors")) {
        PendingTensor t;
        t.spec.name = tj.at("name").get<std::string>();
        if (tj.contains("dtype")) {
          auto dtype = dtype_from_name(tj.at("dtype").get<std::string>());
          if (!dtype) return R(ErrCode::ParseError, "unknown dtype in \"" + t.spec.name + "\"");
          t.spec.dtype = *dtype;
        }
        if (tj.contains("shape")) {
          auto s = parse_shape_list(tj.at("shape"), "tensor \"" + t.spec.name + "\" shape");
          if (!s.ok()) return s.error();
          t.spec.shape = s.value();
          t.has_shape = true;
        }
        if (tj.contains("quant"))
          t.spec.quant = QuantParams{tj.at("quant").at("scale").get<float>(),
                                     tj.at("quant").at("zero_point").get<int32_t>()};
        if (tj.contains("data") && tj.contains("data_b64"))
          return R(ErrCode::ParseError, "tensor \"" + t.spec.name + "\" has both data forms");
        if (tj.contains("data")) {
          auto bytes = encode_data_array(tj.at("data"), t.spec.dtype, t.spec.name);
          if (!bytes.ok()) return bytes.error();
          t.data = bytes.take();
          t.is_const = true;
        } else if (tj.contains("data_b64")) {
          auto bytes = base64_decode(tj.at("data_b64").get<std::string>());
          if (!bytes.ok()) return bytes.error();
          t.data = bytes.take();
          t.is_const = true;
        }
        if (t.is_const) {
          if (!t.has_shape)
            return R(ErrCode::ParseError, "const tensor \"" + t.spec.name + "\" needs a shape");
          if (t.data.size() != t.spec.byte_size())
            return R(ErrCode::ParseError,
                     "const tensor \"" + t.spec.name + "\" data is " +
                         std::to_string(t.data.size()) + " bytes, shape needs " +
                         std::to_string(t.spec.byte_size()));
        }
        auto added = add_tensor(std::move(t));
        if (!added.ok()) return added.error();
      }
    }

    std::vector<std::string> input_names, output_names;
    if (spec.contains("inputs")) input_names = spec.at("inputs").get<std::vector<std::string>>();
    if (spec.contains("outputs")) output_names = spec.at("outputs").get<std::vector<std::string>>();

    // Assign roles to declared tensors before walking ops so availability
    // checks can rely on them. Implicit tensors get a role at creation.
    for (auto& t : tensors) {
      const bool is_input = std::count(input_names.begin(), input_names.end(), t.spec.name) > 0;
      const bool is_output = std::count(output_names.begin(), output_names.end(), t.spec.name) > 0;
      if (t.is_const && (is_input || is_output))
        return R(ErrCode::ParseError, "const tensor \"" + t.spec.name + "\" cannot be model I/O");
      if (is_input && is_output)
        return R(ErrCode::ParseError, "tensor \"" + t.spec.name + "\" is both input and output");
      if (t.is_const) t.spec.role = TensorRole::Const;
      else if (is_input) t.spec.role = TensorRole::ModelInput;
      else if (is_output) t.spec.role = TensorRole::ModelOutput;
      else t.spec.role = TensorRole::Intermediate;
      if (is_input && !t.has_shape)
        return R(ErrCode::ParseError, "model input \"" + t.spec.name + "\" needs a shape");
    }
    for (const auto& name : input_names)
      if (!index_of.count(name)) return R(ErrCode::ParseError, "unknown model input \"" + name + "\"");

    Model model;
    std::vector<bool> produced(tensors.size(), false);

    if (!spec.contains("ops")) return R(ErrCode::ParseError, "graph spec has no ops");

    // Names produced by any op, for telling "consumed too early" apart from
    // "never defined at all".
    std::vector<std::string> produced_somewhere;
    for (const auto& oj : spec.at("ops"))
      for (const auto& name : oj.at("outputs").get<std::vector<std::string>>())
        produced_somewhere.push_back(name);
    for (const auto& oj : spec.at("ops")) {
      OpEntry op;
      const std::string op_name = oj.at("op").get<std::string>();
      auto opcode = opcode_from_name(op_name);
      if (!opcode) return R(ErrCode::UnknownOpcode, "unknown op \"" + op_name + "\"");
      op.opcode = *opcode;
      auto params = parse_params(oj);
      if (!params.ok()) return params.error();
      op.params = params.value();

      std::vector<Shape> input_shapes;
      for (const auto& name : oj.at("inputs").get<std::vector<std::string>>()) {
        auto it = index_of.find(name);
        if (it == index_of.end()) {
          if (std::count(produced_somewhere.begin(), produced_somewhere.end(), name) > 0)
            return R(ErrCode::CycleOrOrderError,
                     "op \"" + op_name + "\" consumes \"" + name + "\" before it is produced");
          return R(ErrCode::ParseError, "op \"" + op_name + "\" consumes unknown tensor \"" +
                                            name + "\"");
        }
        PendingTensor& t = tensors[it->second];
        const bool available = t.spec.role == TensorRole::Const ||
                               t.spec.role == TensorRole::ModelInput || produced[it->second];
        if (!available)
          return R(ErrCode::CycleOrOrderError,
                   "op \"" + op_name + "\" consumes \"" + name + "\" before it is produced");
        if (!t.has_shape)
          return R(ErrCode::ShapeInferenceError, "tensor \"" + name + "\" has no shape");
        input_shapes.push_back(t.spec.shape);
        op.inputs.push_back(it->second);
      }

      auto inferred = kernels::compute_output_shape(op.opcode, input_shapes, op.params);
      if (!inferred.ok())
        return R(ErrCode::ShapeInferenceError, "op \"" + op_name + "\": " + inferred.error().message);

      for (const auto& name : oj.at("outputs").get<std::vector<std::string>>()) {
        auto it = index_of.find(name);
        uint32_t idx;
        if (it == index_of.end()) {
          // Implicit tensor: inferred shape, dtype of the first input.
          PendingTensor t;
          t.spec.name = name;
          t.spec.dtype = tensors[op.inputs.at(0)].spec.dtype;
          t.spec.role = std::count(output_names.begin(), output_names.end(), name) > 0
                            ? TensorRole::ModelOutput
                            : TensorRole::Intermediate;
          t.spec.shape = inferred.value();
          t.has_shape = true;
          auto added = add_tensor(std::move(t));
          if (!added.ok()) return added.error();
          idx = added.value();
          produced.push_back(false);
        } else {
          idx = it->second;
          PendingTensor& t = tensors[idx];
          if (t.spec.role == TensorRole::Const || t.spec.role == TensorRole::ModelInput)
            return R(ErrCode::ParseError,
                     "op \"" + op_name + "\" writes " + tensor_role_name(t.spec.role) +
                         " tensor \"" + name + "\"");
          if (produced[idx])
            return R(ErrCode::CycleOrOrderError, "tensor \"" + name + "\" produced twice");
          if (t.has_shape && !(t.spec.shape == inferred.value()))
            return R(ErrCode::ShapeInferenceError,
                     "tensor \"" + name + "\" declared " + t.spec.shape.to_string() +
                         " but op \"" + op_name + "\" produces " + inferred.value().to_string());
          t.spec.shape = inferred.value();
          t.has_shape = true;
        }
        produced[idx] = true;
        op.outputs.push_back(idx);
      }
      model.ops.push_back(std::move(op));
    }

    for (auto& t : tensors) {
      if (t.is_const) {
        t.spec.buffer_index = static_cast<uint32_t>(model.buffers.size());
        model.buffers.emplace_back(std::move(t.data));
      }
      if (!t.has_shape)
        return R(ErrCode::ShapeInferenceError,
                 "tensor \"" + t.spec.name + "\" is never produced and has no shape");
      model.tensors.push_back(std::move(t.spec));
    }
    for (const auto& name : input_names) model.inputs.push_back(index_of.at(name));
    for (const auto& name : output_names) {
      if (!index_of.count(name))
        return R(ErrCode::ParseError, "unknown model output \"" + name + "\"");
      model.outputs.push_back(index_of.at(name));
    }

    auto report = validate_model(model);
    if (!report.ok())
      return R(ErrCode::InvalidModel, "built model failed validation: " +
                                          report.violations.front().code + " (" +
                                          report.violations.front().detail + ")");
    return model;
  } catch (const nlohmann::json::exception& e) {
    return R(ErrCode::ParseError, std::string("graph spec: ") + e.what());
  }
}

namespace {

// Direct host-side evaluation of an all-F32 model, used for calibration.
// Tensor storage is plain heap memory; const data is read in place.
class ReferenceRunner {
 public:
  explicit ReferenceRunner(const Model& model) : model_(model) {
    storage_.resize(model.tensors.size());
    for (size_t i = 0; i < model.tensors.size(); ++i)
      if (model.tensors[i].role != TensorRole::Const)
        storage_[i].resize(model.tensors[i].byte_size());
  }

  std::span<uint8_t> tensor_bytes(uint32_t idx) { return storage_[idx]; }

  ConstTensor view(uint32_t idx) const {
    const TensorSpec& t = model_.tensors[idx];
    std::span<const uint8_t> data = t.role == TensorRole::Const
                                        ? model_.buffers[t.buffer_index].bytes()
                                        : std::span<const uint8_t>(storage_[idx]);
    return ConstTensor{t.dtype, t.shape, t.quant, data};
  }

  MutTensor mut_view(uint32_t idx) {
    const TensorSpec& t = model_.tensors[idx];
    return MutTensor{t.dtype, t.shape, t.quant, storage_[idx]};
  }

  Status run() {
    for (const OpEntry& op : model_.ops) {
      auto in = [&](size_t i) { return view(op.inputs[i]); };
      MutTensor out = mut_view(op.outputs[0]);
      Status s;
      switch (op.opcode) {
        case Opcode::CONV_2D: s = kernels::conv_2d(in(0), in(1), in(2), op.params, out); break;
        case Opcode::DEPTHWISE_CONV_2D:
          s = kernels::depthwise_conv_2d(in(0), in(1), in(2), op.params, out);
          break;
        case Opcode::FULLY_CONNECTED:
          s = kernels::fully_connected(in(0), in(1), in(2), op.params, out);
          break;
        case Opcode::MAX_POOL_2D: s = kernels::max_pool_2d(in(0), op.params, out); break;
        case Opcode::AVG_POOL_2D: s = kernels::avg_pool_2d(in(0), op.params, out); break;
        case Opcode::SOFTMAX: s = kernels::softmax(in(0), op.params, out); break;
        case Opcode::RELU: s = kernels::relu(in(0), out); break;
        case Opcode::ADD: s = kernels::add(in(0), in(1), op.params, out); break;
        case Opcode::RESHAPE: s = kernels::reshape(in(0), op.params, out); break;
        default:
          return Status(ErrCode::UnsupportedOp,
                        std::string(opcode_name(op.opcode)) + " not supported in calibration");
      }
      MICO_RETURN_IF_ERROR(s);
    }
    return Status{};
  }

 private:
  const Model& model_;
  std::vector<std::vector<uint8_t>> storage_;
};

struct Range {
  float lo = 0.0f;  // ranges always include 0
  float hi = 0.0f;

  void observe(float v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

QuantParams affine_from_range(const Range& r) {
  const float spread = r.hi - r.lo;
  if (!(spread > 0.0f)) return QuantParams{1.0f, 0};  // degenerate range
  const float scale = spread / 255.0f;
  const auto zp = static_cast<int32_t>(
      std::clamp<long>(std::lround(-128.0 - r.lo / scale), -128, 127));
  return QuantParams{scale, zp};
}

bool quant_passthrough(Opcode op) {
  return op == Opcode::MAX_POOL_2D || op == Opcode::AVG_POOL_2D || op == Opcode::RELU ||
         op == Opcode::RESHAPE;
}

}  // namespace

Result<Model> quantize_post_training(const Model& model,
                                     std::span<const std::vector<float>> calibration) {
  using R = Result<Model>;
  auto report = validate_model(model);
  if (!report.ok())
    return R(ErrCode::InvalidModel, "model failed validation: " + report.violations.front().code);
  if (calibration.empty()) return R(ErrCode::EmptyCalibration, "no calibration inputs");
  if (model.inputs.size() != 1)
    return R(ErrCode::UnsupportedOp, "calibration covers single-input models");

  for (const TensorSpec& t : model.tensors)
    if (t.dtype != DType::F32)
      return R(ErrCode::UnsupportedOp, "tensor \"" + t.name + "\" is not F32");
  for (const OpEntry& op : model.ops)
    if (op.opcode == Opcode::QUANTIZE || op.opcode == Opcode::DEQUANTIZE)
      return R(ErrCode::UnsupportedOp,
               std::string(opcode_name(op.opcode)) + " cannot appear in a model being quantized");

  // Identify bias tensors: const operands in the bias position of a conv or
  // dense op. Their quantized scale is tied to the consuming op.
  std::vector<int32_t> bias_consumer(model.tensors.size(), -1);
  for (size_t i = 0; i < model.ops.size(); ++i) {
    const OpEntry& op = model.ops[i];
    const bool has_bias = op.opcode == Opcode::CONV_2D || op.opcode == Opcode::DEPTHWISE_CONV_2D ||
                          op.opcode == Opcode::FULLY_CONNECTED;
    if (!has_bias) continue;
    const uint32_t bias_idx = op.inputs[2];
    if (bias_consumer[bias_idx] >= 0)
      return R(ErrCode::UnsupportedOp,
               "bias tensor \"" + model.tensors[bias_idx].name + "\" is shared between ops");
    bias_consumer[bias_idx] = static_cast<int32_t>(i);
  }
  for (size_t i = 0; i < model.ops.size(); ++i)
    for (size_t pos = 0; pos < model.ops[i].inputs.size(); ++pos) {
      const uint32_t idx = model.ops[i].inputs[pos];
      if (bias_consumer[idx] >= 0 &&
          !(pos == 2 && bias_consumer[idx] == static_cast<int32_t>(i)))
        return R(ErrCode::UnsupportedOp,
                 "bias tensor \"" + model.tensors[idx].name + "\" is also used as data");
    }

  // Observe activation ranges across all calibration runs.
  const uint32_t input_idx = model.inputs[0];
  const size_t input_elems = model.tensors[input_idx].shape.elem_count();
  std::vector<Range> range(model.tensors.size());
  for (const auto& sample : calibration) {
    if (sample.size() != input_elems)
      return R(ErrCode::ShapeMismatch, "calibration input has " + std::to_string(sample.size()) +
                                           " elements, model input needs " +
                                           std::to_string(input_elems));
    ReferenceRunner runner(model);
    std::memcpy(runner.tensor_bytes(input_idx).data(), sample.data(), sample.size() * 4);
    Status run_status = runner.run();
    if (!run_status.ok()) return run_status.error();
    for (size_t t = 0; t < model.tensors.size(); ++t) {
      if (model.tensors[t].role == TensorRole::Const) continue;
      const ConstTensor v = runner.view(static_cast<uint32_t>(t));
      for (size_t i = 0; i < v.elem_count(); ++i) range[t].observe(v.f32()[i]);
    }
  }
  // Weights use their own value range.
  for (size_t t = 0; t < model.tensors.size(); ++t) {
    if (model.tensors[t].role != TensorRole::Const || bias_consumer[t] >= 0) continue;
    const auto bytes = model.buffers[model.tensors[t].buffer_index].bytes();
    const auto* f = reinterpret_cast<const float*>(bytes.data());
    for (size_t i = 0; i < bytes.size() / 4; ++i) range[t].observe(f[i]);
  }

  std::vector<QuantParams> qp(model.tensors.size());
  for (size_t t = 0; t < model.tensors.size(); ++t)
    if (bias_consumer[t] < 0) qp[t] = affine_from_range(range[t]);
  // Structural overrides, in op order so propagated params are final.
  for (const OpEntry& op : model.ops) {
    if (quant_passthrough(op.opcode)) qp[op.outputs[0]] = qp[op.inputs[0]];
    if (op.opcode == Opcode::SOFTMAX) qp[op.outputs[0]] = QuantParams{1.0f / 256.0f, -128};
  }
  // Bias scales depend on the (final) input and weight scales.
  for (size_t t = 0; t < model.tensors.size(); ++t)
    if (bias_consumer[t] >= 0) {
      const OpEntry& op = model.ops[bias_consumer[t]];
      qp[t] = QuantParams{qp[op.inputs[0]].scale * qp[op.inputs[1]].scale, 0};
    }

  // Emit the quantized model: I8 data tensors, I32 biases, requantized blobs.
  Model out = model;
  out.buffers.clear();
  for (size_t t = 0; t < out.tensors.size(); ++t) {
    TensorSpec& spec = out.tensors[t];
    const bool is_bias = bias_consumer[t] >= 0;
    spec.dtype = is_bias ? DType::I32 : DType::I8;
    spec.quant = qp[t];
    if (spec.role != TensorRole::Const) continue;
    const auto bytes = model.buffers[model.tensors[t].buffer_index].bytes();
    const auto* f = reinterpret_cast<const float*>(bytes.data());
    const size_t n = bytes.size() / 4;
    std::vector<uint8_t> blob;
    if (is_bias) {
      blob.resize(n * 4);
      auto* q = reinterpret_cast<int32_t*>(blob.data());
      for (size_t i = 0; i < n; ++i)
        q[i] = static_cast<int32_t>(
            std::clamp<double>(std::llround(f[i] / static_cast<double>(qp[t].scale)),
                               std::numeric_limits<int32_t>::min(),
                               std::numeric_limits<int32_t>::max()));
    } else {
      blob.resize(n);
      auto* q = reinterpret_cast<int8_t*>(blob.data());
      for (size_t i = 0; i < n; ++i) q[i] = kernels::quantize_value(f[i], qp[t]);
    }
    spec.buffer_index = static_cast<uint32_t>(out.buffers.size());
    out.buffers.emplace_back(std::move(blob));
  }

  auto out_report = validate_model(out);
  if (!out_report.ok())
    return R(ErrCode::InvalidModel,
             "quantized model failed validation: " + out_report.violations.front().code);
  return out;
}

Result<Model> attach_offline_plan(const Model& model, size_t alignment) {
  using R = Result<Model>;
  auto report = validate_model(model);
  if (!report.ok())
    return R(ErrCode::InvalidModel, "model failed validation: " + report.violations.front().code);

  const Registry registry = Registry::with_reference_kernels();
  auto prepared = prepare_model(model, registry);
  if (!prepared.ok()) return prepared.error();
  const RequestSet rs = build_requests(model, prepared.value());
  const MemoryPlan plan = plan_greedy(rs.requests, alignment);
  std::vector<uint8_t> blob = encode_offline_plan(plan);

  Model out = model;
  for (auto& [key, value] : out.metadata)
    if (key == kOfflinePlanKey) {
      value = ConstBlob(std::move(blob));
      return out;
    }
  out.metadata.emplace_back(kOfflinePlanKey, ConstBlob(std::move(blob)));
  return out;
}

}  // namespace mico
