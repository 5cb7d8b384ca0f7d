#include "mico/model.hpp"

#include <cmath>
#include <string>

namespace mico {

const char* tensor_role_name(TensorRole role) {
  switch (role) {
    case TensorRole::Const: return "const";
    case TensorRole::ModelInput: return "input";
    case TensorRole::ModelOutput: return "output";
    case TensorRole::Intermediate: return "intermediate";
  }
  return "?";
}

std::optional<std::span<const uint8_t>> get_metadata(const Model& model, const std::string& key) {
  for (const auto& [k, blob] : model.metadata)
    if (k == key) return blob.bytes();
  return std::nullopt;
}

namespace {

bool is_bias_position(const OpEntry& op, size_t input_pos) {
  switch (op.opcode) {
    case Opcode::CONV_2D:
    case Opcode::DEPTHWISE_CONV_2D:
    case Opcode::FULLY_CONNECTED:
      return input_pos == 2;
    default:
      return false;
  }
}

std::string tensor_ref(const Model& m, uint32_t idx) {
  return "tensor " + std::to_string(idx) + " (" + m.tensors[idx].name + ")";
}

}  // namespace

ValidationReport validate_model(const Model& model) {
  ValidationReport report;
  auto flag = [&report](std::string code, std::string detail) {
    report.violations.push_back({std::move(code), std::move(detail)});
  };

  if (model.version != 1)
    flag("bad-version", "model version " + std::to_string(model.version));

  const size_t n_tensors = model.tensors.size();

  for (size_t i = 0; i < n_tensors; ++i) {
    const TensorSpec& t = model.tensors[i];
    const std::string ref = tensor_ref(model, static_cast<uint32_t>(i));
    if (t.shape.rank() == 0 || t.shape.rank() > kMaxRank)
      flag("bad-shape", ref + " has rank " + std::to_string(t.shape.rank()));
    for (uint32_t d : t.shape.dims())
      if (d == 0) flag("bad-shape", ref + " has a zero extent");
    if (t.quant) {
      if (!(t.quant->scale > 0.0f) || !std::isfinite(t.quant->scale))
        flag("bad-quant", ref + " scale must be positive and finite");
      if (t.dtype == DType::I8 && (t.quant->zero_point < -128 || t.quant->zero_point > 127))
        flag("bad-quant", ref + " zero point outside [-128, 127]");
      if (t.dtype == DType::I32 && t.quant->zero_point != 0)
        flag("bad-quant", ref + " bias zero point must be 0");
      if (t.dtype == DType::F32)
        flag("bad-quant", ref + " is F32 and must not carry quant params");
    } else if (t.dtype == DType::I8) {
      flag("bad-quant", ref + " is I8 and must carry quant params");
    }
    if (t.role == TensorRole::Const) {
      if (t.buffer_index >= model.buffers.size()) {
        flag("bad-buffer", ref + " references buffer " + std::to_string(t.buffer_index) +
                               " of " + std::to_string(model.buffers.size()));
      } else if (model.buffers[t.buffer_index].size() != t.byte_size()) {
        flag("bad-buffer", ref + " needs " + std::to_string(t.byte_size()) +
                               " bytes but buffer " + std::to_string(t.buffer_index) + " holds " +
                               std::to_string(model.buffers[t.buffer_index].size()));
      }
    }
  }

  // Producer map and topological-order checks over the op list.
  std::vector<int32_t> producer(n_tensors, -1);
  for (size_t op_idx = 0; op_idx < model.ops.size(); ++op_idx) {
    const OpEntry& op = model.ops[op_idx];
    const std::string op_ref = "op " + std::to_string(op_idx) + " (" + opcode_name(op.opcode) + ")";

    if (op.params.stride_h < 1 || op.params.stride_w < 1)
      flag("bad-params", op_ref + " stride must be >= 1");
    if (op.params.filter_h < 1 || op.params.filter_w < 1)
      flag("bad-params", op_ref + " filter extent must be >= 1");
    if (op.params.depth_multiplier < 1)
      flag("bad-params", op_ref + " depth multiplier must be >= 1");

    for (size_t pos = 0; pos < op.inputs.size(); ++pos) {
      const uint32_t idx = op.inputs[pos];
      if (idx >= n_tensors) {
        flag("bad-index", op_ref + " input " + std::to_string(idx) + " out of range");
        continue;
      }
      const TensorSpec& t = model.tensors[idx];
      if (t.dtype == DType::I32 && !is_bias_position(op, pos))
        flag("i32-misuse", op_ref + " consumes I32 " + tensor_ref(model, idx) +
                               " outside a bias position");
      switch (t.role) {
        case TensorRole::Const:
        case TensorRole::ModelInput:
          break;
        case TensorRole::ModelOutput:
        case TensorRole::Intermediate:
          if (producer[idx] < 0)
            flag("use-before-def", op_ref + " consumes " + tensor_ref(model, idx) +
                                       " before any producer");
          break;
      }
    }
    for (uint32_t idx : op.outputs) {
      if (idx >= n_tensors) {
        flag("bad-index", op_ref + " output " + std::to_string(idx) + " out of range");
        continue;
      }
      const TensorSpec& t = model.tensors[idx];
      if (t.role != TensorRole::Intermediate && t.role != TensorRole::ModelOutput)
        flag("bad-output-role", op_ref + " writes " + tensor_ref(model, idx) + " with role " +
                                    tensor_role_name(t.role));
      if (producer[idx] >= 0)
        flag("multiple-producers", tensor_ref(model, idx) + " written by ops " +
                                       std::to_string(producer[idx]) + " and " +
                                       std::to_string(op_idx));
      producer[idx] = static_cast<int32_t>(op_idx);
    }
  }

  for (uint32_t idx : model.inputs) {
    if (idx >= n_tensors)
      flag("bad-index", "model input index " + std::to_string(idx) + " out of range");
    else if (model.tensors[idx].role != TensorRole::ModelInput)
      flag("bad-io-role", tensor_ref(model, idx) + " listed as model input with role " +
                              tensor_role_name(model.tensors[idx].role));
  }
  for (uint32_t idx : model.outputs) {
    if (idx >= n_tensors) {
      flag("bad-index", "model output index " + std::to_string(idx) + " out of range");
    } else {
      if (model.tensors[idx].role != TensorRole::ModelOutput)
        flag("bad-io-role", tensor_ref(model, idx) + " listed as model output with role " +
                                tensor_role_name(model.tensors[idx].role));
      if (producer[idx] < 0)
        flag("unproduced-output", tensor_ref(model, idx) + " is never written by any op");
    }
  }

  for (size_t i = 0; i < model.metadata.size(); ++i)
    for (size_t j = i + 1; j < model.metadata.size(); ++j)
      if (model.metadata[i].first == model.metadata[j].first)
        flag("duplicate-metadata", "key \"" + model.metadata[i].first + "\"");

  if (auto blob = get_metadata(model, kOfflinePlanKey)) {
    if (blob->size() < 4) {
      flag("bad-offline-plan", "offline plan blob shorter than its count");
    } else {
      uint32_t count = 0;
      for (int b = 0; b < 4; ++b) count |= uint32_t{(*blob)[b]} << (8 * b);
      if (blob->size() != 4 + size_t{count} * 4)
        flag("bad-offline-plan", "offline plan blob length does not match its count");
    }
  }

  return report;
}

}  // namespace mico
