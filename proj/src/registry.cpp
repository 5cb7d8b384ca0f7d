#include "mico/registry.hpp"

#include <algorithm>

namespace mico {

Status Registry::add(OpRegistration registration) {
  for (const auto& e : entries_)
    if (e.opcode == registration.opcode)
      return Status(ErrCode::DuplicateOpcode,
                    std::string("opcode ") + opcode_name(registration.opcode) +
                        " already registered");
  entries_.push_back(std::move(registration));
  return Status{};
}

const OpRegistration* Registry::find(Opcode opcode) const {
  for (const auto& e : entries_)
    if (e.opcode == opcode) return &e;
  return nullptr;
}

namespace {

Status fail_shape(const std::string& m) { return Status(ErrCode::ShapeMismatch, m); }

// Declared output shape must match the computed one.
Status check_output_shape(Opcode opcode, PrepareContext& ctx) {
  std::vector<Shape> in;
  for (size_t i = 0; i < ctx.num_inputs(); ++i) in.push_back(ctx.input(i).shape);
  auto computed = kernels::compute_output_shape(opcode, in, ctx.params());
  if (!computed.ok()) return computed.status();
  if (ctx.num_outputs() != 1) return fail_shape("op must have exactly one output");
  if (!(computed.value() == ctx.output(0).shape))
    return fail_shape("declared output shape " + ctx.output(0).shape.to_string() +
                      " does not match computed " + computed.value().to_string());
  return Status{};
}

bool meta_is(const TensorMeta& m, DType t) { return m.dtype == t; }

// F32 path: every operand F32. I8 path: data tensors I8 with quant, bias I32.
Status check_conv_dtypes(PrepareContext& ctx) {
  const TensorMeta& x = ctx.input(0);
  const TensorMeta& w = ctx.input(1);
  const TensorMeta& b = ctx.input(2);
  const TensorMeta& o = ctx.output(0);
  const bool f32 = meta_is(x, DType::F32) && meta_is(w, DType::F32) && meta_is(b, DType::F32) &&
                   meta_is(o, DType::F32);
  const bool i8 = meta_is(x, DType::I8) && meta_is(w, DType::I8) && meta_is(b, DType::I32) &&
                  meta_is(o, DType::I8) && x.quant && w.quant && o.quant;
  if (!f32 && !i8) return fail_shape("operands must be all-F32 or I8 data with I32 bias");
  return Status{};
}

Status check_same_dtype(PrepareContext& ctx) {
  for (size_t i = 0; i < ctx.num_inputs(); ++i)
    if (ctx.input(i).dtype != ctx.output(0).dtype)
      return fail_shape("input and output dtypes must match");
  return Status{};
}

Status check_quant_preserved(PrepareContext& ctx) {
  if (ctx.input(0).dtype != DType::I8) return Status{};
  if (ctx.input(0).quant != ctx.output(0).quant)
    return Status(ErrCode::QuantMismatch, "op requires equal input/output quant params");
  return Status{};
}

EvalFn eval_for(Opcode opcode) {
  switch (opcode) {
    case Opcode::CONV_2D:
      return [](EvalContext& ctx) {
        return kernels::conv_2d(ctx.input(0), ctx.input(1), ctx.input(2), ctx.params(),
                                ctx.output(0));
      };
    case Opcode::DEPTHWISE_CONV_2D:
      return [](EvalContext& ctx) {
        return kernels::depthwise_conv_2d(ctx.input(0), ctx.input(1), ctx.input(2), ctx.params(),
                                          ctx.output(0));
      };
    case Opcode::FULLY_CONNECTED:
      return [](EvalContext& ctx) {
        return kernels::fully_connected(ctx.input(0), ctx.input(1), ctx.input(2), ctx.params(),
                                        ctx.output(0));
      };
    case Opcode::MAX_POOL_2D:
      return [](EvalContext& ctx) {
        return kernels::max_pool_2d(ctx.input(0), ctx.params(), ctx.output(0));
      };
    case Opcode::AVG_POOL_2D:
      return [](EvalContext& ctx) {
        return kernels::avg_pool_2d(ctx.input(0), ctx.params(), ctx.output(0));
      };
    case Opcode::SOFTMAX:
      return [](EvalContext& ctx) {
        std::span<uint8_t> scratch;
        if (ctx.input(0).dtype == DType::I8) scratch = ctx.scratch(0);
        return kernels::softmax(ctx.input(0), ctx.params(), ctx.output(0), scratch);
      };
    case Opcode::RELU:
      return [](EvalContext& ctx) { return kernels::relu(ctx.input(0), ctx.output(0)); };
    case Opcode::ADD:
      return [](EvalContext& ctx) {
        return kernels::add(ctx.input(0), ctx.input(1), ctx.params(), ctx.output(0));
      };
    case Opcode::RESHAPE:
      return [](EvalContext& ctx) {
        return kernels::reshape(ctx.input(0), ctx.params(), ctx.output(0));
      };
    case Opcode::QUANTIZE:
      return [](EvalContext& ctx) { return kernels::quantize(ctx.input(0), ctx.output(0)); };
    case Opcode::DEQUANTIZE:
      return [](EvalContext& ctx) { return kernels::dequantize(ctx.input(0), ctx.output(0)); };
  }
  return nullptr;
}

PrepareFn prepare_for(Opcode opcode) {
  switch (opcode) {
    case Opcode::CONV_2D:
    case Opcode::DEPTHWISE_CONV_2D:
    case Opcode::FULLY_CONNECTED:
      return [opcode](PrepareContext& ctx) {
        if (ctx.num_inputs() != 3) return fail_shape("op takes input, weights, bias");
        MICO_RETURN_IF_ERROR(check_output_shape(opcode, ctx));
        return check_conv_dtypes(ctx);
      };
    case Opcode::MAX_POOL_2D:
    case Opcode::AVG_POOL_2D:
      return [opcode](PrepareContext& ctx) {
        if (ctx.num_inputs() != 1) return fail_shape("pooling takes one input");
        MICO_RETURN_IF_ERROR(check_output_shape(opcode, ctx));
        MICO_RETURN_IF_ERROR(check_same_dtype(ctx));
        return check_quant_preserved(ctx);
      };
    case Opcode::SOFTMAX:
      return [](PrepareContext& ctx) {
        if (ctx.num_inputs() != 1) return fail_shape("softmax takes one input");
        MICO_RETURN_IF_ERROR(check_output_shape(Opcode::SOFTMAX, ctx));
        MICO_RETURN_IF_ERROR(check_same_dtype(ctx));
        // The quantized path stages the tensor through a float buffer.
        if (ctx.input(0).dtype == DType::I8)
          ctx.request_scratch(ctx.input(0).shape.elem_count() * sizeof(float));
        return Status{};
      };
    case Opcode::RELU:
      return [](PrepareContext& ctx) {
        if (ctx.num_inputs() != 1) return fail_shape("relu takes one input");
        MICO_RETURN_IF_ERROR(check_output_shape(Opcode::RELU, ctx));
        MICO_RETURN_IF_ERROR(check_same_dtype(ctx));
        return check_quant_preserved(ctx);
      };
    case Opcode::ADD:
      return [](PrepareContext& ctx) {
        if (ctx.num_inputs() != 2) return fail_shape("add takes two inputs");
        MICO_RETURN_IF_ERROR(check_output_shape(Opcode::ADD, ctx));
        return check_same_dtype(ctx);
      };
    case Opcode::RESHAPE:
      return [](PrepareContext& ctx) {
        if (ctx.num_inputs() != 1) return fail_shape("reshape takes one input");
        MICO_RETURN_IF_ERROR(check_output_shape(Opcode::RESHAPE, ctx));
        MICO_RETURN_IF_ERROR(check_same_dtype(ctx));
        return check_quant_preserved(ctx);
      };
    case Opcode::QUANTIZE:
      return [](PrepareContext& ctx) {
        if (ctx.num_inputs() != 1) return fail_shape("quantize takes one input");
        MICO_RETURN_IF_ERROR(check_output_shape(Opcode::QUANTIZE, ctx));
        if (ctx.input(0).dtype != DType::F32 || ctx.output(0).dtype != DType::I8)
          return fail_shape("quantize maps F32 to I8");
        return Status{};
      };
    case Opcode::DEQUANTIZE:
      return [](PrepareContext& ctx) {
        if (ctx.num_inputs() != 1) return fail_shape("dequantize takes one input");
        MICO_RETURN_IF_ERROR(check_output_shape(Opcode::DEQUANTIZE, ctx));
        if (ctx.input(0).dtype != DType::I8 || ctx.output(0).dtype != DType::F32)
          return fail_shape("dequantize maps I8 to F32");
        return Status{};
      };
  }
  return nullptr;
}

}  // namespace

OpRegistration reference_registration(Opcode opcode) {
  return OpRegistration{opcode, prepare_for(opcode), eval_for(opcode)};
}

Registry Registry::with_reference_kernels() {
  Registry registry;
  for (uint8_t i = 0; i < kOpcodeCount; ++i) {
    Status s = registry.add(reference_registration(static_cast<Opcode>(i)));
    (void)s;  // opcodes are unique by construction
  }
  return registry;
}

}  // namespace mico
