#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mico/kernels.hpp"
#include "mico/status.hpp"
#include "mico/types.hpp"

namespace mico {

struct TensorMeta {
  DType dtype = DType::F32;
  Shape shape;
  std::optional<QuantParams> quant;
};

using ScratchHandle = uint32_t;

/// Passed to an op's prepare function, once per op instance, before any
/// eval. Prepare verifies shapes and dtypes and communicates its memory
/// requirements through request_scratch; it has no other allocation channel.
class PrepareContext {
 public:
  PrepareContext(std::span<const TensorMeta> inputs, std::span<const TensorMeta> outputs,
                 const OpParams& params, std::vector<size_t>& scratch_sizes)
      : inputs_(inputs), outputs_(outputs), params_(params), scratch_sizes_(scratch_sizes) {}

  size_t num_inputs() const { return inputs_.size(); }
  size_t num_outputs() const { return outputs_.size(); }
  const TensorMeta& input(size_t i) const { return inputs_[i]; }
  const TensorMeta& output(size_t i) const { return outputs_[i]; }
  const OpParams& params() const { return params_; }

  /// Requests `bytes` of invoke-time scratch memory, live only during this
  /// op's eval. Returns the handle eval uses to resolve the buffer.
  ScratchHandle request_scratch(size_t bytes) {
    scratch_sizes_.push_back(bytes);
    return static_cast<ScratchHandle>(scratch_sizes_.size() - 1);
  }

 private:
  std::span<const TensorMeta> inputs_;
  std::span<const TensorMeta> outputs_;
  const OpParams& params_;
  std::vector<size_t>& scratch_sizes_;
};

/// Passed to an op's eval function. Exposes only resolved input/output
/// buffer views, the op params, and granted scratch views; kernels have no
/// path to interpreter internals.
class EvalContext {
 public:
  EvalContext(std::span<const ConstTensor> inputs, std::span<MutTensor> outputs,
              const OpParams& params, std::span<const std::span<uint8_t>> scratch)
      : inputs_(inputs), outputs_(outputs), params_(params), scratch_(scratch) {}

  size_t num_inputs() const { return inputs_.size(); }
  size_t num_outputs() const { return outputs_.size(); }
  const ConstTensor& input(size_t i) const { return inputs_[i]; }
  MutTensor& output(size_t i) const { return outputs_[i]; }
  const OpParams& params() const { return params_; }
  std::span<uint8_t> scratch(ScratchHandle h) const { return scratch_[h]; }

 private:
  std::span<const ConstTensor> inputs_;
  std::span<MutTensor> outputs_;
  const OpParams& params_;
  std::span<const std::span<uint8_t>> scratch_;
};

using PrepareFn = std::function<Status(PrepareContext&)>;
using EvalFn = std::function<Status(EvalContext&)>;

/// Per-opcode prepare/eval pair. Prepare runs exactly once per op instance
/// during interpreter initialization; eval may run many times.
struct OpRegistration {
  Opcode opcode = Opcode::CONV_2D;
  PrepareFn prepare;
  EvalFn eval;
};

/// Maps opcodes to registrations; only registered operators are usable.
/// Immutable once populated, shareable across interpreters and threads.
class Registry {
 public:
  Status add(OpRegistration registration);
  const OpRegistration* find(Opcode opcode) const;
  size_t size() const { return entries_.size(); }

  /// Registry with every reference kernel registered.
  static Registry with_reference_kernels();

 private:
  std::vector<OpRegistration> entries_;
};

/// Reference registration for a single opcode, for assembling partial or
/// mixed registries.
OpRegistration reference_registration(Opcode opcode);

}  // namespace mico
