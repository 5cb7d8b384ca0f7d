#include "mico/interpreter.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstring>

namespace mico {

uint64_t steady_ticks() {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                   std::chrono::steady_clock::now().time_since_epoch())
                                   .count());
}

Result<PreparedModel> prepare_model(const Model& model, const Registry& registry) {
  PreparedModel prepared;
  prepared.scratch_sizes.resize(model.ops.size());
  for (size_t i = 0; i < model.ops.size(); ++i) {
    const OpEntry& op = model.ops[i];
    const OpRegistration* reg = registry.find(op.opcode);
    if (!reg)
      return Result<PreparedModel>(ErrCode::UnsupportedOperator,
                                   std::string("op ") + std::to_string(i) + " requires " +
                                       opcode_name(op.opcode) + " which is not registered");
    std::vector<TensorMeta> inputs, outputs;
    for (uint32_t idx : op.inputs) {
      const TensorSpec& t = model.tensors[idx];
      inputs.push_back({t.dtype, t.shape, t.quant});
    }
    for (uint32_t idx : op.outputs) {
      const TensorSpec& t = model.tensors[idx];
      outputs.push_back({t.dtype, t.shape, t.quant});
    }
    PrepareContext ctx(inputs, outputs, op.params, prepared.scratch_sizes[i]);
    Status s = reg->prepare(ctx);
    if (!s.ok())
      return Result<PreparedModel>(ErrCode::PrepareFailed,
                                   "op " + std::to_string(i) + " (" + opcode_name(op.opcode) +
                                       "): " + s.error().message);
  }
  return prepared;
}

RequestSet build_requests(const Model& model, const PreparedModel& prepared) {
  RequestSet rs;
  const size_t n_tensors = model.tensors.size();
  const int32_t n_ops = static_cast<int32_t>(model.ops.size());
  rs.tensor_request.assign(n_tensors, -1);
  rs.scratch_request.resize(model.ops.size());

  std::vector<int32_t> producer(n_tensors, -1);
  std::vector<int32_t> last_consumer(n_tensors, -1);
  for (int32_t i = 0; i < n_ops; ++i) {
    for (uint32_t idx : model.ops[i].inputs) last_consumer[idx] = i;
    for (uint32_t idx : model.ops[i].outputs)
      if (producer[idx] < 0) producer[idx] = i;
  }

  uint32_t next_id = 0;
  for (size_t t = 0; t < n_tensors; ++t) {
    const TensorSpec& spec = model.tensors[t];
    int32_t first = 0, last = 0;
    switch (spec.role) {
      case TensorRole::Const:
        continue;  // lives in the model, not the arena
      case TensorRole::ModelInput:
        first = 0;
        last = std::max<int32_t>(last_consumer[t], 0);
        break;
      case TensorRole::ModelOutput:
        first = std::max<int32_t>(producer[t], 0);
        last = n_ops;  // readable after the final op
        break;
      case TensorRole::Intermediate:
        if (producer[t] < 0) continue;  // dangling tensor, no storage needed
        first = producer[t];
        last = std::max(producer[t], last_consumer[t]);
        break;
    }
    rs.requests.push_back({next_id, spec.byte_size(), first, last});
    rs.tensor_request[t] = static_cast<int32_t>(next_id);
    ++next_id;
  }

  for (int32_t i = 0; i < n_ops; ++i) {
    for (size_t bytes : prepared.scratch_sizes[i]) {
      assert(bytes > 0);
      rs.requests.push_back({next_id, bytes, i, i});
      rs.scratch_request[i].push_back(next_id);
      ++next_id;
    }
  }
  return rs;
}

Result<Interpreter> Interpreter::create(const Model& model, const Registry& registry,
                                        Arena& arena) {
  auto report = validate_model(model);
  if (!report.ok())
    return Result<Interpreter>(ErrCode::InvalidModel,
                               "model failed validation: " + report.violations.front().code +
                                   " (" + report.violations.front().detail + ")");
  if (arena.memory().size() != arena.capacity())
    return Result<Interpreter>(ErrCode::InvalidModel,
                               "arena has no backing memory; create it over a caller region");
  return Interpreter(model, registry, arena);
}

Status Interpreter::allocate() {
  if (phase_ != Phase::Created)
    return Status(ErrCode::PhaseError, "allocate called twice");
  if (arena_->temps_outstanding())
    return Status(ErrCode::TempOutstanding, "arena has live temp allocations");

  auto prepared = prepare_model(*model_, *registry_);
  if (!prepared.ok()) return prepared.status();
  prepared_ = prepared.take();
  requests_ = build_requests(*model_, prepared_);

  const size_t head_entry = arena_->head();
  const size_t tail_entry = arena_->tail();
  const size_t n_req = requests_.requests.size();

  size_t total_scratch_slots = 0;
  for (const auto& s : prepared_.scratch_sizes) total_scratch_slots += s.size();
  const size_t tensor_table_bytes = model_->tensors.size() * sizeof(TensorLoc);
  const size_t scratch_table_bytes = total_scratch_slots * sizeof(uint32_t);

  // Planning structures live in the temp region between the stacks and are
  // released before any lasting allocation.
  std::span<const AllocationRequest> req_span = requests_.requests;
  if (n_req > 0) {
    auto temp = arena_->alloc_temp(n_req * sizeof(AllocationRequest), kArenaAlign);
    if (!temp.ok()) return exhausted_error(head_entry, tail_entry, tensor_table_bytes,
                                           scratch_table_bytes, n_req * sizeof(AllocationRequest));
    auto* scratch_area =
        reinterpret_cast<AllocationRequest*>(arena_->memory().data() + temp.value().offset);
    std::memcpy(scratch_area, requests_.requests.data(), n_req * sizeof(AllocationRequest));
    req_span = {scratch_area, n_req};
  }

  if (auto blob = get_metadata(*model_, kOfflinePlanKey)) {
    auto plan = plan_offline(req_span, *blob, kArenaAlign);
    if (!plan.ok()) {
      arena_->reset_temps();
      return plan.status();
    }
    plan_ = plan.take();
  } else {
    plan_ = plan_greedy(req_span, kArenaAlign);
  }
  arena_->reset_temps();

  base_offset_ = arena_->head();
  if (plan_.arena_size > 0) {
    auto base = arena_->alloc_head(plan_.arena_size, kArenaAlign);
    if (!base.ok())
      return exhausted_error(head_entry, tail_entry, tensor_table_bytes, scratch_table_bytes, 0);
    base_offset_ = base.value();
  }

  // Runtime tables are interpreter-lifetime allocations on the tail stack.
  // Tail allocations are permanent, but head space is restored on failure.
  auto fail_restoring_head = [&](void) {
    (void)arena_->reset_head(head_entry);
    return exhausted_error(head_entry, tail_entry, tensor_table_bytes, scratch_table_bytes, 0);
  };
  if (tensor_table_bytes > 0) {
    auto off = arena_->alloc_tail(tensor_table_bytes, kArenaAlign);
    if (!off.ok()) return fail_restoring_head();
    tensor_table_ = {reinterpret_cast<TensorLoc*>(arena_->memory().data() + off.value()),
                     model_->tensors.size()};
  }
  if (scratch_table_bytes > 0) {
    auto off = arena_->alloc_tail(scratch_table_bytes, kArenaAlign);
    if (!off.ok()) return fail_restoring_head();
    scratch_table_ = {reinterpret_cast<uint32_t*>(arena_->memory().data() + off.value()),
                      total_scratch_slots};
  }

  for (size_t t = 0; t < model_->tensors.size(); ++t) {
    TensorLoc loc;
    if (model_->tensors[t].role == TensorRole::Const) {
      loc = {TensorLoc::ConstBuffer, model_->tensors[t].buffer_index};
    } else if (requests_.tensor_request[t] >= 0) {
      auto offset = plan_.offset_of(static_cast<uint32_t>(requests_.tensor_request[t]));
      loc = {TensorLoc::ArenaOffset, static_cast<uint32_t>(base_offset_ + *offset)};
    }
    tensor_table_[t] = loc;
  }
  scratch_start_.assign(model_->ops.size(), 0);
  size_t slot = 0;
  for (size_t i = 0; i < model_->ops.size(); ++i) {
    scratch_start_[i] = static_cast<uint32_t>(slot);
    for (uint32_t req_id : requests_.scratch_request[i]) {
      auto offset = plan_.offset_of(req_id);
      scratch_table_[slot++] = static_cast<uint32_t>(base_offset_ + *offset);
    }
  }

  // Hand the nonpersistent region back so tenants sharing this arena can
  // overlap theirs with it; the arena's high-water mark keeps the true
  // requirement. Tail growth since then must not undercut any tenant's
  // region, so re-check against the high-water mark.
  MICO_RETURN_IF_ERROR(arena_->reset_head(head_entry));
  if (arena_->usage().nonpersistent_bytes > arena_->tail())
    return Status(ErrCode::ArenaExhausted,
                  "arena exhausted: required >= " +
                      std::to_string(arena_->usage().nonpersistent_bytes +
                                     (arena_->capacity() - arena_->tail())) +
                      " bytes, capacity " + std::to_string(arena_->capacity()));

  persistent_bytes_ = tail_entry - arena_->tail();
  phase_ = Phase::Allocated;
  return Status{};
}

Status Interpreter::exhausted_error(size_t head_entry, size_t tail_entry, size_t tensor_table_bytes,
                                    size_t scratch_table_bytes, size_t temp_bytes) const {
  // Lower bound on the capacity this allocation sequence needs.
  const size_t persistent_elsewhere = arena_->capacity() - tail_entry;
  const size_t tables = align_up(tensor_table_bytes, kArenaAlign) +
                        align_up(scratch_table_bytes, kArenaAlign);
  const size_t required = align_up(head_entry, kArenaAlign) +
                          std::max(plan_.arena_size + tables, temp_bytes) + persistent_elsewhere;
  return Status(ErrCode::ArenaExhausted,
                "arena exhausted: required >= " + std::to_string(required) + " bytes, capacity " +
                    std::to_string(arena_->capacity()));
}

ConstTensor Interpreter::resolve_const(uint32_t tensor_index) const {
  const TensorSpec& spec = model_->tensors[tensor_index];
  const TensorLoc loc = tensor_table_[tensor_index];
  std::span<const uint8_t> data;
  if (loc.kind == TensorLoc::ConstBuffer)
    data = model_->buffers[loc.value].bytes();
  else if (loc.kind == TensorLoc::ArenaOffset)
    data = arena_->memory().subspan(loc.value, spec.byte_size());
  return ConstTensor{spec.dtype, spec.shape, spec.quant, data};
}

MutTensor Interpreter::resolve_mut(uint32_t tensor_index) const {
  const TensorSpec& spec = model_->tensors[tensor_index];
  const TensorLoc loc = tensor_table_[tensor_index];
  assert(loc.kind == TensorLoc::ArenaOffset);
  return MutTensor{spec.dtype, spec.shape, spec.quant,
                   arena_->memory().subspan(loc.value, spec.byte_size())};
}

Result<MutTensor> Interpreter::input_view(size_t i) {
  if (phase_ != Phase::Allocated)
    return Result<MutTensor>(ErrCode::PhaseError, "input_view before allocate");
  if (i >= model_->inputs.size())
    return Result<MutTensor>(ErrCode::IndexOutOfRange,
                             "input " + std::to_string(i) + " of " +
                                 std::to_string(model_->inputs.size()));
  return resolve_mut(model_->inputs[i]);
}

Result<ConstTensor> Interpreter::output_view(size_t i) const {
  if (phase_ != Phase::Allocated)
    return Result<ConstTensor>(ErrCode::PhaseError, "output_view before allocate");
  if (i >= model_->outputs.size())
    return Result<ConstTensor>(ErrCode::IndexOutOfRange,
                               "output " + std::to_string(i) + " of " +
                                   std::to_string(model_->outputs.size()));
  return resolve_const(model_->outputs[i]);
}

Status Interpreter::invoke() {
  if (phase_ != Phase::Allocated)
    return Status(ErrCode::PhaseError, "invoke before allocate");

  const bool profiled = profiler_ != nullptr;
  auto now = [this]() { return ticks_ ? ticks_() : steady_ticks(); };
  const uint64_t invoke_start = profiled ? now() : 0;

  std::vector<ConstTensor> inputs;
  std::vector<MutTensor> outputs;
  std::vector<std::span<uint8_t>> scratch;

  for (size_t i = 0; i < model_->ops.size(); ++i) {
    const OpEntry& op = model_->ops[i];
    inputs.clear();
    outputs.clear();
    scratch.clear();
    for (uint32_t idx : op.inputs) inputs.push_back(resolve_const(idx));
    for (uint32_t idx : op.outputs) outputs.push_back(resolve_mut(idx));
    for (size_t k = 0; k < prepared_.scratch_sizes[i].size(); ++k) {
      const uint32_t offset = scratch_table_[scratch_start_[i] + k];
      scratch.push_back(arena_->memory().subspan(offset, prepared_.scratch_sizes[i][k]));
    }

    EvalContext ctx(inputs, outputs, op.params, scratch);
    const uint64_t op_start = profiled ? now() : 0;
    const OpRegistration* reg = registry_->find(op.opcode);
    Status s = reg->eval(ctx);
    if (profiled)
      profiler_->op_event({static_cast<int32_t>(i), op.opcode, now() - op_start});
    if (!s.ok())
      return Status(ErrCode::EvalFailed, "op " + std::to_string(i) + " (" +
                                             opcode_name(op.opcode) + "): " + s.error().message);
  }

  if (profiled) profiler_->invoke_event(now() - invoke_start);
  return Status{};
}

Result<MemoryReport> Interpreter::memory_report() const {
  if (phase_ != Phase::Allocated)
    return Result<MemoryReport>(ErrCode::PhaseError, "memory_report before allocate");
  return MemoryReport{persistent_bytes_, plan_.arena_size,
                      persistent_bytes_ + plan_.arena_size};
}

}  // namespace mico
