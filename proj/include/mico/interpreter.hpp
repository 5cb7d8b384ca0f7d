#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mico/arena.hpp"
#include "mico/kernels.hpp"
#include "mico/model.hpp"
#include "mico/planner.hpp"
#include "mico/registry.hpp"
#include "mico/status.hpp"

namespace mico {

struct MemoryReport {
  size_t persistent_bytes = 0;     // tail bytes this interpreter allocated
  size_t nonpersistent_bytes = 0;  // its memory plan's arena size
  size_t total_bytes = 0;
};

struct ProfileEvent {
  int32_t op_index = 0;
  Opcode opcode = Opcode::CONV_2D;
  uint64_t duration_ticks = 0;
};

/// Receives one event per op per invoke plus one whole-invoke total.
class ProfileSink {
 public:
  virtual ~ProfileSink() = default;
  virtual void op_event(const ProfileEvent& event) = 0;
  virtual void invoke_event(uint64_t total_ticks) = 0;
};

/// Monotonic tick source; injectable so tests and benchmarks can use a
/// deterministic fake. The default reads a nanosecond steady clock.
using TickSource = std::function<uint64_t()>;
uint64_t steady_ticks();

/// Outcome of resolving and preparing every op of a model against a
/// registry: per-op scratch byte requests, in op order.
struct PreparedModel {
  std::vector<std::vector<size_t>> scratch_sizes;
};

/// Resolves each opcode and runs each op's prepare in topological order.
/// Fails with UnsupportedOperator (naming the opcode) or PrepareFailed
/// (naming the op index).
Result<PreparedModel> prepare_model(const Model& model, const Registry& registry);

/// Allocation requests for every nonpersistent buffer, under the standard
/// lifetime rules: model inputs live from op 0 through their final
/// consumer, model outputs from their producer through end of invoke
/// (op index = number of ops), intermediates from producer through final
/// consumer, and kernel scratch exactly at its op's index. Request ids
/// number model tensors in index order, then scratch in op order.
struct RequestSet {
  std::vector<AllocationRequest> requests;
  std::vector<int32_t> tensor_request;                 // tensor idx -> request id, -1 if none
  std::vector<std::vector<uint32_t>> scratch_request;  // op idx -> per-scratch request id
};
RequestSet build_requests(const Model& model, const PreparedModel& prepared);

/// Binds exactly one model to one registry and one arena. All memory is
/// taken from the arena during allocate(); invoke() performs zero
/// allocation. Single-threaded use per interpreter; interpreters sharing
/// an arena must serialize allocation and invokes externally, and all
/// allocate() calls must precede the first invoke() on that arena.
class Interpreter {
 public:
  /// The model must have passed validate_model; the arena must carry
  /// backing memory (Arena::create over a caller region).
  static Result<Interpreter> create(const Model& model, const Registry& registry, Arena& arena);

  /// Resolves kernels, runs prepares, plans nonpersistent memory (offline
  /// plan from model metadata when present, greedy otherwise), and reserves
  /// arena space. Created -> Allocated.
  Status allocate();

  Result<MutTensor> input_view(size_t i);
  Result<ConstTensor> output_view(size_t i) const;

  /// Runs every op's eval in list order. Blocking; zero arena mutation.
  /// Inputs must be repopulated before each invoke, because input bytes may
  /// be reused for later tensors within the same invoke.
  Status invoke();

  Result<MemoryReport> memory_report() const;

  void attach_profiler(ProfileSink* sink) { profiler_ = sink; }
  void set_tick_source(TickSource ticks) { ticks_ = std::move(ticks); }

  bool allocated() const { return phase_ == Phase::Allocated; }
  const Model& model() const { return *model_; }

  // Planned-layout introspection (drives plan dumps and layout tests).
  const MemoryPlan& plan() const { return plan_; }
  const RequestSet& request_set() const { return requests_; }
  size_t nonpersistent_base() const { return base_offset_; }

 private:
  Interpreter(const Model& model, const Registry& registry, Arena& arena)
      : model_(&model), registry_(&registry), arena_(&arena) {}

  enum class Phase { Created, Allocated };

  struct TensorLoc {
    enum : uint8_t { None = 0, ConstBuffer = 1, ArenaOffset = 2 } kind = None;
    uint32_t value = 0;  // buffer index or absolute arena offset
  };

  ConstTensor resolve_const(uint32_t tensor_index) const;
  MutTensor resolve_mut(uint32_t tensor_index) const;
  Status exhausted_error(size_t head_entry, size_t tail_entry, size_t tensor_table_bytes,
                         size_t scratch_table_bytes, size_t temp_bytes) const;

  const Model* model_;
  const Registry* registry_;
  Arena* arena_;
  Phase phase_ = Phase::Created;

  PreparedModel prepared_;
  RequestSet requests_;
  MemoryPlan plan_;
  size_t base_offset_ = 0;  // arena offset of the nonpersistent region

  // Runtime tables, stored in the arena's persistent (tail) section.
  std::span<TensorLoc> tensor_table_;
  std::span<uint32_t> scratch_table_;
  std::vector<uint32_t> scratch_start_;  // op idx -> first slot in scratch_table_

  size_t persistent_bytes_ = 0;
  ProfileSink* profiler_ = nullptr;
  TickSource ticks_;
};

}  // namespace mico
