#pragma once

#include <cstdint>
#include <span>

#include "mico/status.hpp"
#include "mico/types.hpp"

namespace mico {

/// Default alignment for interpreter-initiated allocations.
inline constexpr size_t kArenaAlign = 16;

struct ArenaUsage {
  size_t persistent_bytes = 0;     // tail region, interpreter lifetime
  size_t nonpersistent_bytes = 0;  // head high-water mark, reusable
  size_t temp_high_water = 0;      // planning-time temp region peak
};

/// Two-stack allocator over a single fixed region. The head stack grows
/// upward from offset 0 (function-lifetime objects), the tail stack grows
/// downward from capacity (interpreter-lifetime objects); capacity is
/// exhausted exactly when the two pointers would cross. The space between
/// the stacks serves temporary allocations during memory planning; while
/// any temp allocation is live, head and tail allocation is rejected.
///
/// The arena deals in offsets, not addresses. It may optionally carry the
/// caller's backing region so that consumers can resolve offsets, but no
/// arena operation ever reads or writes that memory.
///
/// Not safe for concurrent mutation; distinct arenas are independent.
class Arena {
 public:
  struct TempAlloc {
    uint32_t handle = 0;
    size_t offset = 0;
  };

  static constexpr size_t kMinCapacity = 32;

  /// Offset-only arena (nothing to resolve offsets against).
  static Result<Arena> create(size_t capacity);
  /// Arena over a caller-supplied region; capacity = memory.size().
  /// The region must stay intact for the arena's lifetime.
  static Result<Arena> create(std::span<uint8_t> memory);

  /// Interpreter-lifetime allocation from the top of the arena.
  /// Returns the new (aligned-down) tail offset.
  Result<size_t> alloc_tail(size_t size, size_t align);

  /// Function-lifetime allocation from the bottom of the arena.
  /// Returns the aligned-up previous head offset.
  Result<size_t> alloc_head(size_t size, size_t align);

  /// Temporary allocation between the stacks. Valid until reset_temps().
  Result<TempAlloc> alloc_temp(size_t size, size_t align);

  /// Invalidates all temp handles and returns the temp cursor to head.
  void reset_temps();

  /// Releases head space back to `to_offset` (high-water mark retained).
  Status reset_head(size_t to_offset);

  ArenaUsage usage() const;

  size_t capacity() const { return capacity_; }
  size_t head() const { return head_; }
  size_t tail() const { return tail_; }
  bool temps_outstanding() const { return temp_outstanding_ > 0; }

  /// Counts every state-changing call. Unchanged counter across a region
  /// of code proves that region performed no arena allocation.
  uint64_t mutation_count() const { return mutations_; }

  /// Backing region, empty for offset-only arenas.
  std::span<uint8_t> memory() const { return memory_; }

 private:
  explicit Arena(size_t capacity) : capacity_(capacity), tail_(capacity) {}

  size_t capacity_ = 0;
  size_t head_ = 0;
  size_t tail_ = 0;
  size_t temp_cursor_ = 0;
  uint32_t temp_outstanding_ = 0;
  uint32_t next_temp_handle_ = 0;
  size_t head_high_water_ = 0;
  size_t temp_high_water_ = 0;
  uint64_t mutations_ = 0;
  std::span<uint8_t> memory_;
};

}  // namespace mico
