#include "mico/arena.hpp"

#include <cassert>

namespace mico {

namespace {
[[maybe_unused]] bool is_pow2(size_t v) { return v != 0 && (v & (v - 1)) == 0; }
}  // namespace

Result<Arena> Arena::create(size_t capacity) {
  if (capacity < kMinCapacity)
    return Result<Arena>(ErrCode::CapacityTooSmall,
                         "arena capacity " + std::to_string(capacity) + " below minimum " +
                             std::to_string(kMinCapacity));
  return Arena(capacity);
}

Result<Arena> Arena::create(std::span<uint8_t> memory) {
  auto arena = create(memory.size());
  if (!arena.ok()) return arena;
  arena.value().memory_ = memory;
  return arena;
}

Result<size_t> Arena::alloc_tail(size_t size, size_t align) {
  assert(size > 0 && is_pow2(align));
  if (temp_outstanding_ > 0)
    return Result<size_t>(ErrCode::TempOutstanding,
                          "tail allocation attempted with live temp allocations");
  if (size > tail_)
    return Result<size_t>(ErrCode::ArenaExhausted,
                          "tail allocation of " + std::to_string(size) + " bytes exceeds arena");
  const size_t new_tail = align_down(tail_ - size, align);
  if (new_tail < head_)
    return Result<size_t>(ErrCode::ArenaExhausted,
                          "tail allocation of " + std::to_string(size) +
                              " bytes crosses head at offset " + std::to_string(head_));
  tail_ = new_tail;
  ++mutations_;
  return new_tail;
}

Result<size_t> Arena::alloc_head(size_t size, size_t align) {
  assert(size > 0 && is_pow2(align));
  if (temp_outstanding_ > 0)
    return Result<size_t>(ErrCode::TempOutstanding,
                          "head allocation attempted with live temp allocations");
  const size_t offset = align_up(head_, align);
  const size_t new_head = offset + size;
  if (offset < head_ || new_head < offset || new_head > tail_)
    return Result<size_t>(ErrCode::ArenaExhausted,
                          "head allocation of " + std::to_string(size) +
                              " bytes crosses tail at offset " + std::to_string(tail_));
  head_ = new_head;
  temp_cursor_ = head_;
  if (head_ > head_high_water_) head_high_water_ = head_;
  ++mutations_;
  return offset;
}

Result<Arena::TempAlloc> Arena::alloc_temp(size_t size, size_t align) {
  assert(size > 0 && is_pow2(align));
  const size_t offset = align_up(temp_cursor_, align);
  const size_t end = offset + size;
  if (offset < temp_cursor_ || end < offset || end > tail_)
    return Result<TempAlloc>(ErrCode::ArenaExhausted,
                             "temp allocation of " + std::to_string(size) +
                                 " bytes does not fit between the stacks");
  temp_cursor_ = end;
  if (end - head_ > temp_high_water_) temp_high_water_ = end - head_;
  ++temp_outstanding_;
  ++mutations_;
  return TempAlloc{next_temp_handle_++, offset};
}

void Arena::reset_temps() {
  temp_outstanding_ = 0;
  temp_cursor_ = head_;
  ++mutations_;
}

Status Arena::reset_head(size_t to_offset) {
  if (temp_outstanding_ > 0)
    return Status(ErrCode::TempOutstanding, "reset_head attempted with live temp allocations");
  if (to_offset > head_)
    return Status(ErrCode::BadReset, "reset_head target " + std::to_string(to_offset) +
                                         " above current head " + std::to_string(head_));
  head_ = to_offset;
  temp_cursor_ = head_;
  ++mutations_;
  return Status{};
}

ArenaUsage Arena::usage() const {
  return ArenaUsage{capacity_ - tail_, head_high_water_, temp_high_water_};
}

}  // namespace mico
