#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mico/status.hpp"
#include "mico/types.hpp"

namespace mico {

/// One nonpersistent buffer the planner must place: a size plus an
/// inclusive lifetime interval in op-index time. Two requests overlap
/// iff their intervals intersect.
struct AllocationRequest {
  uint32_t id = 0;
  size_t size = 0;        // > 0
  int32_t first_use = 0;  // op index
  int32_t last_use = 0;   // >= first_use

  bool overlaps(const AllocationRequest& other) const {
    return first_use <= other.last_use && other.first_use <= last_use;
  }
};

/// Offset assignment for a request set. Offsets are kept in ascending
/// request-id order so identical inputs yield byte-identical plans.
struct MemoryPlan {
  std::vector<std::pair<uint32_t, size_t>> offsets;  // (id, byte offset)
  size_t arena_size = 0;
  size_t alignment = 1;

  std::optional<size_t> offset_of(uint32_t id) const;
};

/// Every request gets a disjoint region regardless of lifetime, in id order.
MemoryPlan plan_naive(std::span<const AllocationRequest> requests, size_t alignment = 1);

/// Greedy first-fit decreasing: requests are processed in descending size
/// order (ties broken by ascending first_use, then ascending id) and each is
/// placed at the smallest aligned offset whose region intersects no
/// already-placed lifetime-overlapping request, or at the aligned end when
/// no such gap exists. Deterministic.
MemoryPlan plan_greedy(std::span<const AllocationRequest> requests, size_t alignment);

/// Applies a precomputed offset array (u32 count + count x u32 offsets,
/// little-endian, ascending request-id order). The decoded plan must pass
/// validate_plan.
Result<MemoryPlan> plan_offline(std::span<const AllocationRequest> requests,
                                std::span<const uint8_t> offsets_blob, size_t alignment);

/// Encodes a plan's offsets into the offline blob format above.
std::vector<uint8_t> encode_offline_plan(const MemoryPlan& plan);

/// Empty iff no two lifetime-overlapping requests share bytes, every region
/// fits in arena_size, and every offset honors the plan alignment.
std::vector<Violation> validate_plan(std::span<const AllocationRequest> requests,
                                     const MemoryPlan& plan);

/// Minimal achievable arena size at alignment 1, by exhaustive search over
/// placement orders with candidate offsets at 0 and at the ends of placed
/// regions. Intended as a test oracle; rejects more than 6 requests.
Result<size_t> optimal_plan_bruteforce(std::span<const AllocationRequest> requests);

/// ASCII occupancy chart: one row per `band_bytes` of arena space (top row
/// is the highest band), one column per op index. Deterministic; the text
/// form is stable and suitable for golden tests.
std::string render_plan(std::span<const AllocationRequest> requests, const MemoryPlan& plan,
                        size_t band_bytes = 1);

}  // namespace mico
