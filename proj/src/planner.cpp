#include "mico/planner.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

namespace mico {

namespace {

struct Region {
  size_t offset;
  size_t end;
};

// Smallest aligned offset at which `size` bytes avoid every region in
// `busy`, or the aligned end of all of them. `busy` is sorted by offset and
// may contain mutually overlapping regions.
size_t first_fit(std::vector<Region>& busy, size_t size, size_t alignment) {
  std::sort(busy.begin(), busy.end(),
            [](const Region& a, const Region& b) { return a.offset < b.offset; });
  size_t cursor = 0;
  for (const Region& r : busy) {
    const size_t candidate = align_up(cursor, alignment);
    if (candidate + size <= r.offset) return candidate;
    cursor = std::max(cursor, r.end);
  }
  return align_up(cursor, alignment);
}

void append_offset(MemoryPlan& plan, uint32_t id, size_t offset, size_t size) {
  plan.offsets.emplace_back(id, offset);
  plan.arena_size = std::max(plan.arena_size, offset + size);
}

void sort_by_id(MemoryPlan& plan) {
  std::sort(plan.offsets.begin(), plan.offsets.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

uint32_t read_u32le(const uint8_t* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return v;  // little-endian host assumed; asserted in serialize.cpp
}

}  // namespace

std::optional<size_t> MemoryPlan::offset_of(uint32_t id) const {
  auto it = std::lower_bound(offsets.begin(), offsets.end(), id,
                             [](const auto& e, uint32_t key) { return e.first < key; });
  if (it == offsets.end() || it->first != id) return std::nullopt;
  return it->second;
}

MemoryPlan plan_naive(std::span<const AllocationRequest> requests, size_t alignment) {
  MemoryPlan plan;
  plan.alignment = alignment;
  std::vector<const AllocationRequest*> by_id;
  by_id.reserve(requests.size());
  for (const auto& r : requests) by_id.push_back(&r);
  std::sort(by_id.begin(), by_id.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  size_t cursor = 0;
  for (const auto* r : by_id) {
    const size_t offset = align_up(cursor, alignment);
    append_offset(plan, r->id, offset, r->size);
    cursor = offset + r->size;
  }
  return plan;
}

MemoryPlan plan_greedy(std::span<const AllocationRequest> requests, size_t alignment) {
  MemoryPlan plan;
  plan.alignment = alignment;

  // Descending size; ties by ascending first_use, then ascending id.
  std::vector<const AllocationRequest*> order;
  order.reserve(requests.size());
  for (const auto& r : requests) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->size != b->size) return a->size > b->size;
    if (a->first_use != b->first_use) return a->first_use < b->first_use;
    return a->id < b->id;
  });

  std::vector<std::pair<const AllocationRequest*, size_t>> placed;
  std::vector<Region> busy;
  for (const auto* r : order) {
    busy.clear();
    for (const auto& [other, offset] : placed)
      if (r->overlaps(*other)) busy.push_back({offset, offset + other->size});
    const size_t offset = first_fit(busy, r->size, alignment);
    placed.emplace_back(r, offset);
    append_offset(plan, r->id, offset, r->size);
  }
  sort_by_id(plan);
  return plan;
}

Result<MemoryPlan> plan_offline(std::span<const AllocationRequest> requests,
                                std::span<const uint8_t> offsets_blob, size_t alignment) {
  if (offsets_blob.size() < 4)
    return Result<MemoryPlan>(ErrCode::BlobMalformed, "offline plan blob shorter than its count");
  const uint32_t count = read_u32le(offsets_blob.data());
  if (offsets_blob.size() != 4 + size_t{count} * 4)
    return Result<MemoryPlan>(ErrCode::BlobMalformed,
                              "offline plan blob length does not match its count");
  if (count != requests.size())
    return Result<MemoryPlan>(ErrCode::CountMismatch,
                              "offline plan has " + std::to_string(count) + " offsets for " +
                                  std::to_string(requests.size()) + " requests");

  std::vector<const AllocationRequest*> by_id;
  by_id.reserve(requests.size());
  for (const auto& r : requests) by_id.push_back(&r);
  std::sort(by_id.begin(), by_id.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  MemoryPlan plan;
  plan.alignment = alignment;
  for (uint32_t i = 0; i < count; ++i) {
    const size_t offset = read_u32le(offsets_blob.data() + 4 + size_t{i} * 4);
    append_offset(plan, by_id[i]->id, offset, by_id[i]->size);
  }
  auto violations = validate_plan(requests, plan);
  if (!violations.empty())
    return Result<MemoryPlan>(ErrCode::PlanInvalid,
                              "offline plan rejected: " + violations.front().code + " (" +
                                  violations.front().detail + ")");
  return plan;
}

std::vector<uint8_t> encode_offline_plan(const MemoryPlan& plan) {
  std::vector<uint8_t> blob;
  blob.reserve(4 + plan.offsets.size() * 4);
  auto put_u32 = [&blob](uint32_t v) {
    for (int i = 0; i < 4; ++i) blob.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  put_u32(static_cast<uint32_t>(plan.offsets.size()));
  for (const auto& [id, offset] : plan.offsets) put_u32(static_cast<uint32_t>(offset));
  return blob;
}

std::vector<Violation> validate_plan(std::span<const AllocationRequest> requests,
                                     const MemoryPlan& plan) {
  std::vector<Violation> out;
  for (const auto& r : requests) {
    auto offset = plan.offset_of(r.id);
    if (!offset) {
      out.push_back({"missing", "request " + std::to_string(r.id) + " has no offset"});
      continue;
    }
    if (*offset % plan.alignment != 0)
      out.push_back({"misaligned", "request " + std::to_string(r.id) + " at offset " +
                                       std::to_string(*offset) + " (alignment " +
                                       std::to_string(plan.alignment) + ")"});
    if (*offset + r.size > plan.arena_size)
      out.push_back({"out-of-range", "request " + std::to_string(r.id) + " ends at " +
                                         std::to_string(*offset + r.size) + " beyond arena " +
                                         std::to_string(plan.arena_size)});
  }
  for (size_t i = 0; i < requests.size(); ++i) {
    for (size_t j = i + 1; j < requests.size(); ++j) {
      const auto& a = requests[i];
      const auto& b = requests[j];
      if (!a.overlaps(b)) continue;
      auto oa = plan.offset_of(a.id);
      auto ob = plan.offset_of(b.id);
      if (!oa || !ob) continue;
      if (*oa < *ob + b.size && *ob < *oa + a.size)
        out.push_back({"overlap", "requests " + std::to_string(a.id) + "," +
                                      std::to_string(b.id) + " share bytes while both live"});
    }
  }
  return out;
}

namespace {

// Places `order[i]` at the smallest candidate offset (0 or the end of an
// already-placed region) that conflicts with no placed lifetime-overlapping
// request, then recurses over the remaining permutations.
struct BruteForce {
  std::span<const AllocationRequest> requests;
  std::vector<size_t> offsets;  // parallel to requests
  std::vector<uint8_t> placed;
  size_t best = SIZE_MAX;

  void place(std::vector<size_t>& chosen, size_t depth, size_t high_water) {
    if (high_water >= best) return;  // cannot improve
    if (depth == requests.size()) {
      best = high_water;
      return;
    }
    for (size_t i = 0; i < requests.size(); ++i) {
      if (placed[i]) continue;
      // candidate offsets: 0 plus the ends of placed regions
      std::vector<size_t> candidates{0};
      for (size_t j : chosen) candidates.push_back(offsets[j] + requests[j].size);
      std::sort(candidates.begin(), candidates.end());
      size_t offset = SIZE_MAX;
      for (size_t c : candidates) {
        bool conflict = false;
        for (size_t j : chosen) {
          if (!requests[i].overlaps(requests[j])) continue;
          if (c < offsets[j] + requests[j].size && offsets[j] < c + requests[i].size) {
            conflict = true;
            break;
          }
        }
        if (!conflict) {
          offset = c;
          break;
        }
      }
      offsets[i] = offset;
      placed[i] = 1;
      chosen.push_back(i);
      place(chosen, depth + 1, std::max(high_water, offset + requests[i].size));
      chosen.pop_back();
      placed[i] = 0;
    }
  }
};

}  // namespace

Result<size_t> optimal_plan_bruteforce(std::span<const AllocationRequest> requests) {
  if (requests.size() > 6)
    return Result<size_t>(ErrCode::TooLarge, "brute-force planner limited to 6 requests");
  if (requests.empty()) return size_t{0};
  BruteForce bf{requests, std::vector<size_t>(requests.size()), std::vector<uint8_t>(requests.size()), SIZE_MAX};
  std::vector<size_t> chosen;
  chosen.reserve(requests.size());
  bf.place(chosen, 0, 0);
  return bf.best;
}

std::string render_plan(std::span<const AllocationRequest> requests, const MemoryPlan& plan,
                        size_t band_bytes) {
  assert(band_bytes > 0);
  std::string out = "arena_size: " + std::to_string(plan.arena_size) + "\n";
  if (plan.arena_size == 0 || requests.empty()) return out;

  std::vector<const AllocationRequest*> by_id;
  for (const auto& r : requests) by_id.push_back(&r);
  std::sort(by_id.begin(), by_id.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  static const char kLabels[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  int32_t max_t = 0;
  for (const auto& r : requests) max_t = std::max(max_t, r.last_use);
  const size_t bands = (plan.arena_size + band_bytes - 1) / band_bytes;
  const size_t label_width = std::to_string(bands - 1).size();

  for (size_t band = bands; band-- > 0;) {
    const size_t lo = band * band_bytes;
    const size_t hi = lo + band_bytes;
    std::string row = std::to_string(band);
    row.insert(0, label_width - row.size(), ' ');
    row += " |";
    for (int32_t t = 0; t <= max_t; ++t) {
      char cell = '.';
      for (size_t i = 0; i < by_id.size(); ++i) {
        const auto& r = *by_id[i];
        if (t < r.first_use || t > r.last_use) continue;
        auto offset = plan.offset_of(r.id);
        if (!offset) continue;
        if (*offset < hi && lo < *offset + r.size) {
          cell = kLabels[i % (sizeof(kLabels) - 1)];
          break;
        }
      }
      row += cell;
    }
    out += row + "\n";
  }
  return out;
}

}  // namespace mico
