#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mico/model.hpp"
#include "mico/status.hpp"

namespace mico {

// .mico binary format, version 1. Little-endian throughout.
//
//   u8[4]  magic "MICO" (4D 49 43 4F)
//   u16    version (= 1)
//   u16    flags (= 0)
//   u32    n_tensors, n_ops, n_buffers, n_inputs, n_outputs, n_metadata
//   tensor records, op records, buffer records (u32 blob offset + u32 length),
//   input indices, output indices, metadata records
//   blob section, 16-byte aligned start, each blob start 16-byte aligned
//
// Record layouts are documented in the README; strings are u16 length +
// UTF-8 bytes, shapes are u8 rank + u32 extents.

inline constexpr uint8_t kMicoMagic[4] = {0x4D, 0x49, 0x43, 0x4F};
inline constexpr uint16_t kMicoVersion = 1;
inline constexpr size_t kBlobAlign = 16;

/// Serializes a validated model to its bit-exact file form. Deterministic:
/// identical models produce identical bytes.
Result<std::vector<uint8_t>> serialize_model(const Model& model);

/// Parses a serialized model. The returned Model references const buffer
/// data (and metadata blobs) at their in-file offsets without copying, so
/// `bytes` must outlive the Model. All reads are bounds-checked; a malformed
/// file yields a categorized error, never an out-of-range access.
Result<Model> parse_model(std::span<const uint8_t> bytes);

}  // namespace mico
