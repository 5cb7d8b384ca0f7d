#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mico/status.hpp"
#include "mico/types.hpp"

namespace mico {

/// A byte blob that is either a non-owning view (models parsed from a file
/// reference const data at its in-file location, no copy) or owned storage
/// (models built by the converter). Copyable; owned bytes deep-copy.
class ConstBlob {
 public:
  ConstBlob() = default;
  explicit ConstBlob(std::vector<uint8_t> owned) : owned_(std::move(owned)), is_view_(false) {}
  explicit ConstBlob(std::span<const uint8_t> view) : view_(view), is_view_(true) {}

  std::span<const uint8_t> bytes() const {
    return is_view_ ? view_ : std::span<const uint8_t>(owned_);
  }
  size_t size() const { return bytes().size(); }
  bool is_view() const { return is_view_; }

  bool operator==(const ConstBlob& other) const {
    auto a = bytes(), b = other.bytes();
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  std::vector<uint8_t> owned_;
  std::span<const uint8_t> view_;
  bool is_view_ = false;
};

enum class TensorRole : uint8_t {
  Const = 0,        // weights/bias, backed by a model buffer
  ModelInput = 1,   // populated by the application before each invoke
  ModelOutput = 2,  // readable by the application after invoke
  Intermediate = 3, // produced and consumed inside one invoke
};

const char* tensor_role_name(TensorRole role);

struct TensorSpec {
  std::string name;
  DType dtype = DType::F32;
  Shape shape;
  TensorRole role = TensorRole::Intermediate;
  uint32_t buffer_index = 0;  // meaningful only when role == Const
  std::optional<QuantParams> quant;

  size_t byte_size() const { return shape.elem_count() * dtype_size(dtype); }

  bool operator==(const TensorSpec& other) const {
    if (!(name == other.name && dtype == other.dtype && shape == other.shape &&
          role == other.role && quant == other.quant))
      return false;
    if (role == TensorRole::Const && buffer_index != other.buffer_index) return false;
    return true;
  }
};

struct OpEntry {
  Opcode opcode = Opcode::CONV_2D;
  std::vector<uint32_t> inputs;   // tensor indices
  std::vector<uint32_t> outputs;  // tensor indices
  OpParams params;

  bool operator==(const OpEntry&) const = default;
};

inline constexpr const char* kOfflinePlanKey = "OFFLINE_MEMORY_PLAN";

/// Immutable serialized graph: tensor table, topologically sorted op list,
/// const buffers, and metadata. Safe to share across concurrent readers.
struct Model {
  uint16_t version = 1;
  std::vector<TensorSpec> tensors;
  std::vector<OpEntry> ops;
  std::vector<ConstBlob> buffers;
  std::vector<uint32_t> inputs;   // tensor indices with role ModelInput
  std::vector<uint32_t> outputs;  // tensor indices with role ModelOutput
  std::vector<std::pair<std::string, ConstBlob>> metadata;  // ordered, unique keys

  bool operator==(const Model&) const = default;
};

/// Exact-match metadata lookup; absent keys yield nullopt.
std::optional<std::span<const uint8_t>> get_metadata(const Model& model, const std::string& key);

/// Structural validation of every Model and OpEntry invariant, including
/// topological order of the op list. Never mutates the model.
ValidationReport validate_model(const Model& model);

}  // namespace mico
