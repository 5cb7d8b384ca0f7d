#include "mico/serialize.hpp"

#include <bit>
#include <cstring>

namespace mico {

static_assert(std::endian::native == std::endian::little,
              "serializer assumes a little-endian host");

namespace {

class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u16(uint16_t v) { raw(&v, 2); }
  void u32(uint32_t v) { raw(&v, 4); }
  void i32(int32_t v) { raw(&v, 4); }
  void f32(float v) { raw(&v, 4); }
  void bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void str(const std::string& s) {
    u16(static_cast<uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void shape(const Shape& s) {
    u8(s.rank());
    for (uint32_t d : s.dims()) u32(d);
  }
  void pad_to(size_t align) {
    while (out_.size() % align != 0) out_.push_back(0);
  }
  size_t size() const { return out_.size(); }
  std::vector<uint8_t> take() { return std::move(out_); }

 private:
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<uint8_t> out_;
};

#define MICO_PARSE_NEED(n)                                               \
  do {                                                                   \
    if ((n) > data_.size() - pos_)                                       \
      return Error{ErrCode::TruncatedFile, "file ends inside a record"}; \
  } while (0)

// Every read is bounds-checked against the byte range handed to parse_model;
// a short or corrupt file surfaces as an error, never as an out-of-range read.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  Result<uint8_t> u8() {
    MICO_PARSE_NEED(1);
    return data_[pos_++];
  }
  Result<uint16_t> u16() { return scalar<uint16_t>(); }
  Result<uint32_t> u32() { return scalar<uint32_t>(); }
  Result<int32_t> i32() { return scalar<int32_t>(); }
  Result<float> f32() { return scalar<float>(); }

  Result<std::string> str() {
    auto len = u16();
    if (!len.ok()) return len.error();
    MICO_PARSE_NEED(size_t{len.value()});
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len.value());
    pos_ += len.value();
    return s;
  }

  Result<Shape> shape() {
    auto rank = u8();
    if (!rank.ok()) return rank.error();
    if (rank.value() > kMaxRank)
      return Result<Shape>(ErrCode::MalformedRecord,
                           "shape rank " + std::to_string(rank.value()) + " exceeds 4");
    std::array<uint32_t, kMaxRank> dims{};
    for (uint8_t i = 0; i < rank.value(); ++i) {
      auto d = u32();
      if (!d.ok()) return d.error();
      dims[i] = d.value();
    }
    return Shape::from({dims.data(), rank.value()});
  }

  Status skip(size_t n) {
    MICO_PARSE_NEED(n);
    pos_ += n;
    return Status{};
  }

  Result<std::span<const uint8_t>> view(size_t offset, size_t length) {
    if (offset > data_.size() || length > data_.size() - offset)
      return Result<std::span<const uint8_t>>(ErrCode::TruncatedFile,
                                              "blob range extends past end of file");
    return data_.subspan(offset, length);
  }

  size_t pos() const { return pos_; }

 private:
  template <typename T>
  Result<T> scalar() {
    MICO_PARSE_NEED(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

#undef MICO_PARSE_NEED

#define MICO_READ(var, expr)                  \
  auto var##_r = (expr);                      \
  if (!var##_r.ok()) return var##_r.error();  \
  auto var = var##_r.take();

#define MICO_CHECK(expr)                               \
  do {                                                 \
    ::mico::Status mico_s_ = (expr);                   \
    if (!mico_s_.ok()) return Error{mico_s_.error()};  \
  } while (0)

}  // namespace

Result<std::vector<uint8_t>> serialize_model(const Model& model) {
  auto report = validate_model(model);
  if (!report.ok())
    return Result<std::vector<uint8_t>>(
        ErrCode::InvalidModel,
        "model failed validation: " + report.violations.front().code + " (" +
            report.violations.front().detail + ")");

  // The buffer table stores absolute file offsets, so lay out the variable
  // sections once with placeholder offsets to learn the blob section start.
  auto emit = [&model](const std::vector<uint32_t>& blob_offsets) {
    ByteWriter w;
    w.bytes(std::span<const uint8_t>(kMicoMagic, 4));
    w.u16(kMicoVersion);
    w.u16(0);  // flags
    w.u32(static_cast<uint32_t>(model.tensors.size()));
    w.u32(static_cast<uint32_t>(model.ops.size()));
    w.u32(static_cast<uint32_t>(model.buffers.size()));
    w.u32(static_cast<uint32_t>(model.inputs.size()));
    w.u32(static_cast<uint32_t>(model.outputs.size()));
    w.u32(static_cast<uint32_t>(model.metadata.size()));

    for (const TensorSpec& t : model.tensors) {
      w.str(t.name);
      w.u8(static_cast<uint8_t>(t.dtype));
      w.u8(static_cast<uint8_t>(t.role));
      w.shape(t.shape);
      w.u8(t.quant ? 1 : 0);
      if (t.quant) {
        w.f32(t.quant->scale);
        w.i32(t.quant->zero_point);
      }
      if (t.role == TensorRole::Const) w.u32(t.buffer_index);
    }

    for (const OpEntry& op : model.ops) {
      w.u8(static_cast<uint8_t>(op.opcode));
      w.u8(static_cast<uint8_t>(op.inputs.size()));
      for (uint32_t idx : op.inputs) w.u32(idx);
      w.u8(static_cast<uint8_t>(op.outputs.size()));
      for (uint32_t idx : op.outputs) w.u32(idx);
      w.i32(op.params.stride_h);
      w.i32(op.params.stride_w);
      w.u8(static_cast<uint8_t>(op.params.padding));
      w.u8(static_cast<uint8_t>(op.params.activation));
      w.i32(op.params.filter_h);
      w.i32(op.params.filter_w);
      w.i32(op.params.depth_multiplier);
      w.i32(op.params.axis);
      w.shape(op.params.new_shape);
    }

    for (size_t i = 0; i < model.buffers.size(); ++i) {
      w.u32(blob_offsets.empty() ? 0 : blob_offsets[i]);
      w.u32(static_cast<uint32_t>(model.buffers[i].size()));
    }

    for (uint32_t idx : model.inputs) w.u32(idx);
    for (uint32_t idx : model.outputs) w.u32(idx);

    for (const auto& [key, blob] : model.metadata) {
      w.str(key);
      w.u32(static_cast<uint32_t>(blob.size()));
      w.bytes(blob.bytes());
    }
    return w;
  };

  // First pass: compute blob offsets from the section layout.
  ByteWriter probe = emit({});
  size_t cursor = align_up(probe.size(), kBlobAlign);
  std::vector<uint32_t> blob_offsets(model.buffers.size());
  for (size_t i = 0; i < model.buffers.size(); ++i) {
    cursor = align_up(cursor, kBlobAlign);
    blob_offsets[i] = static_cast<uint32_t>(cursor);
    cursor += model.buffers[i].size();
  }

  // Second pass: identical layout with real offsets, then the blob section.
  ByteWriter w = emit(blob_offsets);
  for (const ConstBlob& b : model.buffers) {
    w.pad_to(kBlobAlign);
    w.bytes(b.bytes());
  }
  return w.take();
}

Result<Model> parse_model(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMicoMagic, 4) != 0)
    return Result<Model>(ErrCode::BadMagic, "not a .mico file");
  MICO_CHECK(r.skip(4));

  Model model;
  MICO_READ(version, r.u16());
  if (version != kMicoVersion)
    return Result<Model>(ErrCode::UnsupportedVersion,
                         "file version " + std::to_string(version) + ", expected " +
                             std::to_string(kMicoVersion));
  model.version = version;
  MICO_READ(flags, r.u16());
  if (flags != 0)
    return Result<Model>(ErrCode::MalformedRecord, "nonzero header flags");

  MICO_READ(n_tensors, r.u32());
  MICO_READ(n_ops, r.u32());
  MICO_READ(n_buffers, r.u32());
  MICO_READ(n_inputs, r.u32());
  MICO_READ(n_outputs, r.u32());
  MICO_READ(n_metadata, r.u32());

  // Each record occupies at least one byte, so absurd counts cannot be
  // consistent with the file size; reject them before any loop runs.
  const uint64_t total_count =
      uint64_t{n_tensors} + n_ops + n_buffers + n_inputs + n_outputs + n_metadata;
  if (total_count > bytes.size())
    return Result<Model>(ErrCode::MalformedRecord, "record counts exceed file size");

  auto check_tensor_index = [&](uint32_t idx) -> Status {
    if (idx >= n_tensors)
      return Status(ErrCode::IndexOutOfRange,
                    "tensor index " + std::to_string(idx) + " out of range (" +
                        std::to_string(n_tensors) + " tensors)");
    return Status{};
  };

  for (uint32_t i = 0; i < n_tensors; ++i) {
    TensorSpec t;
    MICO_READ(name, r.str());
    t.name = std::move(name);
    MICO_READ(dtype, r.u8());
    if (dtype > static_cast<uint8_t>(DType::I32))
      return Result<Model>(ErrCode::MalformedRecord,
                           "tensor " + std::to_string(i) + " has unknown dtype");
    t.dtype = static_cast<DType>(dtype);
    MICO_READ(role, r.u8());
    if (role > static_cast<uint8_t>(TensorRole::Intermediate))
      return Result<Model>(ErrCode::MalformedRecord,
                           "tensor " + std::to_string(i) + " has unknown role");
    t.role = static_cast<TensorRole>(role);
    MICO_READ(shape, r.shape());
    t.shape = shape;
    MICO_READ(has_quant, r.u8());
    if (has_quant > 1)
      return Result<Model>(ErrCode::MalformedRecord,
                           "tensor " + std::to_string(i) + " has invalid quant flag");
    if (has_quant) {
      MICO_READ(scale, r.f32());
      MICO_READ(zero_point, r.i32());
      t.quant = QuantParams{scale, zero_point};
    }
    if (t.role == TensorRole::Const) {
      MICO_READ(buffer_index, r.u32());
      if (buffer_index >= n_buffers)
        return Result<Model>(ErrCode::IndexOutOfRange,
                             "tensor " + std::to_string(i) + " references buffer " +
                                 std::to_string(buffer_index) + " of " +
                                 std::to_string(n_buffers));
      t.buffer_index = buffer_index;
    }
    model.tensors.push_back(std::move(t));
  }

  for (uint32_t i = 0; i < n_ops; ++i) {
    OpEntry op;
    MICO_READ(opcode, r.u8());
    if (opcode >= kOpcodeCount)
      return Result<Model>(ErrCode::MalformedRecord,
                           "op " + std::to_string(i) + " has unknown opcode " +
                               std::to_string(opcode));
    op.opcode = static_cast<Opcode>(opcode);
    MICO_READ(n_in, r.u8());
    for (uint8_t k = 0; k < n_in; ++k) {
      MICO_READ(idx, r.u32());
      MICO_CHECK(check_tensor_index(idx));
      op.inputs.push_back(idx);
    }
    MICO_READ(n_out, r.u8());
    for (uint8_t k = 0; k < n_out; ++k) {
      MICO_READ(idx, r.u32());
      MICO_CHECK(check_tensor_index(idx));
      op.outputs.push_back(idx);
    }
    MICO_READ(stride_h, r.i32());
    MICO_READ(stride_w, r.i32());
    op.params.stride_h = stride_h;
    op.params.stride_w = stride_w;
    MICO_READ(padding, r.u8());
    if (padding > 1)
      return Result<Model>(ErrCode::MalformedRecord,
                           "op " + std::to_string(i) + " has unknown padding");
    op.params.padding = static_cast<Padding>(padding);
    MICO_READ(activation, r.u8());
    if (activation > 1)
      return Result<Model>(ErrCode::MalformedRecord,
                           "op " + std::to_string(i) + " has unknown activation");
    op.params.activation = static_cast<Activation>(activation);
    MICO_READ(filter_h, r.i32());
    MICO_READ(filter_w, r.i32());
    MICO_READ(depth_multiplier, r.i32());
    MICO_READ(axis, r.i32());
    op.params.filter_h = filter_h;
    op.params.filter_w = filter_w;
    op.params.depth_multiplier = depth_multiplier;
    op.params.axis = axis;
    MICO_READ(new_shape, r.shape());
    op.params.new_shape = new_shape;
    model.ops.push_back(std::move(op));
  }

  struct BufferRecord {
    uint32_t offset;
    uint32_t length;
  };
  std::vector<BufferRecord> buffer_records;
  for (uint32_t i = 0; i < n_buffers; ++i) {
    MICO_READ(offset, r.u32());
    MICO_READ(length, r.u32());
    if (offset % kBlobAlign != 0)
      return Result<Model>(ErrCode::MalformedRecord,
                           "buffer " + std::to_string(i) + " blob offset not 16-byte aligned");
    buffer_records.push_back({offset, length});
  }

  for (uint32_t i = 0; i < n_inputs; ++i) {
    MICO_READ(idx, r.u32());
    MICO_CHECK(check_tensor_index(idx));
    model.inputs.push_back(idx);
  }
  for (uint32_t i = 0; i < n_outputs; ++i) {
    MICO_READ(idx, r.u32());
    MICO_CHECK(check_tensor_index(idx));
    model.outputs.push_back(idx);
  }

  for (uint32_t i = 0; i < n_metadata; ++i) {
    MICO_READ(key, r.str());
    for (const auto& [existing, blob] : model.metadata)
      if (existing == key)
        return Result<Model>(ErrCode::MalformedRecord, "duplicate metadata key \"" + key + "\"");
    MICO_READ(len, r.u32());
    auto value = r.view(r.pos(), len);
    if (!value.ok()) return value.error();
    MICO_CHECK(r.skip(len));
    model.metadata.emplace_back(std::move(key), ConstBlob(value.value()));
  }

  // Const data stays where the file put it: buffers are views into `bytes`.
  for (uint32_t i = 0; i < n_buffers; ++i) {
    auto view = r.view(buffer_records[i].offset, buffer_records[i].length);
    if (!view.ok()) return view.error();
    model.buffers.emplace_back(view.value());
  }

  return model;
}

}  // namespace mico
