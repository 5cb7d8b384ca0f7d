#include "mico/tensor_file.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace mico {

std::vector<uint8_t> encode_tensor(DType dtype, const Shape& shape,
                                   std::span<const uint8_t> data) {
  std::vector<uint8_t> out(kMtenHeaderSize);
  std::memcpy(out.data(), kMtenMagic, 4);
  out[4] = static_cast<uint8_t>(dtype);
  out[5] = shape.rank();
  out[6] = 0;
  out[7] = 0;
  uint32_t dims[4] = {0, 0, 0, 0};
  for (uint8_t i = 0; i < shape.rank(); ++i) dims[i] = shape.dim(i);
  std::memcpy(out.data() + 8, dims, 16);
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

Result<TensorFile> decode_tensor(std::span<const uint8_t> bytes) {
  using R = Result<TensorFile>;
  if (bytes.size() < kMtenHeaderSize) return R(ErrCode::TruncatedFile, "tensor file too short");
  if (std::memcmp(bytes.data(), kMtenMagic, 4) != 0)
    return R(ErrCode::BadMagic, "not an MTEN tensor file");
  TensorFile tf;
  if (bytes[4] > static_cast<uint8_t>(DType::I32))
    return R(ErrCode::MalformedRecord, "tensor file has unknown dtype");
  tf.dtype = static_cast<DType>(bytes[4]);
  const uint8_t rank = bytes[5];
  if (rank > kMaxRank) return R(ErrCode::MalformedRecord, "tensor file rank exceeds 4");
  uint32_t dims[4];
  std::memcpy(dims, bytes.data() + 8, 16);
  auto shape = Shape::from({dims, rank});
  if (!shape.ok()) return shape.error();
  tf.shape = shape.value();
  const size_t payload = tf.shape.elem_count() * dtype_size(tf.dtype);
  if (bytes.size() != kMtenHeaderSize + payload)
    return R(ErrCode::MalformedRecord,
             "tensor file payload is " + std::to_string(bytes.size() - kMtenHeaderSize) +
                 " bytes, expected " + std::to_string(payload));
  tf.data.assign(bytes.begin() + kMtenHeaderSize, bytes.end());
  return tf;
}

Result<std::vector<uint8_t>> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return Result<std::vector<uint8_t>>(ErrCode::IoError, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  if (f.bad()) return Result<std::vector<uint8_t>>(ErrCode::IoError, "read failed: " + path);
  return bytes;
}

Status write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return Status(ErrCode::IoError, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) return Status(ErrCode::IoError, "write failed: " + path);
  return Status{};
}

Result<TensorFile> read_tensor_file(const std::string& path) {
  auto bytes = read_file(path);
  if (!bytes.ok()) return bytes.error();
  return decode_tensor(bytes.value());
}

Status write_tensor_file(const std::string& path, DType dtype, const Shape& shape,
                         std::span<const uint8_t> data) {
  return write_file(path, encode_tensor(dtype, shape, data));
}

Result<TensorFile> read_calibration_file(const std::string& path) {
  using R = Result<TensorFile>;
  auto bytes = read_file(path);
  if (!bytes.ok()) return bytes.error();
  const auto& raw = bytes.value();

  const auto newline = std::find(raw.begin(), raw.end(), uint8_t{'\n'});
  if (newline == raw.end())
    return R(ErrCode::MalformedRecord, path + ": missing calibration header line");
  const std::string header(raw.begin(), newline);

  const size_t space = header.find(' ');
  if (space == std::string::npos)
    return R(ErrCode::MalformedRecord, path + ": header must be \"<dtype> <dims>\"");
  auto dtype = dtype_from_name(header.substr(0, space));
  if (!dtype) return R(ErrCode::MalformedRecord, path + ": unknown dtype in header");

  std::vector<uint32_t> dims;
  size_t pos = space + 1;
  while (pos <= header.size()) {
    const size_t next = header.find('x', pos);
    const std::string part = header.substr(pos, next == std::string::npos ? next : next - pos);
    char* end = nullptr;
    const unsigned long v = std::strtoul(part.c_str(), &end, 10);
    if (part.empty() || *end != '\0' || v == 0)
      return R(ErrCode::MalformedRecord, path + ": bad extent \"" + part + "\"");
    dims.push_back(static_cast<uint32_t>(v));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  auto shape = Shape::from(dims);
  if (!shape.ok()) return shape.error();

  TensorFile tf;
  tf.dtype = *dtype;
  tf.shape = shape.value();
  const size_t payload = tf.shape.elem_count() * dtype_size(tf.dtype);
  const size_t header_len = static_cast<size_t>(newline - raw.begin()) + 1;
  if (raw.size() - header_len != payload)
    return R(ErrCode::MalformedRecord,
             path + ": payload is " + std::to_string(raw.size() - header_len) +
                 " bytes, header promises " + std::to_string(payload));
  tf.data.assign(raw.begin() + header_len, raw.end());
  return tf;
}

Status write_calibration_file(const std::string& path, DType dtype, const Shape& shape,
                              std::span<const uint8_t> data) {
  std::string header = std::string(dtype_name(dtype)) + " ";
  for (uint8_t i = 0; i < shape.rank(); ++i) {
    if (i) header += "x";
    header += std::to_string(shape.dim(i));
  }
  header += "\n";
  std::vector<uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), data.begin(), data.end());
  return write_file(path, bytes);
}

}  // namespace mico
