#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mico {

enum class ErrCode : uint8_t {
  // serialization
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  IndexOutOfRange,
  MalformedRecord,
  InvalidModel,
  // arena
  CapacityTooSmall,
  ArenaExhausted,
  TempOutstanding,
  BadReset,
  // planner
  BlobMalformed,
  CountMismatch,
  PlanInvalid,
  TooLarge,
  // kernels
  ShapeMismatch,
  QuantMismatch,
  // registry / interpreter
  DuplicateOpcode,
  UnsupportedOperator,
  PhaseError,
  PrepareFailed,
  EvalFailed,
  // converter
  ParseError,
  CycleOrOrderError,
  UnknownOpcode,
  ShapeInferenceError,
  UnsupportedOp,
  EmptyCalibration,
  // tooling
  IoError,
};

const char* err_code_name(ErrCode code);

struct Error {
  ErrCode code;
  std::string message;
};

/// Success-or-error outcome for operations without a payload.
class Status {
 public:
  Status() = default;
  Status(ErrCode code, std::string message) : err_(Error{code, std::move(message)}) {}
  Status(Error err) : err_(std::move(err)) {}

  bool ok() const { return !err_.has_value(); }
  const Error& error() const { return *err_; }
  ErrCode code() const { return err_->code; }

 private:
  std::optional<Error> err_;
};

/// Value-or-error outcome. The payload is only accessible when ok().
template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error err) : v_(std::move(err)) {}
  Result(ErrCode code, std::string message) : v_(Error{code, std::move(message)}) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  T& value() { return std::get<T>(v_); }
  const T& value() const { return std::get<T>(v_); }
  T&& take() { return std::move(std::get<T>(v_)); }
  const Error& error() const { return std::get<Error>(v_); }
  Status status() const {
    if (ok()) return Status{};
    return Status(error().code, error().message);
  }

 private:
  std::variant<T, Error> v_;
};

/// One broken invariant found by a validation pass. Violations are data,
/// not errors: a report full of them is still a successful validation run.
struct Violation {
  std::string code;    // stable machine-readable tag, e.g. "use-before-def"
  std::string detail;  // human-readable context
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

}  // namespace mico

#define MICO_RETURN_IF_ERROR(expr)            \
  do {                                        \
    ::mico::Status mico_status_ = (expr);     \
    if (!mico_status_.ok()) return mico_status_; \
  } while (0)
