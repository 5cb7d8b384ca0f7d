#include "mico/status.hpp"

namespace mico {

const char* err_code_name(ErrCode code) {
  switch (code) {
    case ErrCode::BadMagic: return "BadMagic";
    case ErrCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrCode::TruncatedFile: return "TruncatedFile";
    case ErrCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrCode::MalformedRecord: return "MalformedRecord";
    case ErrCode::InvalidModel: return "InvalidModel";
    case ErrCode::CapacityTooSmall: return "CapacityTooSmall";
    case ErrCode::ArenaExhausted: return "ArenaExhausted";
    case ErrCode::TempOutstanding: return "TempOutstanding";
    case ErrCode::BadReset: return "BadReset";
    case ErrCode::BlobMalformed: return "BlobMalformed";
    case ErrCode::CountMismatch: return "CountMismatch";
    case ErrCode::PlanInvalid: return "PlanInvalid";
    case ErrCode::TooLarge: return "TooLarge";
    case ErrCode::ShapeMismatch: return "ShapeMismatch";
    case ErrCode::QuantMismatch: return "QuantMismatch";
    case ErrCode::DuplicateOpcode: return "DuplicateOpcode";
    case ErrCode::UnsupportedOperator: return "UnsupportedOperator";
    case ErrCode::PhaseError: return "PhaseError";
    case ErrCode::PrepareFailed: return "PrepareFailed";
    case ErrCode::EvalFailed: return "EvalFailed";
    case ErrCode::ParseError: return "ParseError";
    case ErrCode::CycleOrOrderError: return "CycleOrOrderError";
    case ErrCode::UnknownOpcode: return "UnknownOpcode";
    case ErrCode::ShapeInferenceError: return "ShapeInferenceError";
    case ErrCode::UnsupportedOp: return "UnsupportedOp";
    case ErrCode::EmptyCalibration: return "EmptyCalibration";
    case ErrCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mico
