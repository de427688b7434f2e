#include "star/error.hpp"

namespace star {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::DegenerateScores: return "DegenerateScores";
    case ErrorCode::EmptyWorkingSet: return "EmptyWorkingSet";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::InconsistentComponents: return "InconsistentComponents";
    case ErrorCode::UnparseableQuery: return "UnparseableQuery";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::ExternalGenerator: return "ExternalGenerator";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

MalformedRecord::MalformedRecord(std::string file, std::size_t line_no, const std::string& reason)
    : Error(ErrorCode::MalformedRecord,
            file + ":" + std::to_string(line_no) + ": " + reason),
      file_(std::move(file)),
      line_no_(line_no),
      reason_(reason) {}

DanglingReference::DanglingReference(std::string owner, std::int64_t primitive_id)
    : Error(ErrorCode::DanglingReference,
            owner + " references unknown primitive " + std::to_string(primitive_id)),
      owner_(std::move(owner)),
      primitive_id_(primitive_id) {}

}  // namespace star
