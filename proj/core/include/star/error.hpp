#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace star {

enum class ErrorCode {
  MalformedRecord,
  InvalidRecord,
  DanglingReference,
  DuplicateId,
  InvalidRange,
  EmptyText,
  DimensionMismatch,
  SchemeMismatch,
  DegenerateScores,
  EmptyWorkingSet,
  NotAdjacent,
  InconsistentComponents,
  UnparseableQuery,
  KindMismatch,
  InvalidSpec,
  InvalidConfig,
  UnknownMethod,
  ExternalGenerator,
  Io,
};

std::string_view to_string(ErrorCode code);

// Base of every error the engine raises. The code is stable and is what the
// CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::string file, std::size_t line_no, const std::string& reason);

  const std::string& file() const noexcept { return file_; }
  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string file_;
  std::size_t line_no_;
  std::string reason_;
};

class DanglingReference : public Error {
 public:
  // owner is "caption <id>" or "keyframe <timestamp>"
  DanglingReference(std::string owner, std::int64_t primitive_id);

  const std::string& owner() const noexcept { return owner_; }
  std::int64_t primitive_id() const noexcept { return primitive_id_; }

 private:
  std::string owner_;
  std::int64_t primitive_id_;
};

}  // namespace star
