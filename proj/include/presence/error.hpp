#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace presence {

enum class ErrorCode {
  InvalidTemplate,
  InvalidConfig,
  FatalValidation,
  ModelIncomplete,
  DuplicateRecord,
  RecordNotFound,
  SchemaMismatch,
  ParseError,
  MissingFile,
  EmptyInput,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception. `code()` is
// stable and machine-readable; `what()` carries a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace presence
