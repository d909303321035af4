#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pipestash {

enum class ErrorCode {
  kEmptyModules,
  kBadToken,
  kDuplicateSeq,
  kMalformedRecord,
  kKeyConflict,
  kMissingKey,
  kIoFailure,
  kMalformedManifest,
  kEmptyHistory,
};

std::string_view to_string(ErrorCode code);

// All data errors raised by the library. Parsers attach the 1-based line
// number of the offending record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code and line decoration of what().
  const std::string& message() const noexcept { return message_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> line_;
};

}  // namespace pipestash
