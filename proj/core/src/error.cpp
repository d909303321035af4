#include "pipestash/error.hpp"

namespace pipestash {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyModules: return "EmptyModules";
    case ErrorCode::kBadToken: return "BadToken";
    case ErrorCode::kDuplicateSeq: return "DuplicateSeq";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kKeyConflict: return "KeyConflict";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMalformedManifest: return "MalformedManifest";
    case ErrorCode::kEmptyHistory: return "EmptyHistory";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)),
      code_(code),
      message_(message),
      line_(line) {}

}  // namespace pipestash
