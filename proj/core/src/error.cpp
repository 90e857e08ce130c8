#include "hidsq/error.hpp"

namespace hidsq {

ParseError::ParseError(std::string source, std::size_t location, const std::string& detail)
    : Error(source + ":" + std::to_string(location) + ": " + detail),
      source_(std::move(source)),
      location_(location) {}

IoError::IoError(std::string path, const std::string& detail)
    : Error(path + ": " + detail), path_(std::move(path)) {}

ProtocolError::ProtocolError(const std::string& detail, std::string diagnostics)
    : Error(diagnostics.empty() ? detail : detail + " [child stderr: " + diagnostics + "]"),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace hidsq
