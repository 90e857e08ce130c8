#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hidsq {

// Root of every error the library throws on bad input or environment.
// Precondition violations by the caller surface as std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trace text. `location()` is a 1-based line number for UNM input
// and a 1-based token position for ADFA input.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t location, const std::string& detail);

  const std::string& source() const noexcept { return source_; }
  std::size_t location() const noexcept { return location_; }

 private:
  std::string source_;
  std::size_t location_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& detail);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Manifest / configuration / dataset-invariant violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised by pipeline stages that cannot produce a result (empty class, ...).
class PipelineError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

// External-model wire protocol failures (handshake, malformed line, timeout,
// early termination, count mismatch).
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& detail, std::string diagnostics = {});
  // Whatever the child wrote to stderr before the failure.
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

// Bad command-line or run configuration; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace hidsq
