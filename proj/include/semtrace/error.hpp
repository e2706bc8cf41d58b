#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semtrace {

// Base of every error raised by the library. `code()` is a stable
// machine-readable identifier used by the CLI and HTTP layers.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("ParseError", "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("ValidationError", message) {}
};

class UnknownEntity : public Error {
 public:
  explicit UnknownEntity(const std::string& name)
      : Error("UnknownEntity", "unknown entity: " + name) {}
};

class BothUnbound : public Error {
 public:
  BothUnbound() : Error("BothUnbound", "at least one argument must be bound") {}
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("DuplicateId", "document already exists: " + id) {}
};

class UnknownDocument : public Error {
 public:
  explicit UnknownDocument(const std::string& id)
      : Error("UnknownDocument", "unknown document: " + id) {}
};

class UnknownFacetField : public Error {
 public:
  explicit UnknownFacetField(const std::string& field)
      : Error("UnknownFacetField", "unknown facet field: " + field) {}
};

class MonotonicityError : public Error {
 public:
  explicit MonotonicityError(long long time)
      : Error("MonotonicityError",
              "timestamps must be strictly increasing (at Time " +
                  std::to_string(time) + ")"),
        time_(time) {}

  long long time() const noexcept { return time_; }

 private:
  long long time_;
};

class AllWildcardWithoutFlag : public Error {
 public:
  AllWildcardWithoutFlag()
      : Error("AllWildcardWithoutFlag",
              "all-wildcard pattern requires the allow_all flag") {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class FormatVersionError : public Error {
 public:
  explicit FormatVersionError(const std::string& message)
      : Error("FormatVersionError", message) {}
};

class NotAFailedLog : public Error {
 public:
  explicit NotAFailedLog(const std::string& id)
      : Error("NotAFailedLog", "not a failed log: " + id) {}
};

}  // namespace semtrace
