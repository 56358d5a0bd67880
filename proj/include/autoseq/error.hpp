#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autoseq {

// Base class for every failure raised by the library. Callers that only
// need an exit status can catch this; callers that branch on the failure
// kind catch the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown column, wrong column type, or a row that does not match its
// table's schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Stored data violates the sequence-column rules: non-integer, zero or
// negative values, or a corrupt log entry.
class DataIntegrityError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class AlreadyExistsError : public Error {
 public:
  using Error::Error;
};

// Id arithmetic would leave the 64-bit range. Never wraps.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Malformed script or serialized input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Dump file written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace autoseq
