#pragma once

#include <stdexcept>
#include <string>

namespace clab {

// All library failures derive from clab::Error so callers can catch one type;
// the subclasses let tests and the CLI tell the failure kinds apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric precondition was violated (zero-norm vector, bad parameter range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The input is mathematically degenerate (coincident class means, single class).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Bundle/CSV parse failures.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class LabelMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace clab
