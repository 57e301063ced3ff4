#pragma once

#include <stdexcept>
#include <string>

namespace anchoropt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document; the message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Fisher information is singular (unlocalizable geometry or rank-deficient block).
class SingularError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Enumeration would exceed the configured work budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace anchoropt
