#pragma once

#include <stdexcept>
#include <string>

namespace qclassical {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class NotUnitaryError : public Error {
 public:
  using Error::Error;
};

class NotCompletelyPositiveError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Raised when a superoperator is singular or its condition number exceeds
/// the invertibility threshold.
class NotInvertibleError : public Error {
 public:
  using Error::Error;
};

class DegenerateObservableError : public Error {
 public:
  using Error::Error;
};

class SequenceError : public Error {
 public:
  using Error::Error;
};

class NotDerivableError : public Error {
 public:
  using Error::Error;
};

class SingularTimeError : public Error {
 public:
  using Error::Error;
};

class ModelParameterError : public Error {
 public:
  using Error::Error;
};

}  // namespace qclassical
