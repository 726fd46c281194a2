#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankinfer {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad arguments, unparsable files or formulas.
class InputError : public Error {
 public:
  using Error::Error;
};

// Well-formed input on which a statistical procedure is not defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public InputError {
 public:
  using InputError::InputError;
};

class MissingColumn : public InputError {
 public:
  using InputError::InputError;
};

class FormulaError : public InputError {
 public:
  FormulaError(const std::string& message, std::size_t position)
      : InputError(message), position_(position) {}

  // Zero-based character offset into the formula text.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class RankDeficient : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotPSD : public DomainError {
 public:
  using DomainError::DomainError;
};

class NonFinite : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegeneratePair : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientCategories : public DomainError {
 public:
  using DomainError::DomainError;
};

class MissingValues : public DomainError {
 public:
  using DomainError::DomainError;
};

class EmptyGroup : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace rankinfer
