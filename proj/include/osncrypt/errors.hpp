#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osncrypt {

// Base of every error raised by the library. The CLI maps the three
// categories below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, invalid keys, out-of-range arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

// Input is well formed but refused by a processing policy.
class PolicyError : public Error {
 public:
  using Error::Error;
};

// Internal invariant violated; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

// chaos
class DegenerateOrbit : public InputError {
 public:
  using InputError::InputError;
};
class DivergentOrbit : public InputError {
 public:
  using InputError::InputError;
};
class InsufficientSequence : public InputError {
 public:
  using InputError::InputError;
};
class InvalidKey : public InputError {
 public:
  using InputError::InputError;
};

// codec
class QualityOutOfRange : public InputError {
 public:
  using InputError::InputError;
};

class MalformedBitstream : public InputError {
 public:
  MalformedBitstream(const std::string& what, std::size_t offset)
      : InputError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// cipher / analysis
class GridMismatch : public InputError {
 public:
  using InputError::InputError;
};
class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};
class AlphaOutOfRange : public InputError {
 public:
  using InputError::InputError;
};
class EcuExhausted : public InternalError {
 public:
  using InternalError::InternalError;
};
class DcOutOfRange : public InternalError {
 public:
  using InternalError::InternalError;
};

// policy
class ImageTooLarge : public PolicyError {
 public:
  using PolicyError::PolicyError;
};
class Unsupported : public PolicyError {
 public:
  using PolicyError::PolicyError;
};

}  // namespace osncrypt
