#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace poisfock {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside its documented domain (lambda <= 0, site out of range, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A functional produced a non-finite value or failed to evaluate (e.g. division by zero).
class EvaluationError : public Error {
public:
  using Error::Error;
};

/// Declared-envelope expectation requested for a functional without an envelope.
class MissingEnvelopeError : public Error {
public:
  using Error::Error;
};

/// DSL parse failure. `position` is the 0-based byte offset into the source.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// Two functionals were expected to share a monotonicity partition and do not.
class PartitionMismatch : public Error {
public:
  using Error::Error;
};

/// A functional declared monotone is not, with the lattice point that shows it.
class MonotonicityViolation : public Error {
public:
  MonotonicityViolation(const std::string& message, std::vector<int> witness, std::size_t site)
      : Error(message), witness_(std::move(witness)), site_(site) {}

  const std::vector<int>& witness() const noexcept { return witness_; }
  std::size_t site() const noexcept { return site_; }

private:
  std::vector<int> witness_;
  std::size_t site_;
};

}  // namespace poisfock
