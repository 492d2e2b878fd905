#pragma once

#include <stdexcept>
#include <string>

namespace sigma2 {

// Error taxonomy
// ==============
// InputError      — malformed/unsupported input (bad config key, bad CSV, p out of range).
//                   CLI exit code 1.
// DomainError     — a mathematically *expected* failure: BVP solvability condition
//                   violated, point outside a family's validity interval, evaluation
//                   outside a chart. CLI exit code 2 when it is the verdict of a run.
// NumericsError   — a numerical precondition failed (cone violation in the linearization,
//                   degenerate critical field, non-Morse point). CLI exit code 1.
//
// All carry a short machine-readable `kind` plus a human message.

class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class InputError : public Error {
public:
  InputError(std::string kind, const std::string& msg) : Error(std::move(kind), msg) {}
};

class DomainError : public Error {
public:
  DomainError(std::string kind, const std::string& msg) : Error(std::move(kind), msg) {}
};

class NumericsError : public Error {
public:
  NumericsError(std::string kind, const std::string& msg) : Error(std::move(kind), msg) {}
};

} // namespace sigma2
