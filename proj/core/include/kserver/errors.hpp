#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kserver {

// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a value constraint (nonpositive weight,
// non-unit weights passed to a paging-only solver, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Instance too large for the requested solver.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace kserver
