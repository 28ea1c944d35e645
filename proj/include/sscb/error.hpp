#pragma once

#include <stdexcept>
#include <string>

namespace sscb {

// Input vectors whose length does not match the model or environment.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Action, cluster or context index outside its valid range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A module invariant was broken at runtime (e.g. a zero propensity reached the
// gradient estimator). The message names the violated contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Rejected configuration or dataset content.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sscb

namespace sscb {

// A checkpoint does not belong to the configuration it is resumed with.
class ConfigMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sscb
