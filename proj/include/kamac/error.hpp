#pragma once

#include <stdexcept>
#include <string>

namespace kamac {

// Malformed input text: unreadable file, JSON syntax, bad command-line value.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input data (pmf does not sum to one, unsorted alphabet, ...).
// `path` names the offending field when the error comes from a scenario file.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, std::string path = {})
      : std::invalid_argument(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// An enumeration would exceed the desk-scale limits of the exact algorithms.
class SizeCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A point outside the domain of a function or a derivative.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative solver did not reach its stopping tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kamac
