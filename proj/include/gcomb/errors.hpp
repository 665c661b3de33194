#pragma once

#include <stdexcept>
#include <string>

namespace gcomb {

// Invalid arguments or configuration (CLI exit code 2).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition, e.g. applying a node that is not a candidate.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite loss or parameters during training (CLI exit code 4).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Set cover instance with an element no subset contains.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance too large for an exact solver's node limit.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gcomb
