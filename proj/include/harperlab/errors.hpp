#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace harperlab {

// Bad input: malformed text, out-of-range parameters, violated
// preconditions. The CLI maps these to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that could not be completed (solver failure, no feasible
// parameter, generation failure). The CLI maps these to exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientExpansionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidIntervalError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySetError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotStandardizableError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RequiresExplicitGroupingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateWindowError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class WindowTooFineError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidCoverSequenceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DepthInsufficientError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The expansion rule produced children that overlap, leave the parent, or
// are out of letter order. Carries the offending word in text form.
class StructureViolationError : public ValidationError {
 public:
  StructureViolationError(const std::string& word, const std::string& what)
      : ValidationError("structure violation at word " + word + ": " + what),
        word_(word) {}
  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

class EigenSolverError : public NumericalError {
 public:
  EigenSolverError(std::int64_t p, std::int64_t q, const std::string& what)
      : NumericalError("eigen-solver failure for " + std::to_string(p) + "/" +
                       std::to_string(q) + ": " + what),
        p_(p),
        q_(q) {}
  std::int64_t p() const noexcept { return p_; }
  std::int64_t q() const noexcept { return q_; }

 private:
  std::int64_t p_;
  std::int64_t q_;
};

// No h in the admissible range satisfies the majorant bounds. `binding`
// names the majorant that failed last ("in", "out" or "mid").
class InfeasibleError : public NumericalError {
 public:
  InfeasibleError(const std::string& binding, const std::string& what)
      : NumericalError(what + " (binding majorant: " + binding + ")"),
        binding_(binding) {}
  const std::string& binding() const noexcept { return binding_; }

 private:
  std::string binding_;
};

class GenerationInfeasibleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace harperlab
