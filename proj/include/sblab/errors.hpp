#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sblab {

// Root of the library's exception hierarchy.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (expression grammar, model/candidate files).
struct ParseError : Error {
  using Error::Error;
};

struct SyntaxError : ParseError {
  SyntaxError(std::size_t offset, const std::string& message)
      : ParseError("syntax error at offset " + std::to_string(offset) + ": " + message),
        offset(offset),
        message(message) {}
  std::size_t offset;
  std::string message;
};

struct UnknownFunctionError : SyntaxError {
  UnknownFunctionError(std::size_t offset, const std::string& name)
      : SyntaxError(offset, "unknown function '" + name + "'"), name(name) {}
  std::string name;
};

// Numeric failures during evaluation or analysis.
struct NumericError : Error {
  using Error::Error;
};

struct DomainError : NumericError {
  DomainError(const std::string& node, double value)
      : NumericError("domain error in " + node + " at value " + std::to_string(value)),
        node(node),
        value(value) {}
  std::string node;
  double value;
};

struct UnboundVariableError : NumericError {
  explicit UnboundVariableError(const std::string& name)
      : NumericError("unbound variable '" + name + "'"), name(name) {}
  std::string name;
};

struct SingularJacobianError : NumericError {
  using NumericError::NumericError;
};

struct NonConvergenceError : NumericError {
  using NumericError::NumericError;
};

struct SingularHessianError : NumericError {
  using NumericError::NumericError;
};

struct SingularEpsMatrixError : NumericError {
  using NumericError::NumericError;
};

struct NotClosedError : NumericError {
  explicit NotClosedError(double max_residual)
      : NumericError("flux 1-form not closed: max defining residual " +
                     std::to_string(max_residual)),
        max_residual(max_residual) {}
  double max_residual;
};

struct PathDisagreementError : NumericError {
  explicit PathDisagreementError(double disagreement)
      : NumericError("path-dependent flux reconstruction: disagreement " +
                     std::to_string(disagreement)),
        disagreement(disagreement) {}
  double disagreement;
};

struct NotHyperbolicError : NumericError {
  using NumericError::NumericError;
};

struct DegenerateLambda0Error : NumericError {
  using NumericError::NumericError;
};

// Structural misuse (wrong field count, two-field op on a non-two-field system).
struct DimensionMismatchError : Error {
  using Error::Error;
};

}  // namespace sblab
