#pragma once

#include <stdexcept>
#include <string>

namespace dk {

enum class ErrorKind {
  InvalidMatrix,
  InconsistentBlocks,
  InvalidChain,
  AsymmetricCoupling,
  SingularDensity,
  UnsupportedClosedForm,
  BeforeInitialTime,
  QuadratureFailure,
  AtCriticalPoint,
  UnderflowRange,
  IntegrationFailure,
  ShapeMismatch,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error thrown by the library. `kind()` lets callers
/// (the CLI in particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Quadrature gave up before reaching the requested tolerance.
class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double value, double achieved_error)
      : Error(ErrorKind::QuadratureFailure, what), value_(value), error_(achieved_error) {}
  double value() const noexcept { return value_; }
  double achieved_error() const noexcept { return error_; }

 private:
  double value_;
  double error_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::InconsistentBlocks: return "InconsistentBlocks";
    case ErrorKind::InvalidChain: return "InvalidChain";
    case ErrorKind::AsymmetricCoupling: return "AsymmetricCoupling";
    case ErrorKind::SingularDensity: return "SingularDensity";
    case ErrorKind::UnsupportedClosedForm: return "UnsupportedClosedForm";
    case ErrorKind::BeforeInitialTime: return "BeforeInitialTime";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::AtCriticalPoint: return "AtCriticalPoint";
    case ErrorKind::UnderflowRange: return "UnderflowRange";
    case ErrorKind::IntegrationFailure: return "IntegrationFailure";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

}  // namespace dk
