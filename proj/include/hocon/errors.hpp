#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hocon {

enum class ErrorKind {
  Configuration,
  Usage,
  Evaluation,
  UnsupportedConstraint,
  InconsistentState,
  InconsistentDynamics,
  Ambiguity,
  ModelDomain,
  Projection,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::Usage: return "usage error";
    case ErrorKind::Evaluation: return "evaluation error";
    case ErrorKind::UnsupportedConstraint: return "unsupported constraint";
    case ErrorKind::InconsistentState: return "inconsistent state";
    case ErrorKind::InconsistentDynamics: return "inconsistent dynamics";
    case ErrorKind::Ambiguity: return "ambiguous dynamics";
    case ErrorKind::ModelDomain: return "model domain violation";
    case ErrorKind::Projection: return "projection failure";
  }
  return "error";
}

/// Base of every error the engine raises. `rows()` names the constraint rows
/// (or guards) involved, when there are any.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::string> rows = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what),
        rows_(std::move(rows)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }
  const std::vector<std::string>& rows() const noexcept { return rows_; }

 private:
  ErrorKind kind_;
  std::string detail_;
  std::vector<std::string> rows_;
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& w) : Error(ErrorKind::Configuration, w) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& w) : Error(ErrorKind::Usage, w) {}
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& w) : Error(ErrorKind::Evaluation, w) {}
};

class UnsupportedConstraintError : public Error {
 public:
  explicit UnsupportedConstraintError(const std::string& w)
      : Error(ErrorKind::UnsupportedConstraint, w) {}
};

class InconsistentStateError : public Error {
 public:
  InconsistentStateError(const std::string& w, std::vector<std::string> rows)
      : Error(ErrorKind::InconsistentState, w, std::move(rows)) {}
};

class InconsistentDynamicsError : public Error {
 public:
  InconsistentDynamicsError(const std::string& w, double residual, std::vector<std::string> rows = {})
      : Error(ErrorKind::InconsistentDynamics, w, std::move(rows)), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class AmbiguityError : public Error {
 public:
  AmbiguityError(const std::string& w, int nullspace_dim)
      : Error(ErrorKind::Ambiguity, w), nullspace_dim_(nullspace_dim) {}
  /// Dimension of the set of accelerations compatible with the equations.
  int nullspace_dim() const noexcept { return nullspace_dim_; }

 private:
  int nullspace_dim_;
};

class ModelDomainError : public Error {
 public:
  ModelDomainError(const std::string& guard, const std::string& w)
      : Error(ErrorKind::ModelDomain, guard + ": " + w, {guard}), guard_(guard) {}
  const std::string& guard() const noexcept { return guard_; }

 private:
  std::string guard_;
};

class ProjectionError : public Error {
 public:
  explicit ProjectionError(const std::string& w) : Error(ErrorKind::Projection, w) {}
};

}  // namespace hocon
