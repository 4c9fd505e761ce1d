#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace densfact {

enum class ErrorKind {
  kDomain,
  kCapacity,
  kConvergence,
  kHypothesis,
  kInfeasible,
  kShape,
  kInternalAlarm,
};

/// Base class for every error raised by the library. The kind drives the
/// command-line exit-code contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

/// An enumeration guard (sign cube, facet enumeration, net size) was exceeded.
struct CapacityError : Error {
  explicit CapacityError(const std::string& what) : Error(ErrorKind::kCapacity, what) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what)
      : Error(ErrorKind::kConvergence, what) {}
};

/// The caller supplied data that violates a stated hypothesis.
struct HypothesisError : Error {
  explicit HypothesisError(const std::string& what)
      : Error(ErrorKind::kHypothesis, what) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kShape, what) {}
};

/// A guarantee that holds mathematically failed numerically.
struct InternalAlarm : Error {
  explicit InternalAlarm(const std::string& what)
      : Error(ErrorKind::kInternalAlarm, what) {}
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kHypothesis: return "hypothesis";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kInternalAlarm: return "internal-alarm";
  }
  return "unknown";
}

}  // namespace densfact
