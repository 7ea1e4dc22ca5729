#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kfunc {

enum class ErrorKind {
  InvalidArgument,
  GridMismatch,
  DomainViolation,
  RangeViolation,
  ZeroDenominator,
  ZeroFPrime,
  ZeroK,
  ZeroQIntegral,
  ZeroNorm,
  ConstraintMismatch,
  PathDomainViolation,
  NotConverged,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::ZeroFPrime: return "ZeroFPrime";
    case ErrorKind::ZeroK: return "ZeroK";
    case ErrorKind::ZeroQIntegral: return "ZeroQIntegral";
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::ConstraintMismatch: return "ConstraintMismatch";
    case ErrorKind::PathDomainViolation: return "PathDomainViolation";
    case ErrorKind::NotConverged: return "NotConverged";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message always starts with the
/// kind name; node-local failures also carry the offending node index.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> node = std::nullopt)
      : std::runtime_error(compose(kind, what, node)), kind_(kind), node_(node) {}

  ErrorKind kind() const { return kind_; }
  std::optional<std::size_t> node() const { return node_; }

 private:
  static std::string compose(ErrorKind kind, const std::string& what,
                             std::optional<std::size_t> node) {
    std::string msg(to_string(kind));
    msg += ": ";
    msg += what;
    if (node) msg += " (node " + std::to_string(*node) + ")";
    return msg;
  }

  ErrorKind kind_;
  std::optional<std::size_t> node_;
};

}  // namespace kfunc
