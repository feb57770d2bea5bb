#pragma once

#include <stdexcept>
#include <string>

namespace levykac {

/// Thrown when an operation is called outside its contract.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical result cannot be certified to the requested
/// accuracy (quadrature residual too large, untrusted frequency cutoff, ...).
class CertificationError : public std::runtime_error {
 public:
  CertificationError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace levykac
