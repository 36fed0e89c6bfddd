#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semvia {

/// Parameter outside the domain on which a model quantity is defined.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A closed-form series (average VIA) does not converge for the given parameters.
class DivergentSeries : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested closed form does not exist for this policy.
class UnsupportedPolicy : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotIrreducible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(double tol, std::size_t iterations)
      : std::runtime_error("stationary solve did not reach tolerance " + std::to_string(tol) +
                           " after " + std::to_string(iterations) + " iterations"),
        tol_(tol),
        iterations_(iterations) {}

  double tol() const noexcept { return tol_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double tol_;
  std::size_t iterations_;
};

}  // namespace semvia
