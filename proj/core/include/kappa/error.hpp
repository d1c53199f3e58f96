#pragma once

#include <stdexcept>
#include <string>

namespace kappa {

/// A parameter lies outside the domain of the operation (alpha <= 1, q not in (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative numeric procedure could not produce a result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-supplied quantities are mutually inconsistent (e.g. a mean that
/// would put more than the whole total above the threshold).
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo run failed; the message carries the distribution, n and run index.
class McRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kappa
