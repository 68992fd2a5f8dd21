#pragma once

#include <stdexcept>
#include <string>

namespace valent {

// Argument outside the mathematical domain of an operation (p <= 1 for a
// divergent series, alpha <= 1, nonpositive Gamma argument, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Instance too large for an exhaustive oracle.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Input violating a structural contract (relation pattern, composition sum).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Constraint with no feasible solution (e.g. n >= sum of 2 c_i).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace valent
