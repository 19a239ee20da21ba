#pragma once

#include <stdexcept>
#include <string>

namespace qosalloc {

/// Bad or inconsistent configuration (harness exit code 1).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Queue utilisation at or above one.
class InstabilityError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An iterative solver did not reach its tolerance (harness exit code 3).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace qosalloc
