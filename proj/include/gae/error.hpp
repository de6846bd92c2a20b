#pragma once

#include <stdexcept>
#include <string>

namespace gae {

/// A documented precondition was violated: shape mismatch, index out of
/// range, overlapping rosters, self-pair queries and similar caller errors.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data (match logs, model files, rating files) could not be used.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimisation produced a non-finite value or a statistic is undefined.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gae
