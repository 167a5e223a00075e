#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chaos {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating input data (bad file, bad cell, bad shape).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (bad index, B = 0, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Not enough observations for the requested model.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Inner join of series tables produced no common dates.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Something that cannot happen for valid input did happen.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// An iterative method exhausted its budget. Carries the last iterate.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_value,
                 std::vector<double> last_vector, int iterations)
      : Error(what),
        last_value_(last_value),
        last_vector_(std::move(last_vector)),
        iterations_(iterations) {}

  double last_value() const noexcept { return last_value_; }
  const std::vector<double>& last_vector() const noexcept { return last_vector_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_value_;
  std::vector<double> last_vector_;
  int iterations_;
};

/// Least-squares design without full column rank.
class RankDeficient : public Error {
 public:
  RankDeficient(const std::string& what, std::vector<int> columns)
      : Error(what), columns_(std::move(columns)) {}

  /// Indices of the design columns found to be linearly dependent on the rest.
  const std::vector<int>& columns() const noexcept { return columns_; }

 private:
  std::vector<int> columns_;
};

}  // namespace chaos
