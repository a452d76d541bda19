#pragma once

#include <stdexcept>
#include <string>

namespace thermoform {

/// Base for every failure the library reports. The CLI maps the concrete
/// kind onto its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double requested, double cap)
      : Error(what + ": requested " + std::to_string(requested) + " exceeds cap " +
              std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  double requested() const { return requested_; }
  double cap() const { return cap_; }

 private:
  double requested_;
  double cap_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class NotConverged : public NumericError {
 public:
  NotConverged(const std::string& what, int iterations)
      : NumericError(what + " did not converge after " + std::to_string(iterations) +
                     " iterations"),
        iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// Perron eigenmatrix is only semi-definite; the input tuple is reducible.
class DegenerateEigenmatrix : public NumericError {
 public:
  DegenerateEigenmatrix(const std::string& what, double min_eigenvalue)
      : NumericError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class SingularMatrix : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnsupportedPrecision : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace thermoform
