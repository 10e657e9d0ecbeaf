#ifndef MCARTEST_ERROR_HPP
#define MCARTEST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mcar {

// Bad input data: parse failures, shapes, missing roles, degenerate patterns.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A covariance matrix failed the positive-definiteness threshold.
class SingularMatrix : public DataError {
 public:
  SingularMatrix(const std::string& what, double eigenvalue)
      : DataError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

// Malformed scenario / mechanism / distribution description or bad argument.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mcar

#endif
