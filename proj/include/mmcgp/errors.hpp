#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mmcgp {

/// Bad argument: wrong dimension, non-finite input, invalid parameter.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked on an object that cannot support it (empty store, empty histogram).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The true model produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, Eigen::VectorXd x)
      : std::runtime_error(what), input_(std::move(x)) {}
  const Eigen::VectorXd& input() const { return input_; }

 private:
  Eigen::VectorXd input_;
};

/// A local surrogate could not be built (covariance factorization failed).
class SurrogateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmcgp
