#pragma once

#include <stdexcept>
#include <string>

namespace wishfx {

// Input does not satisfy a model invariant or has the wrong shape.
// The CLI maps these to exit code 3.
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedRegimeError : public DataError {
 public:
  using DataError::DataError;
};

// Numerical failures (exit code 4).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public NumericError {
 public:
  SingularityError(const std::string& what, double tau)
      : NumericError(what + " (tau=" + std::to_string(tau) + ")"), tau_(tau) {}
  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

// Moment explosion of an affine transform: the linearized Riccati
// denominator became singular before the requested horizon.
class ExplosionError : public NumericError {
 public:
  ExplosionError(const std::string& what, double tau_star)
      : NumericError(what + " (tau*=" + std::to_string(tau_star) + ")"), tau_star_(tau_star) {}
  double tau_star() const noexcept { return tau_star_; }

 private:
  double tau_star_;
};

class DampingError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SimulationError : public NumericError {
 public:
  SimulationError(const std::string& what, long step)
      : NumericError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace wishfx
