#pragma once

#include <stdexcept>
#include <string>

namespace kacrice {

// Violated precondition (wrong sizes, mismatched ground sets, bad arguments).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input exceeds a hard combinatorial or memory cap.
class SizeLimitError : public ContractError {
 public:
  using ContractError::ContractError;
};

// A model or evaluator cannot provide what was asked (e.g. a derivative order).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model parameters (non-positive spectral density, bad family name).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base class for failures of a numerical procedure; the CLI maps these to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A covariance block is too close to singular to be used.
class ConditioningError : public NumericalError {
 public:
  ConditioningError(const std::string& what, double determinant, double min_eigenvalue)
      : NumericalError(what), determinant_(determinant), min_eigenvalue_(min_eigenvalue) {}

  double determinant() const noexcept { return determinant_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double determinant_;
  double min_eigenvalue_;
};

// Quadrature or iteration did not reach the requested tolerance.
class ToleranceError : public NumericalError {
 public:
  ToleranceError(const std::string& what, double estimate, double achieved_error)
      : NumericalError(what), estimate_(estimate), achieved_error_(achieved_error) {}

  double estimate() const noexcept { return estimate_; }
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double estimate_;
  double achieved_error_;
};

// Circulant embedding produced eigenvalues too negative to clip.
class EmbeddingError : public NumericalError {
 public:
  EmbeddingError(const std::string& what, double min_eigenvalue)
      : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace kacrice
