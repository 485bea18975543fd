#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace odekit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/** @brief Base class for all errors raised by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief Inconsistent or unsupported configuration, detected before stepping. */
class ConfigError : public Error {
 public:
  using Error::Error;
};

/** @brief A callback produced NaN or Inf. Recoverable inside a step. */
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& where, std::size_t index)
      : Error(where + ": non-finite entry at index " + std::to_string(index)), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/** @brief Pivot below the singularity threshold during LU. */
class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(std::size_t pivot)
      : Error("matrix singular to working precision at pivot " + std::to_string(pivot)), pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

/** @brief Throws NonFiniteError if any entry of v is NaN or Inf. */
void check_finite(const Vector& v, const char* where);
bool all_finite(const Vector& v);

}  // namespace odekit
