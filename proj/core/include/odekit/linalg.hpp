#pragma once

#include "odekit/types.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <memory>
#include <functional>
#include <limits>
#include <utility>

namespace odekit {

using SparseMatrix = Eigen::SparseMatrix<double>;

/**
 * @brief Partial-pivoting LU of a square matrix.
 *
 * Large matrices with few nonzeros go through a sparse LU; factors and
 * pivots are then left empty.
 */
struct LUFactorization {
  Matrix factors;             // packed unit-lower L and U
  std::vector<int> pivots;    // row i of P*A is row pivots[i] of A
  Eigen::PartialPivLU<Matrix> lu;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> sparse;
  std::size_t n = 0;
  std::size_t size() const { return n; }
  bool is_sparse() const { return bool(sparse); }
};

/** @brief Matrices at least this large with at most 5% nonzeros use the sparse path. */
inline constexpr Eigen::Index kSparseLUMinSize = 256;

/** @brief Throws SingularMatrixError when a pivot falls below n*eps*||A||_inf. */
LUFactorization lu_factor(const Matrix& A);
Vector lu_solve(const LUFactorization& f, const Vector& b);
/** @brief Solves A^T x = b with the same factors. */
Vector lu_solve_transpose(const LUFactorization& f, const Vector& b);
Matrix lu_solve(const LUFactorization& f, const Matrix& B);

/** @brief Column j is perturbed by rel * max(|u_j|, floor_rel * ||u||_inf, floor_abs). */
struct FDParams {
  double rel = std::sqrt(std::numeric_limits<double>::epsilon());
  double floor_rel = 0.1;
  double floor_abs = 1.0;  // typical magnitude of a component
};

using VectorMap = std::function<Vector(const Vector&)>;

/** @brief One-sided differences, one column per variable. */
Matrix fd_jacobian(const VectorMap& f, const Vector& u, const FDParams& fd = {});
Matrix fd_jacobian(const std::function<Vector(double, const Vector&)>& f, double t, const Vector& u,
                   const FDParams& fd = {});

struct Problem;

struct JacobianReport {
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  std::pair<std::size_t, std::size_t> worst_entry{0, 0};
  std::vector<std::pair<std::size_t, std::size_t>> flagged;
  Matrix fd_matrix;
  Matrix user_matrix;
};

/** @brief Compares the user ijacobian with shift*FD(F_u') + FD(F_u). */
JacobianReport jacobian_verify(const Problem& p, double t, const Vector& u, const Vector& udot, double shift,
                               double tol, const FDParams& fd = {});

}  // namespace odekit
