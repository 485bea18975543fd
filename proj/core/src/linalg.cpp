#include "odekit/linalg.hpp"

#include "odekit/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odekit {

namespace {

bool factor_sparse(const Matrix& A, double threshold, LUFactorization& f) {
  const auto n = A.rows();
  if (n < kSparseLUMinSize) return false;
  std::vector<Eigen::Triplet<double>> nz;
  const auto limit = static_cast<std::size_t>(0.05 * static_cast<double>(n) * static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (A(i, j) != 0.0) {
        if (nz.size() >= limit) return false;
        nz.emplace_back(i, j, A(i, j));
      }
  SparseMatrix S(n, n);
  S.setFromTriplets(nz.begin(), nz.end());
  S.makeCompressed();
  auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu->compute(S);
  if (lu->info() != Eigen::Success) throw SingularMatrixError(0);
  // log|det| against n log(threshold) catches factors that are uniformly tiny
  if (!std::isfinite(lu->logAbsDeterminant()) || lu->logAbsDeterminant() < static_cast<double>(n) * std::log(threshold))
    throw SingularMatrixError(0);
  f.sparse = std::move(lu);
  return true;
}

}  // namespace

LUFactorization lu_factor(const Matrix& A) {
  if (A.rows() != A.cols()) throw Error("lu_factor: matrix is not square");
  const auto n = A.rows();
  LUFactorization f;
  f.n = static_cast<std::size_t>(n);
  if (n == 0) return f;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isfinite(A(i, j))) throw NonFiniteError("lu_factor", static_cast<std::size_t>(i));

  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  const double threshold = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * norm;
  if (factor_sparse(A, threshold, f)) return f;
  f.lu.compute(A);
  f.factors = f.lu.matrixLU();
  for (Eigen::Index k = 0; k < n; ++k)
    if (!(std::abs(f.factors(k, k)) > threshold)) throw SingularMatrixError(static_cast<std::size_t>(k));

  const auto& perm = f.lu.permutationP().indices();
  f.pivots.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) f.pivots[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  return f;
}

Vector lu_solve(const LUFactorization& f, const Vector& b) {
  if (static_cast<std::size_t>(b.size()) != f.size()) throw Error("lu_solve: dimension mismatch");
  if (b.size() == 0) return b;
  if (f.sparse) return f.sparse->solve(b);
  return f.lu.solve(b);
}

Matrix lu_solve(const LUFactorization& f, const Matrix& B) {
  if (static_cast<std::size_t>(B.rows()) != f.size()) throw Error("lu_solve: dimension mismatch");
  if (B.rows() == 0) return B;
  if (f.sparse) return f.sparse->solve(B);
  return f.lu.solve(B);
}

Vector lu_solve_transpose(const LUFactorization& f, const Vector& b) {
  if (static_cast<std::size_t>(b.size()) != f.size()) throw Error("lu_solve_transpose: dimension mismatch");
  if (b.size() == 0) return b;
  if (f.sparse) return f.sparse->transpose().solve(b);
  return f.lu.transpose().solve(b);
}

Matrix fd_jacobian(const VectorMap& f, const Vector& u, const FDParams& fd) {
  const Vector f0 = f(u);
  check_finite(f0, "fd_jacobian");
  const double unorm = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  const double floor = std::max(fd.floor_rel * unorm, fd.floor_abs);
  Matrix J(f0.size(), u.size());
  Vector x = u;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double h = fd.rel * std::max(std::abs(u[j]), floor);
    x[j] = u[j] + h;
    const double hj = x[j] - u[j];  // the step actually representable
    Vector fj = f(x);
    check_finite(fj, "fd_jacobian");
    J.col(j) = (fj - f0) / hj;
    x[j] = u[j];
  }
  return J;
}

Matrix fd_jacobian(const std::function<Vector(double, const Vector&)>& f, double t, const Vector& u,
                   const FDParams& fd) {
  return fd_jacobian([&](const Vector& x) { return f(t, x); }, u, fd);
}

JacobianReport jacobian_verify(const Problem& p, double t, const Vector& u, const Vector& udot, double shift,
                               double tol, const FDParams& fd) {
  JacobianReport rep;
  rep.user_matrix = eval_ijacobian(p, t, u, udot, shift);
  Matrix Fu = fd_jacobian([&](const Vector& x) { return eval_ifunction(p, t, x, udot); }, u, fd);
  rep.fd_matrix = Fu;
  if (shift != 0.0)
    rep.fd_matrix += shift * fd_jacobian([&](const Vector& x) { return eval_ifunction(p, t, u, x); }, udot, fd);

  const double scale = std::max(rep.user_matrix.cwiseAbs().maxCoeff(), rep.fd_matrix.cwiseAbs().maxCoeff());
  const double floor = std::max(scale, 1.0) * 1e-8;
  double worst = -1.0;
  for (Eigen::Index i = 0; i < rep.user_matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < rep.user_matrix.cols(); ++j) {
      const double a = rep.user_matrix(i, j), b = rep.fd_matrix(i, j);
      const double diff = std::abs(a - b);
      const double rel = diff / std::max({std::abs(a), std::abs(b), floor});
      rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
      if (rel > worst) {
        worst = rel;
        rep.worst_entry = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
      }
      if (rel > tol) rep.flagged.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  rep.max_rel_diff = std::max(worst, 0.0);
  return rep;
}

}  // namespace odekit
