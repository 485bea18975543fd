#include "odekit/problem.hpp"

#include <cmath>
#include <memory>

namespace odekit {

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

void check_finite(const Vector& v, const char* where) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw NonFiniteError(where, static_cast<std::size_t>(i));
}

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ConfigError(msg);
}

std::shared_ptr<const LUFactorization> factor_mass(const Matrix& M, std::size_t dim) {
  if (M.rows() != static_cast<Eigen::Index>(dim) || M.cols() != static_cast<Eigen::Index>(dim))
    throw ConfigError("mass matrix dimension does not match problem dimension");
  try {
    return std::make_shared<const LUFactorization>(lu_factor(M));
  } catch (const SingularMatrixError& e) {
    throw ConfigError(std::string("singular mass matrix: ") + e.what());
  }
}

RHSJacobian fd_of(RHSFunction f) {
  return [f](double t, const Vector& u) { return fd_jacobian(f, t, u); };
}

}  // namespace

Problem make_problem(FormKind form, std::size_t dim, const FormCallbacks& cb, const std::optional<Matrix>& mass,
                     std::size_t nparams) {
  require(dim > 0, "problem dimension must be positive");
  Problem p;
  p.dim = dim;
  p.nparams = nparams;
  p.param_jacobian = cb.param_jacobian;
  p.autonomous = cb.autonomous;
  p.kind = EquationKind::ExplicitODE;

  const bool needs_mass = form == FormKind::StiffODEMass || form == FormKind::NonstiffODEMass ||
                          form == FormKind::SplitODEMass;
  if (needs_mass && !mass) throw ConfigError("this form requires a mass matrix");
  if (!needs_mass && mass) throw ConfigError("mass matrix given for a form without one");
  p.has_mass = needs_mass;

  std::shared_ptr<const LUFactorization> mlu;
  std::shared_ptr<const Matrix> M;
  if (needs_mass) {
    mlu = factor_mass(*mass, dim);
    M = std::make_shared<const Matrix>(*mass);
  }

  const auto n = static_cast<Eigen::Index>(dim);
  auto identity_f = [](double, const Vector&, const Vector& udot) -> Vector { return udot; };
  auto identity_j = [n](double, const Vector&, const Vector&, double shift) -> Matrix {
    return shift * Matrix::Identity(n, n);
  };

  auto stiff_f = [h = cb.h](double t, const Vector& u, const Vector& udot) -> Vector { return udot - h(t, u); };
  auto stiff_j = [n, hj = cb.h_jacobian ? cb.h_jacobian : fd_of(cb.h)](double t, const Vector& u, const Vector&,
                                                                      double shift) -> Matrix {
    return shift * Matrix::Identity(n, n) - hj(t, u);
  };
  auto stiff_mass_f = [h = cb.h, M](double t, const Vector& u, const Vector& udot) -> Vector {
    return (*M) * udot - h(t, u);
  };
  auto stiff_mass_j = [M, hj = cb.h_jacobian ? cb.h_jacobian : fd_of(cb.h)](double t, const Vector& u, const Vector&,
                                                                           double shift) -> Matrix {
    return shift * (*M) - hj(t, u);
  };
  auto minv_g = [g = cb.g, mlu](double t, const Vector& u) -> Vector { return lu_solve(*mlu, g(t, u)); };
  auto minv_gj = [gj = cb.g_jacobian ? cb.g_jacobian : fd_of(cb.g), mlu](double t, const Vector& u) -> Matrix {
    return lu_solve(*mlu, gj(t, u));
  };
  auto minv_h = [h = cb.h, mlu](double t, const Vector& u) -> Vector { return lu_solve(*mlu, h(t, u)); };
  auto minv_hj = [hj = cb.h_jacobian ? cb.h_jacobian : fd_of(cb.h), mlu](double t, const Vector& u) -> Matrix {
    return lu_solve(*mlu, hj(t, u));
  };

  p.identity_mass = form == FormKind::NonstiffODE || form == FormKind::StiffODE || form == FormKind::SplitODE ||
                    form == FormKind::NonstiffODEMass;
  switch (form) {
    case FormKind::NonstiffODE:
      require(bool(cb.g), "nonstiff form requires g");
      p.ifunction = identity_f;
      p.ijacobian = identity_j;
      p.rhsfunction = cb.g;
      p.rhsjacobian = cb.g_jacobian;
      p.explicit_rhs = cb.g;
      p.explicit_jacobian = cb.g_jacobian;
      break;
    case FormKind::StiffODE:
      require(bool(cb.h), "stiff form requires h");
      p.ifunction = stiff_f;
      p.ijacobian = stiff_j;
      p.explicit_rhs = cb.h;
      p.explicit_jacobian = cb.h_jacobian;
      break;
    case FormKind::StiffODEMass:
      require(bool(cb.h), "stiff form requires h");
      p.kind = EquationKind::ImplicitODE;
      p.ifunction = stiff_mass_f;
      p.ijacobian = stiff_mass_j;
      p.explicit_rhs = minv_h;
      p.explicit_jacobian = minv_hj;
      break;
    case FormKind::NonstiffODEMass:
      require(bool(cb.g), "nonstiff form requires g");
      p.ifunction = identity_f;
      p.ijacobian = identity_j;
      p.rhsfunction = minv_g;
      p.rhsjacobian = minv_gj;
      p.explicit_rhs = minv_g;
      p.explicit_jacobian = minv_gj;
      break;
    case FormKind::SplitODE: {
      require(cb.g && cb.h, "split form requires g and h");
      p.ifunction = stiff_f;
      p.ijacobian = stiff_j;
      p.rhsfunction = cb.g;
      p.rhsjacobian = cb.g_jacobian;
      p.explicit_rhs = [g = cb.g, h = cb.h](double t, const Vector& u) -> Vector { return h(t, u) + g(t, u); };
      if (cb.g_jacobian && cb.h_jacobian)
        p.explicit_jacobian = [gj = cb.g_jacobian, hj = cb.h_jacobian](double t, const Vector& u) -> Matrix {
          return hj(t, u) + gj(t, u);
        };
      break;
    }
    case FormKind::SplitODEMass:
      require(cb.g && cb.h, "split form requires g and h");
      p.kind = EquationKind::ImplicitODE;
      p.ifunction = stiff_mass_f;
      p.ijacobian = stiff_mass_j;
      p.rhsfunction = minv_g;
      p.rhsjacobian = minv_gj;
      p.explicit_rhs = [minv_g, minv_h](double t, const Vector& u) -> Vector { return minv_h(t, u) + minv_g(t, u); };
      p.explicit_jacobian = [minv_gj, minv_hj](double t, const Vector& u) -> Matrix {
        return minv_hj(t, u) + minv_gj(t, u);
      };
      break;
    case FormKind::Implicit:
      require(bool(cb.implicit), "implicit form requires F");
      p.kind = cb.implicit_kind == EquationKind::ExplicitODE ? EquationKind::ImplicitODE : cb.implicit_kind;
      p.ifunction = cb.implicit;
      p.ijacobian = cb.implicit_jacobian;
      break;
  }
  validate(p);
  return p;
}

void validate(const Problem& p) {
  require(p.dim > 0, "problem dimension must be positive");
  require(p.ifunction || p.rhsfunction, "problem needs an ifunction or a rhsfunction");
  if (p.kind == EquationKind::DAE) require(bool(p.ifunction), "a DAE requires an ifunction");
}

namespace {

void check_dim(const Problem& p, const Vector& v, const char* what) {
  if (static_cast<std::size_t>(v.size()) != p.dim)
    throw Error(std::string(what) + ": dimension mismatch (got " + std::to_string(v.size()) + ", expected " +
                std::to_string(p.dim) + ")");
}

void check_shape(const Problem& p, const Matrix& m, std::size_t cols, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != p.dim || static_cast<std::size_t>(m.cols()) != cols)
    throw Error(std::string(what) + ": returned matrix has wrong shape");
}

}  // namespace

Vector eval_ifunction(const Problem& p, double t, const Vector& u, const Vector& udot) {
  check_dim(p, u, "eval_ifunction");
  check_dim(p, udot, "eval_ifunction");
  if (!p.ifunction) return udot;
  Vector r = p.ifunction(t, u, udot);
  check_dim(p, r, "ifunction");
  check_finite(r, "ifunction");
  return r;
}

Matrix eval_ijacobian(const Problem& p, double t, const Vector& u, const Vector& udot, double shift) {
  check_dim(p, u, "eval_ijacobian");
  const auto n = static_cast<Eigen::Index>(p.dim);
  if (!p.ifunction) return shift * Matrix::Identity(n, n);
  if (p.ijacobian) {
    Matrix J = p.ijacobian(t, u, udot, shift);
    check_shape(p, J, p.dim, "ijacobian");
    return J;
  }
  Matrix Fu = fd_jacobian([&](const Vector& x) { return eval_ifunction(p, t, x, udot); }, u);
  if (shift == 0.0) return Fu;
  Matrix Fudot = fd_jacobian([&](const Vector& x) { return eval_ifunction(p, t, u, x); }, udot);
  return shift * Fudot + Fu;
}

Vector eval_rhs(const Problem& p, double t, const Vector& u) {
  check_dim(p, u, "eval_rhs");
  if (!p.rhsfunction) throw Error("eval_rhs: problem has no rhsfunction");
  Vector g = p.rhsfunction(t, u);
  check_dim(p, g, "rhsfunction");
  check_finite(g, "rhsfunction");
  return g;
}

Matrix eval_rhs_jacobian(const Problem& p, double t, const Vector& u) {
  if (!p.rhsfunction) throw Error("eval_rhs_jacobian: problem has no rhsfunction");
  if (p.rhsjacobian) {
    Matrix J = p.rhsjacobian(t, u);
    check_shape(p, J, p.dim, "rhsjacobian");
    return J;
  }
  return fd_jacobian([&](const Vector& x) { return eval_rhs(p, t, x); }, u);
}

Vector eval_residual(const Problem& p, double t, const Vector& u, const Vector& udot) {
  Vector r = eval_ifunction(p, t, u, udot);
  if (p.rhsfunction) r -= eval_rhs(p, t, u);
  return r;
}

Matrix eval_residual_jacobian(const Problem& p, double t, const Vector& u, const Vector& udot, double shift) {
  Matrix J = eval_ijacobian(p, t, u, udot, shift);
  if (p.rhsfunction) J -= eval_rhs_jacobian(p, t, u);
  return J;
}

Matrix eval_mass(const Problem& p, double t, const Vector& u, const Vector& udot) {
  return eval_ijacobian(p, t, u, udot, 1.0) - eval_ijacobian(p, t, u, udot, 0.0);
}

bool has_explicit_rhs(const Problem& p) { return bool(p.explicit_rhs) || (!p.ifunction && p.rhsfunction); }

Vector eval_explicit_rhs(const Problem& p, double t, const Vector& u) {
  check_dim(p, u, "eval_explicit_rhs");
  if (p.explicit_rhs) {
    Vector f = p.explicit_rhs(t, u);
    check_dim(p, f, "explicit rhs");
    check_finite(f, "explicit rhs");
    return f;
  }
  if (!p.ifunction && p.rhsfunction) return eval_rhs(p, t, u);
  throw ConfigError("problem has no explicit right-hand side; use an implicit scheme");
}

Matrix eval_explicit_jacobian(const Problem& p, double t, const Vector& u) {
  if (p.explicit_rhs) {
    if (p.explicit_jacobian) {
      Matrix J = p.explicit_jacobian(t, u);
      check_shape(p, J, p.dim, "explicit jacobian");
      return J;
    }
    return fd_jacobian([&](const Vector& x) { return eval_explicit_rhs(p, t, x); }, u);
  }
  if (!p.ifunction && p.rhsfunction) return eval_rhs_jacobian(p, t, u);
  throw ConfigError("problem has no explicit right-hand side; use an implicit scheme");
}

Matrix eval_param_jacobian(const Problem& p, double t, const Vector& u) {
  if (p.nparams == 0) return Matrix(static_cast<Eigen::Index>(p.dim), 0);
  if (!p.param_jacobian) throw ConfigError("problem has parameters but no param_jacobian");
  Matrix J = p.param_jacobian(t, u);
  check_shape(p, J, p.nparams, "param_jacobian");
  return J;
}

Vector consistent_udot(const Problem& p, double t, const Vector& u) {
  if (has_explicit_rhs(p)) return eval_explicit_rhs(p, t, u);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(p.dim));
  Matrix M = eval_mass(p, t, u, zero);
  Vector r = eval_residual(p, t, u, zero);
  return lu_solve(lu_factor(M), Vector(-r));
}

}  // namespace odekit
