#pragma once

#include "odekit/linalg.hpp"
#include "odekit/types.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace odekit {

enum class EquationKind { ExplicitODE, ImplicitODE, DAE };

/** @brief Rows of the formulation translation table. */
enum class FormKind {
  NonstiffODE,      // u' = g
  StiffODE,         // u' = h
  StiffODEMass,     // M u' = h
  NonstiffODEMass,  // M u' = g
  SplitODE,         // u' = h + g
  SplitODEMass,     // M u' = h + g
  Implicit          // F(t,u,u') = 0
};

using IFunction = std::function<Vector(double t, const Vector& u, const Vector& udot)>;
using RHSFunction = std::function<Vector(double t, const Vector& u)>;
using IJacobian = std::function<Matrix(double t, const Vector& u, const Vector& udot, double shift)>;
using RHSJacobian = std::function<Matrix(double t, const Vector& u)>;

/**
 * @brief A problem F(t,u,u') = G(t,u).
 *
 * Missing ifunction means F = u'. Missing Jacobians fall back to finite
 * differences. param_jacobian returns d(G - F)/dp (n x np).
 */
struct Problem {
  std::size_t dim = 0;
  std::size_t nparams = 0;
  EquationKind kind = EquationKind::ExplicitODE;

  IFunction ifunction;
  RHSFunction rhsfunction;
  IJacobian ijacobian;
  RHSJacobian rhsjacobian;
  RHSJacobian param_jacobian;

  // u' = f(t,u) when the problem can also be written explicitly.
  RHSFunction explicit_rhs;
  RHSJacobian explicit_jacobian;

  bool has_mass = false;
  bool identity_mass = false;  // F_u' = I, so F(t,u,0) = -(implicit rhs)
  bool autonomous = false;
};

/** @brief User callbacks for make_problem; which ones are needed depends on the form. */
struct FormCallbacks {
  RHSFunction g;
  RHSJacobian g_jacobian;
  RHSFunction h;
  RHSJacobian h_jacobian;
  IFunction implicit;
  IJacobian implicit_jacobian;
  RHSJacobian param_jacobian;
  EquationKind implicit_kind = EquationKind::ImplicitODE;
  bool autonomous = false;
};

Problem make_problem(FormKind form, std::size_t dim, const FormCallbacks& cb,
                     const std::optional<Matrix>& mass = std::nullopt, std::size_t nparams = 0);

Vector eval_ifunction(const Problem& p, double t, const Vector& u, const Vector& udot);
Matrix eval_ijacobian(const Problem& p, double t, const Vector& u, const Vector& udot, double shift);
Vector eval_rhs(const Problem& p, double t, const Vector& u);
Matrix eval_rhs_jacobian(const Problem& p, double t, const Vector& u);

/** @brief F - G, the residual every implicit stage drives to zero. */
Vector eval_residual(const Problem& p, double t, const Vector& u, const Vector& udot);
/** @brief shift*F_u' + F_u - G_u. */
Matrix eval_residual_jacobian(const Problem& p, double t, const Vector& u, const Vector& udot, double shift);
/** @brief F_u' recovered from two shifted Jacobians. */
Matrix eval_mass(const Problem& p, double t, const Vector& u, const Vector& udot);

bool has_explicit_rhs(const Problem& p);
Vector eval_explicit_rhs(const Problem& p, double t, const Vector& u);
Matrix eval_explicit_jacobian(const Problem& p, double t, const Vector& u);
Matrix eval_param_jacobian(const Problem& p, double t, const Vector& u);

/** @brief Solves F(t,u,u') = G(t,u) for u', assuming F is affine in u'. */
Vector consistent_udot(const Problem& p, double t, const Vector& u);

void validate(const Problem& p);

}  // namespace odekit
