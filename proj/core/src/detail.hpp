#pragma once

#include "odekit/steppers.hpp"

namespace odekit::detail {

// Wraps problem evaluations and counts right-hand-side calls.
struct Evaluator {
  const Problem& p;
  long evals = 0;

  Vector f(double t, const Vector& u) {
    ++evals;
    return eval_explicit_rhs(p, t, u);
  }
  Vector residual(double t, const Vector& u, const Vector& udot) {
    ++evals;
    return eval_residual(p, t, u, udot);
  }
  Vector ifunction(double t, const Vector& u, const Vector& udot) {
    ++evals;
    return eval_ifunction(p, t, u, udot);
  }
  Vector rhs(double t, const Vector& u) {
    ++evals;
    return eval_rhs(p, t, u);
  }
  Vector udot(double t, const Vector& u) {
    ++evals;
    return consistent_udot(p, t, u);
  }
};

inline StepOutcome failed(std::string why, bool nonlinear = false) {
  StepOutcome o;
  o.ok = false;
  o.failure = std::move(why);
  o.nonlinear_failure = nonlinear;
  return o;
}

inline Vector zeros(const Problem& p) { return Vector::Zero(static_cast<Eigen::Index>(p.dim)); }

}  // namespace odekit::detail
