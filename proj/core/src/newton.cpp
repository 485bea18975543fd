#include "odekit/newton.hpp"

#include <cmath>

namespace odekit {

std::string to_string(NewtonReason r) {
  switch (r) {
    case NewtonReason::AbsTol: return "AbsTol";
    case NewtonReason::RelTol: return "RelTol";
    case NewtonReason::StepTol: return "StepTol";
    case NewtonReason::MaxIt: return "MaxIt";
    case NewtonReason::LinearFailure: return "LinearFailure";
    case NewtonReason::NonFinite: return "NonFinite";
  }
  return "?";
}

namespace {

bool eval(const VectorMap& residual, const Vector& x, Vector& r) {
  try {
    r = residual(x);
  } catch (const NonFiniteError&) {
    return false;
  }
  return all_finite(r);
}

}  // namespace

NewtonResult newton_solve(const VectorMap& residual, const std::function<Matrix(const Vector&)>& jacobian,
                          const Vector& x0, const NewtonOptions& opts) {
  NewtonResult out{x0, {}};
  NewtonReport& rep = out.report;
  Vector& x = out.x;
  const double abs_tol = opts.abs_tol >= 0.0 ? opts.abs_tol : 1e-12 * std::sqrt(static_cast<double>(x0.size()));

  Vector r;
  if (!all_finite(x0) || !eval(residual, x, r)) {
    rep.reason = NewtonReason::NonFinite;
    return out;
  }
  double rnorm = r.norm();
  rep.initial_residual_norm = rnorm;
  rep.residual_history.push_back(rnorm);
  double last_step = -1.0;

  for (;;) {
    rep.final_residual_norm = rnorm;
    if (rnorm <= abs_tol) {
      rep.converged = true;
      rep.reason = NewtonReason::AbsTol;
      return out;
    }
    if (rep.iterations > 0 && rnorm <= opts.rel_tol * rep.initial_residual_norm) {
      rep.converged = true;
      rep.reason = NewtonReason::RelTol;
      return out;
    }
    if (last_step >= 0.0 && last_step <= opts.step_tol * x.norm()) {
      rep.converged = true;
      rep.reason = NewtonReason::StepTol;
      return out;
    }
    if (rep.iterations >= opts.max_it) {
      rep.reason = NewtonReason::MaxIt;
      return out;
    }

    Vector delta;
    try {
      LUFactorization lu = lu_factor(jacobian(x));
      delta = lu_solve(lu, r);
    } catch (const SingularMatrixError&) {
      rep.reason = NewtonReason::LinearFailure;
      return out;
    } catch (const NonFiniteError&) {
      rep.reason = NewtonReason::NonFinite;
      return out;
    }
    ++rep.iterations;
    if (!all_finite(delta)) {
      rep.reason = NewtonReason::LinearFailure;
      return out;
    }

    double lambda = 1.0;
    Vector xn = x - delta;
    Vector rn;
    bool ok = eval(residual, xn, rn);
    if (opts.damping == Damping::ArmijoBacktrack) {
      for (int k = 0; k < 20 && (!ok || rn.norm() > (1.0 - 1e-4 * lambda) * rnorm); ++k) {
        lambda *= 0.5;
        xn = x - lambda * delta;
        ok = eval(residual, xn, rn);
      }
    }
    if (!ok) {
      rep.reason = NewtonReason::NonFinite;
      return out;
    }
    x = std::move(xn);
    r = std::move(rn);
    rnorm = r.norm();
    rep.residual_history.push_back(rnorm);
    last_step = lambda * delta.norm();
  }
}

}  // namespace odekit
