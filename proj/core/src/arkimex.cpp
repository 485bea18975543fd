#include "odekit/steppers.hpp"

#include "detail.hpp"

namespace odekit {

namespace {

// Slope of a stage with a zero implicit diagonal: solve F(t,U,v) = G(t,U) (or = 0) for v.
Vector explicit_stage_slope(detail::Evaluator& ev, double t, const Vector& U, bool include_g) {
  const Problem& p = ev.p;
  const Vector zero = detail::zeros(p);
  Vector rhs = -ev.ifunction(t, U, zero);
  if (include_g && p.rhsfunction) rhs += ev.rhs(t, U);
  if (p.identity_mass || !p.ifunction) return rhs;
  return lu_solve(lu_factor(eval_mass(p, t, U, zero)), rhs);
}

}  // namespace

StepOutcome ark_imex_step(const Problem& p, const IMEXTableau& tab, const StepperState& st, double dt,
                          bool fully_implicit, const StepOptions& opts) {
  detail::Evaluator ev{p};
  const ButcherTableau& E = tab.explicit_part;
  const ButcherTableau& I = tab.implicit_part;
  const int s = tab.stages();
  const bool split = !fully_implicit;
  const bool use_g = split && bool(p.rhsfunction);
  const auto n = static_cast<Eigen::Index>(p.dim);

  const StageData* prev = nullptr;
  if (opts.extrapolate_guess && st.previous && !st.previous->empty() &&
      st.previous->t + st.previous->dt == st.t)
    prev = &*st.previous;

  std::vector<Vector> U(static_cast<std::size_t>(s)), UI(static_cast<std::size_t>(s)), UE(static_cast<std::size_t>(s));
  StepOutcome out;
  try {
    for (int i = 0; i < s; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const double ti = st.t + I.c[i] * dt;
      Vector Z = st.u;
      for (int j = 0; j < i; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (I.A(i, j) != 0.0) Z += (dt * I.A(i, j)) * UI[sj];
        if (use_g && E.A(i, j) != 0.0) Z += (dt * E.A(i, j)) * UE[sj];
      }
      const double aii = I.A(i, i);
      if (aii != 0.0) {
        const double shift = 1.0 / (dt * aii);
        auto udot_of = [&](const Vector& x) -> Vector { return shift * (x - Z); };
        VectorMap residual;
        std::function<Matrix(const Vector&)> jacobian;
        if (split) {
          residual = [&](const Vector& x) { return ev.ifunction(ti, x, udot_of(x)); };
          jacobian = [&](const Vector& x) { return eval_ijacobian(p, ti, x, udot_of(x), shift); };
        } else {
          residual = [&](const Vector& x) { return ev.residual(ti, x, udot_of(x)); };
          jacobian = [&](const Vector& x) { return eval_residual_jacobian(p, ti, x, udot_of(x), shift); };
        }
        Vector guess = prev ? interpolate(*prev, ti) : st.u;
        if (!all_finite(guess)) guess = st.u;
        NewtonResult nr = newton_solve(residual, jacobian, guess, opts.newton);
        out.newton_iters += nr.report.iterations;
        out.linear_iters += nr.report.iterations;
        if (!nr.report.converged) {
          out.ok = false;
          out.nonlinear_failure = true;
          out.failure = "ark_imex_step: Newton failed in stage " + std::to_string(i) + " (" +
                        to_string(nr.report.reason) + ")";
          out.rhs_evals = ev.evals;
          return out;
        }
        U[si] = nr.x;
        UI[si] = udot_of(U[si]);
      } else {
        U[si] = Z;
        UI[si] = explicit_stage_slope(ev, ti, Z, fully_implicit);
      }
      UE[si] = use_g ? ev.rhs(ti, U[si]) : Vector::Zero(n);
    }

    Vector u1 = st.u;
    for (int j = 0; j < s; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (use_g && E.b[j] != 0.0) u1 += (dt * E.b[j]) * UE[sj];
      if (I.b[j] != 0.0) u1 += (dt * I.b[j]) * UI[sj];
    }
    check_finite(u1, "ark_imex_step");
    if (I.b_hat && E.b_hat) {
      Vector e = Vector::Zero(n);
      for (int j = 0; j < s; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const double we = E.b[j] - (*E.b_hat)[j];
        const double wi = I.b[j] - (*I.b_hat)[j];
        if (use_g && we != 0.0) e += (dt * we) * UE[sj];
        if (wi != 0.0) e += (dt * wi) * UI[sj];
      }
      out.err_estimate = std::move(e);
    }

    StageData& sd = out.stage_data;
    sd.t = st.t;
    sd.dt = dt;
    sd.u0 = st.u;
    sd.u1 = u1;
    if (I.c[0] == 0.0 && I.A(0, 0) == 0.0) sd.udot0 = use_g ? Vector(UI[0] + UE[0]) : UI[0];
    if (tab.bstar) {
      sd.bstar = std::make_shared<const Matrix>(*tab.bstar);
      for (int j = 0; j < s; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        sd.slopes.push_back(use_g ? Vector(UI[sj] + UE[sj]) : UI[sj]);
      }
    } else if (opts.need_dense) {
      sd.udot1 = ev.udot(st.t + dt, u1);
    }
    sd.stages = std::move(U);
    out.u_new = std::move(u1);
  } catch (const NonFiniteError& e) {
    auto f = detail::failed(e.what());
    f.newton_iters = out.newton_iters;
    f.linear_iters = out.linear_iters;
    f.rhs_evals = ev.evals;
    return f;
  } catch (const SingularMatrixError& e) {
    auto f = detail::failed(std::string("ark_imex_step: ") + e.what(), true);
    f.newton_iters = out.newton_iters;
    f.linear_iters = out.linear_iters;
    f.rhs_evals = ev.evals;
    return f;
  }
  out.order_used = tab.p;
  out.rhs_evals = ev.evals;
  return out;
}

}  // namespace odekit
