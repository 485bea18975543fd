#include "odekit/steppers.hpp"

#include "detail.hpp"

namespace odekit {

StepOutcome theta_step(const Problem& p, double theta, const StepperState& st, double dt, const StepOptions& opts) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  detail::Evaluator ev{p};
  const double a = 1.0 / (theta * dt);
  const double b = (1.0 - theta) / theta;
  const double t1 = st.t + dt;

  Vector udot0;
  try {
    if (st.udot)
      udot0 = *st.udot;
    else if (theta < 1.0)
      udot0 = ev.udot(st.t, st.u);
    else
      udot0 = detail::zeros(p);
  } catch (const Error& e) {
    return detail::failed(std::string("theta_step: cannot form initial derivative: ") + e.what());
  }

  auto udot_of = [&](const Vector& x) -> Vector {
    Vector v = a * (x - st.u);
    if (b != 0.0) v -= b * udot0;
    return v;
  };
  auto residual = [&](const Vector& x) { return ev.residual(t1, x, udot_of(x)); };
  auto jacobian = [&](const Vector& x) { return eval_residual_jacobian(p, t1, x, udot_of(x), a); };

  NewtonResult nr = newton_solve(residual, jacobian, st.u, opts.newton);
  StepOutcome out;
  out.newton_iters = nr.report.iterations;
  out.linear_iters = nr.report.iterations;
  out.rhs_evals = ev.evals;
  if (!nr.report.converged) {
    out.ok = false;
    out.nonlinear_failure = true;
    out.failure = "theta_step: Newton failed (" + to_string(nr.report.reason) + ")";
    return out;
  }
  out.u_new = nr.x;
  out.udot_new = udot_of(nr.x);
  out.order_used = theta == 0.5 ? 2 : 1;
  StageData& sd = out.stage_data;
  sd.t = st.t;
  sd.dt = dt;
  sd.u0 = st.u;
  sd.u1 = out.u_new;
  if (st.udot || theta < 1.0) sd.udot0 = udot0;
  sd.udot1 = out.udot_new;
  return out;
}

}  // namespace odekit
