#include "odekit/steppers.hpp"

#include "detail.hpp"

namespace odekit {

namespace {

Vector lagrange_eval(const std::vector<double>& x, const std::vector<const Vector*>& y, double t) {
  // Written relative to y[0] so constant data is reproduced exactly.
  Vector r = *y[0];
  for (std::size_t j = 1; j < x.size(); ++j) {
    double w = 1.0;
    for (std::size_t m = 0; m < x.size(); ++m)
      if (m != j) w *= (t - x[m]) / (x[j] - x[m]);
    r += w * (*y[j] - *y[0]);
  }
  return r;
}

}  // namespace

StepOutcome bdf_step(const Problem& p, int order, const StepperState& st, double dt, const StepOptions& opts) {
  if (order < 1 || order > 6) throw ConfigError("bdf_step: order must lie in [1, 6]");
  detail::Evaluator ev{p};
  const double t1 = st.t + dt;

  std::vector<double> ts;
  std::vector<const Vector*> us;
  if (st.bdf_history.empty() || st.bdf_history.front().first != st.t) {
    ts.push_back(st.t);
    us.push_back(&st.u);
  }
  for (const auto& [t, u] : st.bdf_history) {
    ts.push_back(t);
    us.push_back(&u);
  }
  const int k = std::min<int>(order, static_cast<int>(ts.size()));

  std::vector<double> nodes{t1};
  nodes.insert(nodes.end(), ts.begin(), ts.begin() + k);
  const Vector a = bdf_coefficients(nodes);
  Vector hist = Vector::Zero(st.u.size());
  for (int j = 1; j <= k; ++j) hist += a[j] * *us[static_cast<std::size_t>(j - 1)];
  const double shift = a[0];

  // Predictor through up to k+1 past points.
  const std::size_t npred = std::min<std::size_t>(static_cast<std::size_t>(k) + 1, ts.size());
  Vector pred;
  double span;
  if (npred >= 2) {
    std::vector<double> px(ts.begin(), ts.begin() + static_cast<long>(npred));
    std::vector<const Vector*> py(us.begin(), us.begin() + static_cast<long>(npred));
    pred = lagrange_eval(px, py, t1);
    span = t1 - px.back();
  } else {
    pred = st.udot ? Vector(st.u + dt * *st.udot) : st.u;
    span = dt;
  }

  auto udot_of = [&](const Vector& x) -> Vector { return shift * x + hist; };
  auto residual = [&](const Vector& x) { return ev.residual(t1, x, udot_of(x)); };
  auto jacobian = [&](const Vector& x) { return eval_residual_jacobian(p, t1, x, udot_of(x), shift); };

  StepOutcome out;
  try {
    if (!all_finite(pred)) pred = st.u;
    NewtonResult nr = newton_solve(residual, jacobian, pred, opts.newton);
    out.newton_iters = nr.report.iterations;
    out.linear_iters = nr.report.iterations;
    out.rhs_evals = ev.evals;
    if (!nr.report.converged) {
      out.ok = false;
      out.nonlinear_failure = true;
      out.failure = "bdf_step: Newton failed (" + to_string(nr.report.reason) + ")";
      return out;
    }
    out.u_new = nr.x;
  } catch (const NonFiniteError& e) {
    auto f = detail::failed(e.what());
    f.rhs_evals = ev.evals;
    return f;
  }
  out.udot_new = udot_of(out.u_new);
  out.err_estimate = Vector((dt / span) * (out.u_new - pred));
  out.order_used = k;
  StageData& sd = out.stage_data;
  sd.t = st.t;
  sd.dt = dt;
  sd.u0 = st.u;
  sd.u1 = out.u_new;
  sd.udot0 = st.udot;
  sd.udot1 = out.udot_new;
  return out;
}

}  // namespace odekit
