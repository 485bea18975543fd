#include "odekit/steppers.hpp"

#include "detail.hpp"

namespace odekit {

StepOutcome erk_step(const Problem& p, const ButcherTableau& tab, const StepperState& st, double dt,
                     const StepOptions& opts) {
  if (!tab.is_explicit()) throw ConfigError("erk_step: tableau " + tab.name + " is not explicit");
  detail::Evaluator ev{p};
  const int s = tab.stages();
  StepOutcome out;
  std::vector<Vector> Y(static_cast<std::size_t>(s)), k(static_cast<std::size_t>(s));
  try {
    for (int i = 0; i < s; ++i) {
      Vector y = st.u;
      for (int j = 0; j < i; ++j)
        if (tab.A(i, j) != 0.0) y += (dt * tab.A(i, j)) * k[static_cast<std::size_t>(j)];
      k[static_cast<std::size_t>(i)] = ev.f(st.t + tab.c[i] * dt, y);
      Y[static_cast<std::size_t>(i)] = std::move(y);
    }
    Vector u1 = st.u;
    for (int i = 0; i < s; ++i)
      if (tab.b[i] != 0.0) u1 += (dt * tab.b[i]) * k[static_cast<std::size_t>(i)];
    if (tab.b_hat) {
      Vector e = Vector::Zero(st.u.size());
      for (int i = 0; i < s; ++i) {
        const double w = tab.b[i] - (*tab.b_hat)[i];
        if (w != 0.0) e += (dt * w) * k[static_cast<std::size_t>(i)];
      }
      out.err_estimate = std::move(e);
    }
    check_finite(u1, "erk_step");

    StageData& sd = out.stage_data;
    sd.t = st.t;
    sd.dt = dt;
    sd.u0 = st.u;
    sd.u1 = u1;
    if (tab.c[0] == 0.0) sd.udot0 = k[0];
    const bool fsal = tab.c[s - 1] == 1.0 && (tab.A.row(s - 1).transpose() - tab.b).cwiseAbs().maxCoeff() == 0.0;
    if (fsal)
      sd.udot1 = k[static_cast<std::size_t>(s - 1)];
    else if (opts.need_dense && !tab.bstar)
      sd.udot1 = ev.f(st.t + dt, u1);
    if (tab.bstar) sd.bstar = std::make_shared<const Matrix>(*tab.bstar);
    sd.stages = std::move(Y);
    sd.slopes = std::move(k);
    out.u_new = std::move(u1);
    out.udot_new = sd.udot1;
  } catch (const NonFiniteError& e) {
    auto f = detail::failed(e.what());
    f.rhs_evals = ev.evals;
    return f;
  }
  out.order_used = tab.p;
  out.rhs_evals = ev.evals;
  return out;
}

}  // namespace odekit
