#include "odekit/steppers.hpp"

#include "detail.hpp"

#include <cmath>
#include <limits>

namespace odekit {

namespace {

struct RosMatrices {
  Matrix mass;  // R_u'
  Matrix jac;   // R_u
};

RosMatrices ros_matrices(const Problem& p, const StepperState& st, bool reuse, RosJacobianCache* cache) {
  const Vector zero = detail::zeros(p);
  if (reuse && cache && cache->jac && cache->mass) return {*cache->mass, *cache->jac};
  RosMatrices m;
  const auto n = static_cast<Eigen::Index>(p.dim);
  m.mass = p.identity_mass || !p.ifunction ? Matrix(Matrix::Identity(n, n)) : eval_mass(p, st.t, st.u, zero);
  m.jac = eval_residual_jacobian(p, st.t, st.u, zero, 0.0);
  if (cache) {
    cache->mass = m.mass;
    cache->jac = m.jac;
  }
  return m;
}

Vector residual_time_derivative(detail::Evaluator& ev, const Problem& p, const StepperState& st, double dt) {
  if (p.autonomous) return detail::zeros(p);
  const Vector zero = detail::zeros(p);
  const double delta = std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(std::abs(st.t), std::abs(dt));
  volatile double tp = st.t + delta;
  const double h = tp - st.t;
  return (ev.residual(st.t + h, st.u, zero) - ev.residual(st.t, st.u, zero)) / h;
}

}  // namespace

StepOutcome rosw_step(const Problem& p, const RosTableau& tab, const StepperState& st, double dt, bool reuse_jacobian,
                      RosJacobianCache* cache, const StepOptions& opts) {
  detail::Evaluator ev{p};
  const int s = tab.stages();
  const auto n = static_cast<Eigen::Index>(p.dim);
  const RosTransform& tr = tab.transform;
  const Vector alpha = tab.alpha();
  const Vector zero = detail::zeros(p);
  StepOutcome out;
  int solves = 0;
  try {
    const RosMatrices M = ros_matrices(p, st, reuse_jacobian, cache);
    const Vector Rt = residual_time_derivative(ev, p, st, dt);
    std::vector<Vector> v(static_cast<std::size_t>(s));
    Vector u1 = st.u;
    std::optional<Vector> err;

    // One factorization per distinct diagonal entry.
    std::vector<std::pair<double, LUFactorization>> lus;
    auto factor_for = [&](double gii) -> const LUFactorization& {
      for (auto& [g, lu] : lus)
        if (g == gii) return lu;
      lus.emplace_back(gii, lu_factor(tr.has_explicit_rows ? Matrix(M.mass + (gii * dt) * M.jac)
                                                              : Matrix(M.mass / (gii * dt) + M.jac)));
      return lus.back().second;
    };

    if (!tr.has_explicit_rows) {
      for (int i = 0; i < s; ++i) {
        Vector Y = st.u;
        Vector Zdot = Vector::Zero(n);
        for (int j = 0; j < i; ++j) {
          const Vector& vj = v[static_cast<std::size_t>(j)];
          if (tr.omega(i, j) != 0.0) Y += tr.omega(i, j) * vj;
          if (tr.d(i, j) != 0.0) Zdot -= (tr.d(i, j) / dt) * vj;
        }
        Vector rhs = -ev.residual(st.t + alpha[i] * dt, Y, Zdot);
        if (!p.autonomous && tr.gamma_sums[i] != 0.0) rhs -= (tr.gamma_sums[i] * dt) * Rt;
        v[static_cast<std::size_t>(i)] = lu_solve(factor_for(tr.gamma_diag[i]), rhs);
        ++solves;
      }
      for (int j = 0; j < s; ++j) u1 += tr.m[j] * v[static_cast<std::size_t>(j)];
      if (tr.m_hat) {
        Vector e = Vector::Zero(n);
        for (int j = 0; j < s; ++j) e += (tr.m[j] - (*tr.m_hat)[j]) * v[static_cast<std::size_t>(j)];
        err = std::move(e);
      }
    } else {
      // Slope form: (R_u' + gamma_ii dt R_u) k_i = -R(Y_i, 0) - dt R_u sum_j gamma_ij k_j - gamma_i dt R_t.
      for (int i = 0; i < s; ++i) {
        Vector Y = st.u;
        Vector gk = Vector::Zero(n);
        for (int j = 0; j < i; ++j) {
          const Vector& kj = v[static_cast<std::size_t>(j)];
          if (tab.A(i, j) != 0.0) Y += (dt * tab.A(i, j)) * kj;
          if (tab.Gamma(i, j) != 0.0) gk += tab.Gamma(i, j) * kj;
        }
        Vector rhs = -ev.residual(st.t + alpha[i] * dt, Y, zero) - dt * (M.jac * gk);
        if (!p.autonomous && tr.gamma_sums[i] != 0.0) rhs -= (tr.gamma_sums[i] * dt) * Rt;
        v[static_cast<std::size_t>(i)] = lu_solve(factor_for(tr.gamma_diag[i]), rhs);
        ++solves;
      }
      for (int j = 0; j < s; ++j) u1 += (dt * tab.b[j]) * v[static_cast<std::size_t>(j)];
      if (tab.b_hat) {
        Vector e = Vector::Zero(n);
        for (int j = 0; j < s; ++j) e += (dt * (tab.b[j] - (*tab.b_hat)[j])) * v[static_cast<std::size_t>(j)];
        err = std::move(e);
      }
    }
    check_finite(u1, "rosw_step");

    StageData& sd = out.stage_data;
    sd.t = st.t;
    sd.dt = dt;
    sd.u0 = st.u;
    sd.u1 = u1;
    if (opts.need_dense) {
      try {
        sd.udot0 = st.udot ? *st.udot : ev.udot(st.t, st.u);
        sd.udot1 = ev.udot(st.t + dt, u1);
      } catch (const SingularMatrixError&) {
        // Singular mass: dense output falls back to linear interpolation.
        sd.udot0.reset();
        sd.udot1.reset();
      }
    }
    out.u_new = std::move(u1);
    out.err_estimate = std::move(err);
    out.udot_new = sd.udot1;
  } catch (const NonFiniteError& e) {
    auto f = detail::failed(e.what());
    f.rhs_evals = ev.evals;
    return f;
  } catch (const SingularMatrixError& e) {
    auto f = detail::failed(std::string("rosw_step: ") + e.what(), true);
    f.rhs_evals = ev.evals;
    return f;
  }
  out.order_used = tab.p;
  out.linear_iters = solves;
  out.rhs_evals = ev.evals;
  return out;
}

}  // namespace odekit
