#include "odekit/sensitivity.hpp"

namespace odekit {

namespace {

void check_supported(const Problem& p, const Scheme& scheme) {
  if (scheme.family != Family::ERK && scheme.family != Family::Theta)
    throw ConfigError("sensitivities are available for rk and theta schemes only, not " + scheme.label());
  if (scheme.family == Family::ERK && (!has_explicit_rhs(p) || p.has_mass))
    throw ConfigError("rk sensitivities need an explicit problem without a mass matrix");
}

Matrix param_jac(const Problem& p, double t, const Vector& u) {
  if (p.nparams == 0) return Matrix(static_cast<Eigen::Index>(p.dim), 0);
  return eval_param_jacobian(p, t, u);
}

Matrix mass_of(const Problem& p, double t, const Vector& u, const Vector& udot) {
  const auto n = static_cast<Eigen::Index>(p.dim);
  if (p.identity_mass || !p.ifunction) return Matrix::Identity(n, n);
  return eval_mass(p, t, u, udot);
}

}  // namespace

AdjointState adjoint_solve(const Problem& p, const Scheme& scheme, Trajectory& traj, const AdjointState& terminal,
                           const CostIntegrand* integrand) {
  check_supported(p, scheme);
  const std::size_t ncost = terminal.lambda.size();
  if (ncost == 0) throw ConfigError("adjoint_solve: at least one terminal lambda is required");
  const auto n = static_cast<Eigen::Index>(p.dim);
  const auto np = static_cast<Eigen::Index>(p.nparams);
  for (const auto& l : terminal.lambda)
    if (l.size() != n) throw ConfigError("adjoint_solve: lambda has the wrong dimension");
  if (np > 0 && !p.param_jacobian && p.nparams > 0) throw ConfigError("adjoint_solve: param_jacobian is required when np > 0");
  if (integrand && integrand->ncost != ncost) throw ConfigError("adjoint_solve: integrand ncost mismatch");

  AdjointState st = terminal;
  if (st.mu.empty()) st.mu.assign(ncost, Vector::Zero(np));
  if (st.mu.size() != ncost) throw ConfigError("adjoint_solve: mu must match lambda in count");
  for (const auto& m : st.mu)
    if (m.size() != np) throw ConfigError("adjoint_solve: mu has the wrong dimension");
  if (integrand) st.cost_integral = Vector::Zero(static_cast<Eigen::Index>(ncost));

  const Replayer replay = make_replayer(p, scheme);
  const long N = traj.last_step();
  if (N < 0) throw Error("adjoint_solve: empty trajectory");
  TrajectoryRecord r1 = traj.get(N, replay);

  for (long k = N - 1; k >= 0; --k) {
    TrajectoryRecord r0 = traj.get(k, replay);
    const double dt = traj.dt(k);
    if (scheme.family == Family::ERK) {
      const auto& tab = std::get<ButcherTableau>(scheme.tableau);
      const int s = tab.stages();
      const auto& Y = r1.stage_data.stages;
      if (static_cast<int>(Y.size()) != s) throw Error("adjoint_solve: trajectory lacks stage states");
      std::vector<Matrix> fu(static_cast<std::size_t>(s)), fp(static_cast<std::size_t>(s)), ru, rp;
      std::vector<double> ti(static_cast<std::size_t>(s));
      for (int i = 0; i < s; ++i) {
        const auto si = static_cast<std::size_t>(i);
        ti[si] = r0.t + tab.c[i] * dt;
        fu[si] = eval_explicit_jacobian(p, ti[si], Y[si]);
        if (np > 0) fp[si] = param_jac(p, ti[si], Y[si]);
        if (integrand) {
          ru.push_back(integrand->drdu(ti[si], Y[si]));
          if (np > 0 && integrand->drdp) rp.push_back(integrand->drdp(ti[si], Y[si]));
          if (tab.b[i] != 0.0) *st.cost_integral += (dt * tab.b[i]) * integrand->r(ti[si], Y[si]);
        }
      }
      for (std::size_t c = 0; c < ncost; ++c) {
        const Vector lam = st.lambda[c];
        std::vector<Vector> xi(static_cast<std::size_t>(s));
        Vector acc = lam;
        for (int i = s - 1; i >= 0; --i) {
          const auto si = static_cast<std::size_t>(i);
          Vector nu = tab.b[i] * lam;
          for (int j = i + 1; j < s; ++j)
            if (tab.A(j, i) != 0.0) nu += tab.A(j, i) * xi[static_cast<std::size_t>(j)];
          nu *= dt;
          xi[si] = fu[si].transpose() * nu;
          if (integrand && tab.b[i] != 0.0) xi[si] += (dt * tab.b[i]) * ru[si].row(static_cast<Eigen::Index>(c)).transpose();
          acc += xi[si];
          if (np > 0) {
            st.mu[c] += fp[si].transpose() * nu;
            if (integrand && !rp.empty() && tab.b[i] != 0.0)
              st.mu[c] += (dt * tab.b[i]) * rp[si].row(static_cast<Eigen::Index>(c)).transpose();
          }
        }
        st.lambda[c] = acc;
      }
    } else {
      const double th = scheme.theta;
      const double a = 1.0 / (th * dt);
      const double b = (1.0 - th) / th;
      const double t0 = r0.t, t1 = r1.t;
      const Vector& u0 = r0.u;
      const Vector& u1 = r1.u;
      if (!r1.udot) throw Error("adjoint_solve: trajectory lacks end-point derivatives");
      const Vector& v1 = *r1.udot;
      Vector v0 = Vector::Zero(n);
      if (b != 0.0) v0 = r0.udot ? *r0.udot : consistent_udot(p, t0, u0);

      const LUFactorization J1 = lu_factor(eval_residual_jacobian(p, t1, u1, v1, a));
      const Matrix M1 = mass_of(p, t1, u1, v1);
      std::optional<LUFactorization> M0;
      Matrix K0;
      if (b != 0.0) {
        M0 = lu_factor(mass_of(p, t0, u0, v0));
        K0 = eval_residual_jacobian(p, t0, u0, v0, 0.0);
      }
      Matrix P1, P0;
      if (np > 0) {
        P1 = param_jac(p, t1, u1);
        if (b != 0.0) P0 = param_jac(p, t0, u0);
      }
      Matrix ru0, ru1, rp0, rp1;
      if (integrand) {
        ru1 = integrand->drdu(t1, u1);
        if (th != 1.0) ru0 = integrand->drdu(t0, u0);
        if (np > 0 && integrand->drdp) {
          rp1 = integrand->drdp(t1, u1);
          if (th != 1.0) rp0 = integrand->drdp(t0, u0);
        }
        Vector q = (dt * th) * integrand->r(t1, u1);
        if (th != 1.0) q += (dt * (1.0 - th)) * integrand->r(t0, u0);
        *st.cost_integral += q;
      }
      for (std::size_t c = 0; c < ncost; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        Vector lam1 = st.lambda[c];
        if (integrand) lam1 += (dt * th) * ru1.row(ci).transpose();
        const Vector w = lu_solve_transpose(J1, lam1);
        const Vector z = M1.transpose() * w;
        Vector lam0 = a * z;
        Vector y;
        if (b != 0.0) {
          y = lu_solve_transpose(*M0, z);
          lam0 -= b * (K0.transpose() * y);
        }
        if (integrand && th != 1.0) lam0 += (dt * (1.0 - th)) * ru0.row(ci).transpose();
        if (np > 0) {
          st.mu[c] += P1.transpose() * w;
          if (b != 0.0) st.mu[c] += b * (P0.transpose() * y);
          if (integrand && rp1.size() > 0) {
            st.mu[c] += (dt * th) * rp1.row(ci).transpose();
            if (th != 1.0) st.mu[c] += (dt * (1.0 - th)) * rp0.row(ci).transpose();
          }
        }
        st.lambda[c] = std::move(lam0);
      }
    }
    r1 = std::move(r0);
  }
  return st;
}

}  // namespace odekit
