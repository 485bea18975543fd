#include "odekit/sensitivity.hpp"

namespace odekit {

namespace {

Matrix mass_of(const Problem& p, double t, const Vector& u, const Vector& udot) {
  const auto n = static_cast<Eigen::Index>(p.dim);
  if (p.identity_mass || !p.ifunction) return Matrix::Identity(n, n);
  return eval_mass(p, t, u, udot);
}

}  // namespace

ForwardSensitivity forward_solve(const Problem& p, const Vector& u0, const Scheme& scheme, const SolveOptions& opts,
                                 const Matrix& S0, SeedMode mode, const CostIntegrand* integrand, SolveResult* result,
                                 Trajectory* traj) {
  if (scheme.family != Family::ERK && scheme.family != Family::Theta)
    throw ConfigError("sensitivities are available for rk and theta schemes only, not " + scheme.label());
  if (scheme.family == Family::ERK && (!has_explicit_rhs(p) || p.has_mass))
    throw ConfigError("rk sensitivities need an explicit problem without a mass matrix");
  if (opts.final_time_policy == FinalTimePolicy::Interpolate)
    throw ConfigError("forward sensitivities do not support the interpolate final-time policy");
  const auto n = static_cast<Eigen::Index>(p.dim);
  const bool params = mode == SeedMode::Parameters;
  if (params && p.nparams == 0) throw ConfigError("forward_solve: problem has no parameters");
  if (S0.size() == 0) throw ConfigError("forward_solve: empty seed matrix");
  if (S0.rows() != n) throw ConfigError("forward_solve: seed matrix must have one row per state component");
  if (params && S0.cols() != static_cast<Eigen::Index>(p.nparams))
    throw ConfigError("forward_solve: parameter seed needs one column per parameter");
  if (params && !p.param_jacobian) throw ConfigError("forward_solve: param_jacobian is required");
  const Eigen::Index m = S0.cols();
  const Eigen::Index nc = integrand ? static_cast<Eigen::Index>(integrand->ncost) : 0;

  ForwardSensitivity fs;
  fs.S = S0;
  fs.quadrature_sensitivity = Matrix::Zero(nc, m);
  fs.cost_integral = Vector::Zero(nc);

  auto add_quad = [&](double w, double t, const Vector& u, const Matrix& S) {
    if (!integrand || w == 0.0) return;
    fs.cost_integral += w * integrand->r(t, u);
    Matrix dq = integrand->drdu(t, u) * S;
    if (params && integrand->drdp) dq += integrand->drdp(t, u);
    fs.quadrature_sensitivity += w * dq;
  };

  SolveHooks hooks;
  hooks.trajectory = traj;
  hooks.on_accept = [&](const AcceptedStep& a) {
    const StageData& sd = a.outcome->stage_data;
    const double dt = sd.dt;
    const double t0 = a.t_prev;
    if (scheme.family == Family::ERK) {
      const auto& tab = std::get<ButcherTableau>(scheme.tableau);
      const int s = tab.stages();
      std::vector<Matrix> dk(static_cast<std::size_t>(s));
      Matrix S1 = fs.S;
      for (int i = 0; i < s; ++i) {
        const auto si = static_cast<std::size_t>(i);
        Matrix dY = fs.S;
        for (int j = 0; j < i; ++j)
          if (tab.A(i, j) != 0.0) dY += (dt * tab.A(i, j)) * dk[static_cast<std::size_t>(j)];
        const double ti = t0 + tab.c[i] * dt;
        const Vector& Y = sd.stages[si];
        dk[si] = eval_explicit_jacobian(p, ti, Y) * dY;
        if (params) dk[si] += eval_param_jacobian(p, ti, Y);
        add_quad(dt * tab.b[i], ti, Y, dY);
        if (tab.b[i] != 0.0) S1 += (dt * tab.b[i]) * dk[si];
      }
      fs.S = std::move(S1);
    } else {
      const double th = scheme.theta;
      const double ac = 1.0 / (th * dt);
      const double bc = (1.0 - th) / th;
      const double t1 = a.t_new;
      const Vector& u0 = *a.u_prev;
      const Vector& u1 = a.outcome->u_new;
      const Vector& v1 = *a.outcome->udot_new;
      Matrix rhs = ac * fs.S;
      if (bc != 0.0) {
        const Vector v0 = *a.udot_prev ? **a.udot_prev : consistent_udot(p, t0, u0);
        Matrix src = -eval_residual_jacobian(p, t0, u0, v0, 0.0) * fs.S;
        if (params) src += eval_param_jacobian(p, t0, u0);
        rhs += bc * lu_solve(lu_factor(mass_of(p, t0, u0, v0)), src);
      }
      Matrix r = mass_of(p, t1, u1, v1) * rhs;
      if (params) r += eval_param_jacobian(p, t1, u1);
      Matrix S1 = lu_solve(lu_factor(eval_residual_jacobian(p, t1, u1, v1, ac)), r);
      add_quad(dt * (1.0 - th), t0, u0, fs.S);
      add_quad(dt * th, t1, u1, S1);
      fs.S = std::move(S1);
    }
  };

  AdaptConfig fixed;
  fixed.kind = AdaptKind::None;
  SolveResult res = solve(p, u0, scheme, opts, ToleranceSpec{}, fixed, std::move(hooks));
  if (result) *result = res;
  if (res.termination == Termination::Diverged) throw Error("forward_solve: forward run diverged: " + res.message);
  return fs;
}

Vector total_derivative(const Vector& phi_u, const Vector& phi_p, const ForwardSensitivity& S, std::size_t cost_index) {
  if (phi_u.size() != S.S.rows()) throw ConfigError("total_derivative: phi_u has the wrong length");
  if (phi_p.size() != 0 && phi_p.size() != S.S.cols()) throw ConfigError("total_derivative: phi_p has the wrong length");
  Vector g = S.S.transpose() * phi_u;
  if (phi_p.size() != 0) g += phi_p;
  if (S.quadrature_sensitivity.rows() > 0) {
    if (static_cast<Eigen::Index>(cost_index) >= S.quadrature_sensitivity.rows())
      throw ConfigError("total_derivative: cost index out of range");
    g += S.quadrature_sensitivity.row(static_cast<Eigen::Index>(cost_index)).transpose();
  }
  return g;
}

SolveResult record_forward(const Problem& p, const Vector& u0, const Scheme& scheme, const SolveOptions& opts,
                           Trajectory& traj) {
  if (scheme.family != Family::ERK && scheme.family != Family::Theta)
    throw ConfigError("sensitivities are available for rk and theta schemes only, not " + scheme.label());
  SolveHooks hooks;
  hooks.trajectory = &traj;
  AdaptConfig fixed;
  fixed.kind = AdaptKind::None;
  return solve(p, u0, scheme, opts, ToleranceSpec{}, fixed, std::move(hooks));
}

}  // namespace odekit
