#include "odekit/solve.hpp"

#include "odekit/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace odekit {

std::string to_string(FinalTimePolicy f) {
  switch (f) {
    case FinalTimePolicy::StepOver: return "stepover";
    case FinalTimePolicy::Interpolate: return "interpolate";
    case FinalTimePolicy::MatchStep: return "matchstep";
  }
  return "?";
}

FinalTimePolicy parse_final_time_policy(const std::string& s) {
  if (s == "stepover") return FinalTimePolicy::StepOver;
  if (s == "interpolate") return FinalTimePolicy::Interpolate;
  if (s == "matchstep") return FinalTimePolicy::MatchStep;
  throw ConfigError("unknown final-time policy '" + s + "' (expected stepover, interpolate or matchstep)");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedMaxTime: return "ReachedMaxTime";
    case Termination::ReachedMaxSteps: return "ReachedMaxSteps";
    case Termination::EventTerminated: return "EventTerminated";
    case Termination::Diverged: return "Diverged";
  }
  return "?";
}

void SolveOptions::validate() const {
  if (!(dt0 > 0.0) || !std::isfinite(dt0)) throw ConfigError("dt0 must be positive and finite");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (!std::isfinite(t0) || !std::isfinite(max_time)) throw ConfigError("t0 and max_time must be finite");
  if (max_time < t0) throw ConfigError("max_time must not precede t0");
}

void attach_monitor(SolveHooks& hooks, MonitorSink& sink, MonitorOptions options) {
  if (options.every_k < 1) throw ConfigError("monitor every_k must be at least 1");
  hooks.monitors.push_back(AttachedMonitor{&sink, options});
}

void validate_configuration(const Problem& p, const Scheme& scheme, const AdaptConfig& adapt) {
  validate(p);
  adapt.validate();
  if (adapt.kind != AdaptKind::None && !scheme.has_error_estimate())
    throw ConfigError("scheme " + scheme.label() +
                      " has no embedded error estimate; run it with fixed steps (adapt none)");
  if (scheme.family == Family::ERK && !has_explicit_rhs(p))
    throw ConfigError("explicit scheme " + scheme.label() + " cannot integrate an implicit or DAE problem");
  if (scheme.family == Family::ARKIMEX && !scheme.fully_implicit && p.kind == EquationKind::DAE && p.rhsfunction)
    throw ConfigError("arkimex on a DAE with an explicit part needs the fully-implicit toggle");
}

namespace {

struct Loop {
  const Problem& p;
  const SolveOptions& opts;
  SolveHooks& hooks;
  SolveResult res;

  void monitor(const MonitorRecord& r, const Vector& u) {
    for (auto& m : hooks.monitors) m.offer(r, u);
  }
};

bool too_small(double dt, double t) { return !(dt > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))); }

}  // namespace

SolveResult solve(const Problem& p, const Vector& u0, const Scheme& scheme, const SolveOptions& opts,
                  const ToleranceSpec& tol, const AdaptConfig& adapt, SolveHooks hooks) {
  opts.validate();
  tol.validate(p.dim);
  validate_configuration(p, scheme, adapt);
  if (static_cast<std::size_t>(u0.size()) != p.dim) throw ConfigError("initial state has the wrong dimension");
  if (!all_finite(u0)) throw ConfigError("initial state has non-finite entries");
  const EventSpec* ev = hooks.events && hooks.events->nevents > 0 ? hooks.events : nullptr;
  if (ev) ev->validate(p.dim);

  const bool adaptive = adapt.kind != AdaptKind::None;
  Stepper stepper(p, scheme, !adaptive);
  StepperState st;
  st.t = opts.t0;
  st.u = u0;
  st.dt = opts.dt0;
  stepper.initialize(st);

  StepOptions sopts;
  sopts.need_dense = ev || opts.final_time_policy == FinalTimePolicy::Interpolate ||
                     (scheme.family == Family::ARKIMEX && scheme.extrapolate_guess);
  sopts.extrapolate_guess = scheme.extrapolate_guess;

  Loop L{p, opts, hooks, {}};
  SolveResult& res = L.res;
  if (hooks.trajectory) hooks.trajectory->set(0, st.t, st.u, st.udot, StageData{});

  EventState evstate;
  Vector h_n;
  if (ev) {
    evstate.reset(ev->nevents);
    h_n = ev->h(st.t, st.u);
  }

  AdaptHistory history;
  bool just_rejected = false;
  double dt = opts.dt0;
  std::optional<double> resync_target;
  res.termination = Termination::ReachedMaxTime;

  auto finish = [&](Termination why, std::string msg = {}) {
    res.termination = why;
    res.message = std::move(msg);
  };

  while (true) {
    if (st.t >= opts.max_time) {
      finish(Termination::ReachedMaxTime);
      break;
    }
    if (res.steps_taken >= opts.max_steps) {
      finish(Termination::ReachedMaxSteps);
      break;
    }
    double dt_try = dt;
    if (resync_target) dt_try = *resync_target - st.t;
    if (opts.final_time_policy == FinalTimePolicy::MatchStep && st.t + dt_try * (1.0 + 1e-8) >= opts.max_time)
      dt_try = opts.max_time - st.t;
    if (too_small(dt_try, st.t)) {
      if (resync_target) {
        resync_target.reset();
        continue;
      }
      finish(Termination::Diverged, "step size underflow at t=" + format_double(st.t));
      break;
    }

    StepOutcome out = stepper.step(st, dt_try, sopts);
    res.counters.nonlinear_iters += out.newton_iters;
    res.counters.linear_iters += out.linear_iters;
    res.counters.rhs_evals += out.rhs_evals;

    MonitorRecord rec;
    rec.step_index = st.step_index + 1;
    rec.t = st.t + dt_try;
    rec.dt = dt_try;
    rec.newton_iters = out.newton_iters;
    rec.linear_iters = out.linear_iters;

    if (!out.ok) {
      ++res.counters.rejected_steps;
      if (out.nonlinear_failure) ++res.counters.nonlinear_failures;
      stepper.invalidate_jacobian();
      just_rejected = true;
      resync_target.reset();
      dt = dt_try * adapt.reject_factor;
      rec.accepted = false;
      rec.next_dt = dt;
      L.monitor(rec, st.u);
      if (opts.max_nonlinear_failures >= 0 && res.counters.nonlinear_failures > opts.max_nonlinear_failures) {
        finish(Termination::Diverged, out.failure);
        break;
      }
      if (too_small(dt, st.t)) {
        finish(Termination::Diverged, out.failure);
        break;
      }
      continue;
    }

    double werr = -1.0;
    if (out.err_estimate) werr = weighted_error_norm(out.u_new, out.u_new - *out.err_estimate, tol, adapt.norm);
    const int ctrl_order = scheme.family == Family::BDF ? out.order_used : scheme.control_order();
    const AdaptDecision dec =
        adaptive ? adapt_decide(adapt, werr, ctrl_order, dt_try, just_rejected, &history) : AdaptDecision{true, dt, werr, 1.0};
    rec.werr = werr;
    rec.next_dt = dec.next_dt;

    if (!dec.accept) {
      ++res.counters.rejected_steps;
      stepper.invalidate_jacobian();
      just_rejected = true;
      resync_target.reset();
      dt = dec.next_dt;
      rec.accepted = false;
      L.monitor(rec, st.u);
      if (too_small(dt, st.t)) {
        finish(Termination::Diverged, "step size underflow at t=" + format_double(st.t));
        break;
      }
      continue;
    }

    rec.accepted = true;
    const double t_prev = st.t;
    const Vector u_prev = st.u;
    const std::optional<Vector> udot_prev = st.udot;
    const double t_next = t_prev + dt_try;
    if (adaptive) adapt_record(history, werr, dt_try);
    just_rejected = false;
    resync_target.reset();
    if (adaptive) dt = dec.next_dt;

    std::vector<EventRecord> fired;
    if (ev) {
      const Vector h_next = ev->h(t_next, out.u_new);
      const auto cands = scan_events(*ev, t_prev, h_n, t_next, h_next, &evstate);
      if (!cands.empty()) {
        const StageData& sd = out.stage_data;
        auto interp = [&sd](double tq) { return interpolate(sd, tq); };
        std::vector<EventRecord> located;
        for (int id : cands) located.push_back(locate_event(*ev, interp, t_prev, t_next, id));
        double tmin = located.front().t_star;
        for (const auto& r : located) tmin = std::min(tmin, r.t_star);
        const double tie = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(tmin));
        for (auto& r : located)
          if (r.t_star <= tmin + tie) {
            r.step_index = st.step_index + 1;
            fired.push_back(r);
          }
      }
      if (fired.empty()) {
        evstate.update(*ev, h_next);
        h_n = h_next;
      }
    }

    if (!fired.empty()) {
      const double ts = fired.front().t_star;
      const Vector u_star = interpolate(out.stage_data, ts);
      PostEventPlan plan;
      try {
        plan = handle_post_event(*ev, fired, u_star, t_next);
      } catch (const Error& e) {
        finish(Termination::Diverged, e.what());
        break;
      }
      st.t = ts;
      st.u = plan.u;
      st.dt = ts - t_prev;
      ++st.step_index;
      stepper.restart(st);
      ++res.steps_taken;
      for (const auto& r : fired) {
        rec.event_flags.push_back(r.event_id);
        evstate.armed[static_cast<std::size_t>(r.event_id)] = false;
        res.events.push_back(r);
      }
      h_n = ev->h(st.t, st.u);
      evstate.update(*ev, h_n);
      rec.t = ts;
      rec.dt = ts - t_prev;
      L.monitor(rec, st.u);
      if (hooks.trajectory) hooks.trajectory->set(st.step_index, st.t, st.u, st.udot, out.stage_data);
      if (plan.terminate) {
        finish(Termination::EventTerminated);
        break;
      }
      if (t_next - ts > 0.0) resync_target = t_next;
      continue;
    }

    stepper.accept(st, out);
    ++res.steps_taken;
    // Records describe the integrator step; only the returned state is interpolated.
    L.monitor(rec, st.u);
    if (opts.final_time_policy == FinalTimePolicy::Interpolate && st.t > opts.max_time) {
      st.u = interpolate(out.stage_data, opts.max_time);
      st.t = opts.max_time;
      st.udot.reset();
    }
    if (hooks.trajectory) hooks.trajectory->set(st.step_index, st.t, st.u, st.udot, out.stage_data);
    if (hooks.on_accept) {
      AcceptedStep a{st.step_index, t_prev, st.t, &u_prev, &udot_prev, &out};
      hooks.on_accept(a);
    }
  }

  res.final_t = st.t;
  res.final_u = st.u;
  res.steps_rejected = res.counters.rejected_steps;
  return res;
}

std::string view_summary(const SolveResult& result, const SummaryConfig& config) {
  std::ostringstream os;
  const auto& o = config.options;
  os << "TS Object: odekit\n";
  if (!config.problem_name.empty()) os << "  problem: " << config.problem_name << "\n";
  os << "  type: " << config.scheme.label() << "\n";
  os << "  coefficients digest: " << coefficient_digest(config.scheme.tableau) << "\n";
  os << "  order: " << config.scheme.order() << "\n";
  os << "  maximum steps=" << o.max_steps << ", maximum time=" << o.max_time << "\n";
  os << "  initial time=" << o.t0 << ", initial step=" << o.dt0 << "\n";
  os << "  final time policy: " << to_string(o.final_time_policy) << "\n";
  os << "  tolerances: rtol=" << config.tolerances.rtol << ", atol=";
  const auto& atol = config.tolerances.atol;
  if (atol.size() == 1) {
    os << atol[0];
  } else {
    os << "[";
    for (Eigen::Index i = 0; i < atol.size(); ++i) os << (i ? ", " : "") << atol[i];
    os << "]";
  }
  os << "\n";
  const auto& a = config.adapt;
  os << "  TSAdapt type: " << to_string(a.kind) << "\n";
  if (a.kind != AdaptKind::None) {
    os << "    safety factor " << a.safety << ", extra factor after step rejection " << a.reject_factor << "\n";
    os << "    clip fastest decrease " << a.clip_low << ", fastest increase " << a.clip_high << "\n";
    if (a.kind == AdaptKind::DSP)
      os << "    filter beta1=" << a.dsp_filter.beta1 << ", beta2=" << a.dsp_filter.beta2
         << ", alpha2=" << a.dsp_filter.alpha2 << "\n";
    os << "    error norm: " << (a.norm == NormKind::Inf ? "inf" : "2") << "\n";
  }
  const auto& c = result.counters;
  os << "  total number of steps=" << result.steps_taken << "\n";
  os << "  total number of nonlinear solver iterations=" << c.nonlinear_iters << "\n";
  os << "  total number of linear solver iterations=" << c.linear_iters << "\n";
  os << "  total number of nonlinear solve failures=" << c.nonlinear_failures << "\n";
  os << "  total number of rejected steps=" << c.rejected_steps << "\n";
  os << "  total number of right-hand-side evaluations=" << c.rhs_evals << "\n";
  os << "  events located=" << result.events.size() << "\n";
  os << "  termination: " << to_string(result.termination) << " at t=" << format_double(result.final_t) << "\n";
  if (!result.message.empty()) os << "  message: " << result.message << "\n";
  return os.str();
}

}  // namespace odekit
