#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace odekit::cli {

using nlohmann::json;

namespace {

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

json butcher_json(const ButcherTableau& t) {
  json j{{"A", to_json(t.A)}, {"b", to_json(t.b)}, {"c", to_json(t.c)}};
  j["b_hat"] = t.b_hat ? to_json(*t.b_hat) : json(nullptr);
  j["bstar"] = t.bstar ? to_json(*t.bstar) : json(nullptr);
  return j;
}

Vector final_reference(const Prepared& base, double tol, long max_steps) {
  Prepared p = base;
  p.tolerances.rtol = tol;
  p.tolerances.atol = base.tolerances.atol * (tol / base.tolerances.rtol);
  p.options.max_steps = max_steps;
  p.options.final_time_policy = FinalTimePolicy::Interpolate;
  const SolveResult r = solve(p.instance.problem, p.instance.u0, p.scheme, p.options, p.tolerances, p.adapt);
  if (r.termination != Termination::ReachedMaxTime)
    throw Error("run with tolerance " + format_double(tol) + " ended with " + to_string(r.termination) + " at t=" +
                format_double(r.final_t));
  return r.final_u;
}

double psi_at_end(const ProblemInstance& pi, const Scheme& scheme, const SolveOptions& opts, const Vector& u0,
                  const Objective& obj) {
  AdaptConfig fixed;
  fixed.kind = AdaptKind::None;
  const SolveResult r = solve(pi.problem, u0, scheme, opts, ToleranceSpec{}, fixed);
  if (r.termination != Termination::ReachedMaxTime) throw Error("finite-difference run failed: " + r.message);
  return obj.value(r.final_u);
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  p.instance = build_problem(cfg.problem, cfg.params);
  p.scheme = parse_scheme(cfg.scheme.empty() ? p.instance.default_scheme : cfg.scheme);
  p.options = p.instance.defaults;
  if (cfg.dt) p.options.dt0 = *cfg.dt;
  if (cfg.max_time) p.options.max_time = *cfg.max_time;
  if (cfg.max_steps) p.options.max_steps = *cfg.max_steps;
  if (cfg.final_time) p.options.final_time_policy = parse_final_time_policy(*cfg.final_time);
  p.tolerances = p.instance.tolerances;
  if (cfg.rtol) p.tolerances.rtol = *cfg.rtol;
  if (cfg.atol) {
    const auto& a = *cfg.atol;
    p.tolerances.atol = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
  }
  if (cfg.adapt)
    p.adapt.kind = parse_adapt_kind(*cfg.adapt);
  else
    p.adapt.kind = p.scheme.has_error_estimate() ? AdaptKind::Basic : AdaptKind::None;
  p.options.validate();
  p.tolerances.validate(p.instance.problem.dim);
  validate_configuration(p.instance.problem, p.scheme, p.adapt);
  return p;
}

std::string result_json(const Prepared& prep, const SolveResult& res) {
  json j;
  j["problem"] = prep.instance.name;
  j["scheme"] = prep.scheme.label();
  j["final_t"] = res.final_t;
  j["final_u"] = to_json(res.final_u);
  j["steps_taken"] = res.steps_taken;
  j["steps_rejected"] = res.steps_rejected;
  j["counters"] = {{"nonlinear_iters", res.counters.nonlinear_iters},
                   {"linear_iters", res.counters.linear_iters},
                   {"rejected_steps", res.counters.rejected_steps},
                   {"nonlinear_failures", res.counters.nonlinear_failures},
                   {"rhs_evals", res.counters.rhs_evals}};
  j["termination"] = to_string(res.termination);
  if (!res.message.empty()) j["message"] = res.message;
  json ev = json::array();
  for (const auto& e : res.events)
    ev.push_back({{"event_id", e.event_id}, {"t_star", e.t_star}, {"u_star", to_json(e.u_star)}, {"h_value", e.h_value}});
  j["events"] = ev;
  return j.dump(2) + "\n";
}

SolveRun cmd_solve(const RunConfig& cfg) {
  SolveRun run;
  run.prepared = prepare(cfg);
  const Prepared& p = run.prepared;
  CollectingSink collect;
  SolveHooks hooks;
  if (p.instance.events) hooks.events = &*p.instance.events;
  attach_monitor(hooks, collect, MonitorOptions{1, cfg.snapshot});
  std::ofstream file;
  std::optional<StreamSink> stream;
  if (!cfg.monitor_path.empty()) {
    const MonitorFormat fmt = monitor_format_for_path(cfg.monitor_path);
    file.open(cfg.monitor_path);
    if (!file) throw ConfigError("cannot open monitor file " + cfg.monitor_path);
    stream.emplace(file, fmt, cfg.snapshot ? p.instance.problem.dim : 0);
    attach_monitor(hooks, *stream, MonitorOptions{1, cfg.snapshot});
  }
  run.result = solve(p.instance.problem, p.instance.u0, p.scheme, p.options, p.tolerances, p.adapt, std::move(hooks));
  if (stream) stream->finish();
  run.records = std::move(collect.records);
  return run;
}

double relative_error(const Vector& u, const Vector& ref) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) e = std::max(e, std::abs(u[i] - ref[i]) / std::max(std::abs(ref[i]), 1e-12));
  return e;
}

std::vector<SweepRow> cmd_sweep(const SweepConfig& cfg) {
  if (cfg.tolerances.size() < 2) throw ConfigError("sweep needs at least two tolerances");
  const auto [mn, mx] = std::minmax_element(cfg.tolerances.begin(), cfg.tolerances.end());
  if (!(*mn > 0.0)) throw ConfigError("sweep tolerances must be positive");
  if (*mx / *mn < 100.0 * (1.0 - 1e-12)) throw ConfigError("sweep tolerances must span at least two decades");
  std::vector<std::string> schemes;
  std::set<std::string> seen;
  for (const auto& s : cfg.schemes) {
    const std::string label = parse_scheme(s).label();
    if (seen.insert(label).second) schemes.push_back(s);
  }
  if (schemes.empty()) throw ConfigError("sweep needs at least one scheme");
  std::vector<double> tols = cfg.tolerances;
  std::sort(tols.begin(), tols.end(), std::greater<>());
  tols.erase(std::unique(tols.begin(), tols.end()), tols.end());

  RunConfig base;
  base.problem = cfg.problem;
  base.params = cfg.params;
  base.adapt = "basic";
  base.scheme = cfg.reference_scheme.empty() ? schemes.front() : cfg.reference_scheme;
  const Prepared ref_prep = prepare(base);
  const Vector ref = final_reference(ref_prep, tols.back() / cfg.reference_factor, cfg.max_steps);

  std::vector<SweepRow> rows;
  for (const auto& s : schemes) {
    RunConfig rc = base;
    rc.scheme = s;
    const Prepared prep = prepare(rc);
    for (double tol : tols) {
      Prepared p = prep;
      p.tolerances.rtol = tol;
      p.tolerances.atol = prep.tolerances.atol * (tol / prep.tolerances.rtol);
      p.options.final_time_policy = FinalTimePolicy::Interpolate;
      p.options.max_steps = cfg.max_steps;
      const auto start = std::chrono::steady_clock::now();
      const SolveResult r = solve(p.instance.problem, p.instance.u0, p.scheme, p.options, p.tolerances, p.adapt);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (r.termination != Termination::ReachedMaxTime)
        throw Error("sweep run " + p.scheme.label() + " at tolerance " + format_double(tol) + " ended with " +
                    to_string(r.termination));
      rows.push_back(SweepRow{p.scheme.label(), tol, relative_error(r.final_u, ref), r.steps_taken,
                              r.counters.rhs_evals, r.counters.nonlinear_iters, wall});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.tolerance > b.tolerance;
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "scheme,tolerance,error,steps,rhs_evals,newton_iters,wall_time\n";
  for (const auto& r : rows)
    out += r.scheme + ',' + format_double(r.tolerance) + ',' + format_double(r.error) + ',' + std::to_string(r.steps) +
           ',' + std::to_string(r.rhs_evals) + ',' + std::to_string(r.newton_iters) + ',' + format_double(r.wall_time) +
           '\n';
  return out;
}

OrderReport cmd_order(const OrderConfig& cfg) {
  if (cfg.dts.size() < 2) throw ConfigError("order study needs at least two step sizes");
  RunConfig rc;
  rc.problem = cfg.problem;
  rc.params = cfg.params;
  rc.scheme = cfg.scheme;
  rc.adapt = "none";
  rc.max_time = cfg.max_time;
  rc.final_time = "matchstep";
  Prepared base = prepare(rc);
  base.options.max_steps = 100000000;
  OrderReport rep;
  rep.scheme = base.scheme.label();
  rep.declared = base.scheme.order();

  Vector ref;
  if (base.instance.exact) {
    ref = base.instance.exact(base.options.max_time);
  } else {
    Prepared fine = base;
    fine.options.dt0 = *std::min_element(cfg.dts.begin(), cfg.dts.end()) / 16.0;
    const SolveResult r = solve(fine.instance.problem, fine.instance.u0, fine.scheme, fine.options, fine.tolerances, fine.adapt);
    ref = r.final_u;
  }
  for (double dt : cfg.dts) {
    if (!(dt > 0.0)) throw ConfigError("step sizes must be positive");
    Prepared p = base;
    p.options.dt0 = dt;
    const SolveResult r = solve(p.instance.problem, p.instance.u0, p.scheme, p.options, p.tolerances, p.adapt);
    if (r.termination != Termination::ReachedMaxTime)
      throw Error("order run with dt=" + format_double(dt) + " ended with " + to_string(r.termination));
    OrderRow row{dt, (r.final_u - ref).cwiseAbs().maxCoeff(), std::nullopt};
    if (!rep.rows.empty()) {
      const OrderRow& prev = rep.rows.back();
      row.observed = std::log(prev.error / row.error) / std::log(prev.dt / dt);
    }
    rep.rows.push_back(row);
  }
  std::vector<double> obs;
  for (const auto& r : rep.rows)
    if (r.observed) obs.push_back(*r.observed);
  if (obs.size() >= 2) {
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
    double var = 0.0;
    for (double o : obs) var += (o - mean) * (o - mean);
    var /= static_cast<double>(obs.size() - 1);
    rep.erratic = std::sqrt(var) > 0.5;
  }
  for (double o : obs)
    if (!std::isfinite(o)) rep.erratic = true;
  return rep;
}

std::string order_text(const OrderReport& r) {
  std::ostringstream os;
  os << "scheme " << r.scheme << " declared order " << r.declared << "\n";
  os << "dt,error,observed\n";
  for (const auto& row : r.rows)
    os << format_double(row.dt) << ',' << format_double(row.error) << ','
       << (row.observed ? format_double(*row.observed) : std::string()) << "\n";
  if (r.erratic) os << "warning: error ratios are erratic; the problem may not be smooth on this interval\n";
  return os.str();
}

double relative_difference(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("relative_difference: size mismatch");
  if (a.size() == 0) return 0.0;
  const double d = (a - b).cwiseAbs().maxCoeff();
  const double s = b.cwiseAbs().maxCoeff();
  return s > 0.0 ? d / s : d;
}

AdjointReport cmd_adjoint_check(const AdjointConfig& cfg) {
  RunConfig rc;
  rc.problem = cfg.problem;
  rc.params = cfg.params;
  rc.scheme = cfg.scheme;
  rc.adapt = "none";
  rc.dt = cfg.dt;
  rc.max_time = cfg.max_time;
  rc.final_time = "matchstep";
  Prepared p = prepare(rc);
  if (p.scheme.family != Family::ERK && p.scheme.family != Family::Theta)
    throw ConfigError("adjoint-check supports rk and theta schemes only, not " + p.scheme.label());
  p.options.max_steps = 100000000;
  p.scheme.newton.abs_tol = 1e-14;
  p.scheme.newton.rel_tol = 1e-14;
  p.scheme.newton.step_tol = 1e-15;
  p.scheme.newton.max_it = 25;
  const ProblemInstance& pi = p.instance;
  const Problem& prob = pi.problem;
  const Objective obj = make_objective(cfg.objective, prob.dim);
  const auto n = static_cast<Eigen::Index>(prob.dim);
  const auto np = static_cast<Eigen::Index>(prob.nparams);

  AdjointReport rep;
  Trajectory traj(cfg.checkpoints == 0 ? TrajectoryPolicy::StoreAll : TrajectoryPolicy::Binomial, cfg.checkpoints);
  const SolveResult fwd = record_forward(prob, pi.u0, p.scheme, p.options, traj);
  if (fwd.termination != Termination::ReachedMaxTime) throw Error("forward run failed: " + fwd.message);
  rep.steps = fwd.steps_taken;
  AdjointState terminal;
  terminal.lambda = {obj.gradient(fwd.final_u)};
  const AdjointState adj = adjoint_solve(prob, p.scheme, traj, terminal);
  rep.lambda0 = adj.lambda[0];
  rep.mu0 = adj.mu.empty() ? Vector() : adj.mu[0];
  rep.recomputations = traj.recomputations();
  rep.max_retained = traj.max_retained();

  const ForwardSensitivity fic =
      forward_solve(prob, pi.u0, p.scheme, p.options, Matrix::Identity(n, n), SeedMode::InitialConditions);
  rep.forward_u0 = total_derivative(obj.gradient(fwd.final_u), Vector(), fic);
  if (np > 0) {
    const ForwardSensitivity fp =
        forward_solve(prob, pi.u0, p.scheme, p.options, Matrix::Zero(n, np), SeedMode::Parameters);
    rep.forward_p = total_derivative(obj.gradient(fwd.final_u), Vector(), fp);
  }

  rep.fd_u0 = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = cfg.fd_step * std::max(std::abs(pi.u0[i]), 1.0);
    Vector up = pi.u0, um = pi.u0;
    up[i] += h;
    um[i] -= h;
    rep.fd_u0[i] = (psi_at_end(pi, p.scheme, p.options, up, obj) - psi_at_end(pi, p.scheme, p.options, um, obj)) / (2 * h);
  }
  if (np > 0) {
    rep.fd_p = Vector(np);
    for (Eigen::Index j = 0; j < np; ++j) {
      const std::string& name = pi.param_names.at(static_cast<std::size_t>(j));
      const double pv = pi.params.at(name);
      const double h = cfg.fd_step * std::max(std::abs(pv), 1.0);
      ParamMap plus = pi.params, minus = pi.params;
      plus[name] = pv + h;
      minus[name] = pv - h;
      const ProblemInstance ip = build_problem(pi.name, plus), im = build_problem(pi.name, minus);
      rep.fd_p[j] = (psi_at_end(ip, p.scheme, p.options, pi.u0, obj) - psi_at_end(im, p.scheme, p.options, pi.u0, obj)) / (2 * h);
    }
  }
  auto join = [n, np](const Vector& a, const Vector& b) {
    Vector v(n + np);
    v.head(n) = a;
    if (np > 0) v.tail(np) = b;
    return v;
  };
  const Vector adj_all = join(rep.lambda0, rep.mu0);
  const Vector fd_all = join(rep.fd_u0, rep.fd_p);
  const Vector fwd_all = join(rep.forward_u0, rep.forward_p);
  rep.adjoint_vs_fd = relative_difference(adj_all, fd_all);
  rep.forward_vs_adjoint = relative_difference(fwd_all, adj_all);
  return rep;
}

std::string adjoint_text(const AdjointReport& r) {
  std::ostringstream os;
  auto vec = [&os](const char* label, const Vector& v) {
    os << label;
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : " [") << format_double(v[i]);
    os << (v.size() ? "]\n" : " []\n");
  };
  os << "steps " << r.steps << ", recomputed steps " << r.recomputations << ", max checkpoints held " << r.max_retained
     << "\n";
  vec("adjoint lambda0:", r.lambda0);
  vec("forward d/du0:  ", r.forward_u0);
  vec("fd d/du0:       ", r.fd_u0);
  if (r.mu0.size()) {
    vec("adjoint mu0:    ", r.mu0);
    vec("forward d/dp:   ", r.forward_p);
    vec("fd d/dp:        ", r.fd_p);
  }
  os << "adjoint vs fd relative difference: " << format_double(r.adjoint_vs_fd) << "\n";
  os << "forward vs adjoint relative difference: " << format_double(r.forward_vs_adjoint) << "\n";
  return os.str();
}

EventsRun cmd_events(const RunConfig& cfg) {
  RunConfig rc = cfg;
  rc.snapshot = true;
  EventsRun er;
  er.run = cmd_solve(rc);
  const std::size_t n = er.run.prepared.instance.problem.dim;
  std::vector<MonitorRecord> accepted;
  for (const auto& r : er.run.records)
    if (r.accepted) accepted.push_back(r);
  er.trajectory_csv = emit(accepted, MonitorFormat::CSV, n);
  std::string ev = "event_id,t_star";
  for (std::size_t i = 0; i < n; ++i) ev += ",u" + std::to_string(i);
  ev += ",h_residual\n";
  for (const auto& e : er.run.result.events) {
    ev += std::to_string(e.event_id) + ',' + format_double(e.t_star);
    for (Eigen::Index i = 0; i < e.u_star.size(); ++i) ev += ',' + format_double(e.u_star[i]);
    ev += ',' + format_double(e.h_value) + '\n';
  }
  er.events_csv = std::move(ev);
  return er;
}

std::string tableau_json(const std::string& name) {
  const Tableau& t = registry_get(name);
  json j;
  j["name"] = name_of(t);
  const Family f = family_of(t);
  static const char* fam[] = {"erk", "theta", "arkimex", "rosw", "bdf"};
  j["family"] = fam[static_cast<int>(f)];
  j["order"] = order_of(t);
  j["embedded_order"] = embedded_order_of(t);
  if (const auto* b = std::get_if<ButcherTableau>(&t)) {
    j["stages"] = b->stages();
    j.update(butcher_json(*b));
    j["l_stable"] = b->l_stable;
  } else if (const auto* im = std::get_if<IMEXTableau>(&t)) {
    j["stages"] = im->stages();
    j["explicit"] = butcher_json(im->explicit_part);
    j["implicit"] = butcher_json(im->implicit_part);
    j["bstar"] = im->bstar ? to_json(*im->bstar) : json(nullptr);
    j["stiffly_accurate"] = im->stiffly_accurate;
    j["l_stable"] = im->l_stable;
  } else if (const auto* r = std::get_if<RosTableau>(&t)) {
    j["stages"] = r->stages();
    j["Gamma"] = to_json(r->Gamma);
    j["A"] = to_json(r->A);
    j["b"] = to_json(r->b);
    j["b_hat"] = r->b_hat ? to_json(*r->b_hat) : json(nullptr);
    j["c"] = to_json(Vector(r->alpha()));
    j["w_method"] = r->w_method;
    j["l_stable"] = r->l_stable;
    const auto& tr = r->transform;
    if (!tr.has_explicit_rows) {
      j["transform"] = {{"omega", to_json(tr.omega)},
                        {"d", to_json(tr.d)},
                        {"m", to_json(tr.m)},
                        {"m_hat", tr.m_hat ? to_json(*tr.m_hat) : json(nullptr)},
                        {"gamma_sums", to_json(tr.gamma_sums)}};
    } else {
      j["transform"] = nullptr;
    }
  } else {
    const auto& d = std::get<BDFDescriptor>(t);
    std::vector<double> nodes;
    for (int k = 0; k <= d.order; ++k) nodes.push_back(-static_cast<double>(k) + 1.0);
    j["stages"] = 1;
    j["uniform_coefficients"] = to_json(bdf_coefficients(nodes));
  }
  j["digest"] = coefficient_digest(t);
  return j.dump(2) + "\n";
}

std::string problems_text() {
  std::ostringstream os;
  for (const auto& e : problem_library()) {
    os << e.name << ": " << e.description << "\n";
    if (!e.defaults.empty()) {
      os << "  parameters:";
      for (const auto& [k, v] : e.defaults) os << " " << k << "=" << format_double(v);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace odekit::cli
