#include "odekit/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace odekit {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string family_prefix(Family f) {
  switch (f) {
    case Family::ERK: return "rk";
    case Family::Theta: return "theta";
    case Family::ARKIMEX: return "arkimex";
    case Family::RosW: return "rosw";
    case Family::BDF: return "bdf";
  }
  return "?";
}

Scheme from_tableau(const Tableau& t) {
  Scheme s;
  s.family = family_of(t);
  s.name = name_of(t);
  s.tableau = t;
  if (s.family == Family::Theta) s.theta = std::get<ButcherTableau>(t).b[1];
  if (s.family == Family::BDF) s.bdf_order = std::get<BDFDescriptor>(t).order;
  return s;
}

}  // namespace

int Scheme::order() const {
  switch (family) {
    case Family::Theta: return theta == 0.5 ? 2 : 1;
    case Family::BDF: return bdf_order;
    default: return order_of(tableau);
  }
}

int Scheme::control_order() const {
  if (family == Family::BDF) return bdf_order;
  return std::min(order(), embedded_order_of(tableau));
}

bool Scheme::has_error_estimate() const {
  switch (family) {
    case Family::ERK: return std::get<ButcherTableau>(tableau).has_embedded();
    case Family::Theta: return false;
    case Family::ARKIMEX: return std::get<IMEXTableau>(tableau).has_embedded();
    case Family::RosW: return std::get<RosTableau>(tableau).has_embedded();
    case Family::BDF: return true;
  }
  return false;
}

std::string Scheme::label() const {
  if (family == Family::Theta && name == "theta") {
    std::ostringstream os;
    os << "theta:" << theta;
    return os.str();
  }
  std::string l = family_prefix(family) + ":" + name;
  if (fully_implicit) l += ":fully-implicit";
  if (reuse_jacobian) l += ":reuse-jacobian";
  if (!extrapolate_guess) l += ":no-extrapolate";
  return l;
}

Scheme parse_scheme(const std::string& spec) {
  if (spec.empty()) throw ConfigError("empty scheme");
  const auto parts = split(spec, ':');
  if (parts.size() == 1) return from_tableau(registry_get(parts[0]));
  const std::string& fam = parts[0];
  const std::string& name = parts[1];
  Scheme s;
  if (fam == "rk" || fam == "erk" || fam == "ssp" || fam == "euler") {
    std::string n = name;
    if (fam == "ssp" && n.rfind("ssp-", 0) != 0) n = "ssp-" + n;
    s = from_tableau(registry_get(n));
    if (s.family != Family::ERK) throw ConfigError("scheme '" + n + "' is not an explicit Runge-Kutta method");
  } else if (fam == "theta") {
    if (name == "beuler" || name == "cn" || name == "theta") {
      s = from_tableau(registry_get(name));
    } else {
      double th = 0.0;
      try {
        std::size_t used = 0;
        th = std::stod(name, &used);
        if (used != name.size()) throw std::invalid_argument(name);
      } catch (const std::exception&) {
        throw ConfigError("theta scheme needs a value in (0, 1] or one of beuler, cn; got '" + name + "'");
      }
      s = from_tableau(Tableau(theta_tableau(th)));
      s.theta = th;
    }
  } else if (fam == "arkimex") {
    s = from_tableau(registry_get(name));
    if (s.family != Family::ARKIMEX) throw ConfigError("scheme '" + name + "' is not an IMEX pair");
  } else if (fam == "rosw") {
    s = from_tableau(registry_get(name));
    if (s.family != Family::RosW) throw ConfigError("scheme '" + name + "' is not a Rosenbrock-W method");
  } else if (fam == "bdf") {
    std::string n = name.rfind("bdf", 0) == 0 ? name.substr(3) : name;
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(n, &used);
      if (used != n.size()) throw std::invalid_argument(n);
    } catch (const std::exception&) {
      throw ConfigError("bdf scheme needs an order 1..6; got '" + name + "'");
    }
    if (k < 1 || k > 6) throw ConfigError("bdf order " + std::to_string(k) + " outside 1..6");
    s = from_tableau(registry_get("bdf" + std::to_string(k)));
  } else {
    throw ConfigError("unknown scheme family '" + fam + "'; expected rk, ssp, theta, arkimex, rosw or bdf");
  }
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const std::string& o = parts[i];
    if (o == "fully-implicit" && s.family == Family::ARKIMEX)
      s.fully_implicit = true;
    else if (o == "no-extrapolate" && s.family == Family::ARKIMEX)
      s.extrapolate_guess = false;
    else if (o == "reuse-jacobian" && s.family == Family::RosW)
      s.reuse_jacobian = true;
    else
      throw ConfigError("option '" + o + "' does not apply to scheme " + s.label());
  }
  return s;
}

Stepper::Stepper(const Problem& p, Scheme scheme, bool fixed_step)
    : p_(p), scheme_(std::move(scheme)), fixed_step_(fixed_step) {
  if (scheme_.family == Family::ERK && !has_explicit_rhs(p_))
    throw ConfigError("explicit scheme " + scheme_.label() + " needs a problem with an explicit right-hand side");
  if (scheme_.reuse_jacobian && !std::get<RosTableau>(scheme_.tableau).w_method)
    throw ConfigError(scheme_.label() + ": Jacobian reuse requires a W-method tableau");
}

void Stepper::initialize(StepperState& s) const {
  s.bdf_history.clear();
  s.previous.reset();
  if (scheme_.family == Family::BDF) s.bdf_history.emplace_front(s.t, s.u);
}

StepOutcome Stepper::step(const StepperState& s, double dt, const StepOptions& opts) {
  StepOptions o = opts;
  o.newton = scheme_.newton;
  switch (scheme_.family) {
    case Family::ERK:
      return erk_step(p_, std::get<ButcherTableau>(scheme_.tableau), s, dt, o);
    case Family::Theta:
      return theta_step(p_, scheme_.theta, s, dt, o);
    case Family::ARKIMEX:
      o.extrapolate_guess = opts.extrapolate_guess && scheme_.extrapolate_guess;
      return ark_imex_step(p_, std::get<IMEXTableau>(scheme_.tableau), s, dt, scheme_.fully_implicit, o);
    case Family::RosW: {
      auto out = rosw_step(p_, std::get<RosTableau>(scheme_.tableau), s, dt, scheme_.reuse_jacobian, &ros_cache_, o);
      if (!out.ok) invalidate_jacobian();
      return out;
    }
    case Family::BDF:
      return bdf_dispatch(s, dt, o);
  }
  throw Error("unreachable scheme family");
}

StepOutcome Stepper::bdf_dispatch(const StepperState& s, double dt, const StepOptions& opts) const {
  const int target = scheme_.bdf_order;
  const int hist = std::max<int>(1, static_cast<int>(s.bdf_history.size()));
  if (fixed_step_) {
    if (hist < target) return bdf_startup(s, dt, opts);
    return bdf_step(p_, target, s, dt, opts);
  }
  return bdf_step(p_, std::min(target, std::max(1, hist - 1)), s, dt, opts);
}

// Fixed-step startup: integrate one macro step with uniform micro-steps and a ramped order,
// starting from the single point (t, u) so the macro history stays uniformly spaced.
StepOutcome Stepper::bdf_startup(const StepperState& s, double dt, const StepOptions& opts) const {
  const int target = scheme_.bdf_order;
  const double want = 4.0 * std::pow(std::abs(dt), -0.5 * (target - 1));
  const int m = static_cast<int>(std::clamp(std::ceil(want), 1.0, 4096.0));
  const double h = dt / m;
  StepperState local;
  local.t = s.t;
  local.u = s.u;
  local.udot = s.udot;
  local.bdf_history.emplace_front(s.t, s.u);
  StepOutcome total;
  total.order_used = target;
  for (int i = 0; i < m; ++i) {
    const int k = std::min(target, static_cast<int>(local.bdf_history.size()));
    // The last micro-step lands exactly on t + dt.
    const double hi = i + 1 == m ? (s.t + dt) - local.t : h;
    StepOutcome o = bdf_step(p_, k, local, hi, opts);
    total.newton_iters += o.newton_iters;
    total.linear_iters += o.linear_iters;
    total.rhs_evals += o.rhs_evals;
    if (!o.ok) {
      o.newton_iters = total.newton_iters;
      o.linear_iters = total.linear_iters;
      o.rhs_evals = total.rhs_evals;
      return o;
    }
    local.t = i + 1 == m ? s.t + dt : local.t + hi;
    local.u = o.u_new;
    local.udot = o.udot_new;
    local.bdf_history.emplace_front(local.t, local.u);
    if (local.bdf_history.size() > 7) local.bdf_history.pop_back();
    total.u_new = o.u_new;
    total.udot_new = o.udot_new;
  }
  StageData& sd = total.stage_data;
  sd.t = s.t;
  sd.dt = dt;
  sd.u0 = s.u;
  sd.u1 = total.u_new;
  sd.udot0 = s.udot;
  sd.udot1 = total.udot_new;
  return total;
}

void Stepper::accept(StepperState& s, const StepOutcome& out) const {
  const StageData& sd = out.stage_data;
  s.t = sd.t + sd.dt;
  s.u = out.u_new;
  s.udot = out.udot_new;
  s.dt = sd.dt;
  ++s.step_index;
  if (scheme_.family == Family::BDF) {
    s.bdf_history.emplace_front(s.t, s.u);
    while (s.bdf_history.size() > 7) s.bdf_history.pop_back();
  }
  if (scheme_.family == Family::ARKIMEX && scheme_.extrapolate_guess)
    s.previous = sd;
  else
    s.previous.reset();
}

void Stepper::restart(StepperState& s) {
  s.udot.reset();
  s.previous.reset();
  s.bdf_history.clear();
  if (scheme_.family == Family::BDF) s.bdf_history.emplace_front(s.t, s.u);
  invalidate_jacobian();
}

}  // namespace odekit
