#include "problems.hpp"

#include <cmath>
#include <sstream>

namespace odekit::cli {

namespace {

double take(const ParamMap& m, const std::string& k) { return m.at(k); }

ProblemInstance kinetics(const ParamMap& prm) {
  const double k = take(prm, "k");
  ProblemInstance pi;
  FormCallbacks cb;
  cb.h = [k](double, const Vector& u) {
    const double r = k * u[0] * u[1];
    Vector f(3);
    f << -r, -r, r;
    return f;
  };
  cb.h_jacobian = [k](double, const Vector& u) {
    Matrix J(3, 3);
    J << -k * u[1], -k * u[0], 0.0,
         -k * u[1], -k * u[0], 0.0,
          k * u[1],  k * u[0], 0.0;
    return J;
  };
  cb.param_jacobian = [](double, const Vector& u) {
    Matrix P(3, 1);
    const double r = u[0] * u[1];
    P << -r, -r, r;
    return P;
  };
  cb.autonomous = true;
  pi.problem = make_problem(FormKind::StiffODE, 3, cb, std::nullopt, 1);
  pi.u0 = Vector(3);
  pi.u0 << take(prm, "u0"), take(prm, "u1"), take(prm, "u2");
  const Vector ui = pi.u0;
  pi.exact = [ui, k](double t) {
    const double d0 = ui[0] - ui[1];
    const double q = d0 == 0.0 ? k * t : (1.0 - std::exp(-k * t * d0)) / d0;
    Vector u(3);
    u[0] = ui[0] / (1.0 + ui[1] * q);
    u[1] = u[0] - d0;
    u[2] = ui[1] + ui[2] - u[1];
    return u;
  };
  pi.param_names = {"k"};
  pi.defaults.dt0 = 0.001;
  pi.defaults.max_time = 20.0;
  pi.defaults.max_steps = 1000;
  pi.tolerances = ToleranceSpec::scalar(1e-6, 1e-6);
  pi.default_scheme = "rosw:ra34pw2";
  return pi;
}

ProblemInstance orego(const ParamMap&) {
  ProblemInstance pi;
  FormCallbacks cb;
  cb.h = [](double, const Vector& x) {
    Vector f(3);
    f << 77.27 * (x[1] + x[0] * (1 - 8.375e-6 * x[0] - x[1])),
         1 / 77.27 * (x[2] - (1 + x[0]) * x[1]),
         0.161 * (x[0] - x[2]);
    return f;
  };
  cb.h_jacobian = [](double, const Vector& x) {
    Matrix J(3, 3);
    J << 77.27 * ((1 - 8.375e-6 * x[0] - x[1]) - 8.375e-6 * x[0]), 77.27 * (1 - x[0]), 0.0,
         -1 / 77.27 * x[1], -1 / 77.27 * (1 + x[0]), 1 / 77.27,
         0.161, 0.0, -0.161;
    return J;
  };
  cb.autonomous = true;
  pi.problem = make_problem(FormKind::StiffODE, 3, cb);
  pi.u0 = Vector(3);
  pi.u0 << 1.0, 2.0, 3.0;
  pi.defaults.dt0 = 0.1;
  pi.defaults.max_time = 360.0;
  pi.defaults.max_steps = 2000;
  pi.defaults.final_time_policy = FinalTimePolicy::Interpolate;
  pi.defaults.max_nonlinear_failures = -1;
  Vector vatol(3);
  vatol << 1e-2, 1e-1, 1e-4;
  pi.tolerances = ToleranceSpec::vector(vatol, 1e-3);
  pi.default_scheme = "rosw:ra34pw2";
  return pi;
}

ProblemInstance grayscott(const ParamMap& prm) {
  const double nd = take(prm, "N");
  if (!(nd >= 3 && nd <= 256 && nd == std::floor(nd))) throw ConfigError("grayscott: N must be an integer in [3, 256]");
  const int N = static_cast<int>(nd);
  const double D1 = take(prm, "D1"), D2 = take(prm, "D2");
  const double gamma = take(prm, "gamma"), kappa = take(prm, "kappa");
  const double L = take(prm, "L");
  const double hx = L / N;
  const double sx = 1.0 / (hx * hx);
  const auto n = static_cast<std::size_t>(2 * N * N);
  auto idx = [N](int i, int j, int c) {
    const int ii = (i + N) % N, jj = (j + N) % N;
    return static_cast<Eigen::Index>(2 * (jj * N + ii) + c);
  };
  ProblemInstance pi;
  FormCallbacks cb;
  cb.g = [=](double, const Vector& x) {
    Vector f(static_cast<Eigen::Index>(n));
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        const double uc = x[idx(i, j, 0)], vc = x[idx(i, j, 1)];
        const double uxx = (-2.0 * uc + x[idx(i - 1, j, 0)] + x[idx(i + 1, j, 0)]) * sx;
        const double uyy = (-2.0 * uc + x[idx(i, j - 1, 0)] + x[idx(i, j + 1, 0)]) * sx;
        const double vxx = (-2.0 * vc + x[idx(i - 1, j, 1)] + x[idx(i + 1, j, 1)]) * sx;
        const double vyy = (-2.0 * vc + x[idx(i, j - 1, 1)] + x[idx(i, j + 1, 1)]) * sx;
        f[idx(i, j, 0)] = D1 * (uxx + uyy) - uc * vc * vc + gamma * (1.0 - uc);
        f[idx(i, j, 1)] = D2 * (vxx + vyy) + uc * vc * vc - (gamma + kappa) * vc;
      }
    return f;
  };
  cb.g_jacobian = [=](double, const Vector& x) {
    Matrix J = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        const double uc = x[idx(i, j, 0)], vc = x[idx(i, j, 1)];
        const auto ru = idx(i, j, 0), rv = idx(i, j, 1);
        for (auto [di, dj] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
          J(ru, idx(i + di, j + dj, 0)) += D1 * sx;
          J(rv, idx(i + di, j + dj, 1)) += D2 * sx;
        }
        J(ru, ru) += -4.0 * D1 * sx - vc * vc - gamma;
        J(ru, rv) += -2.0 * uc * vc;
        J(rv, ru) += vc * vc;
        J(rv, rv) += -4.0 * D2 * sx + 2.0 * uc * vc - gamma - kappa;
      }
    return J;
  };
  cb.autonomous = true;
  pi.problem = make_problem(FormKind::NonstiffODE, n, cb);
  pi.u0 = Vector(static_cast<Eigen::Index>(n));
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const double x = i * hx, y = j * hx;
      const bool seed = std::abs(x - 0.5 * L) <= 0.25 && std::abs(y - 0.5 * L) <= 0.25;
      pi.u0[idx(i, j, 0)] = seed ? 0.5 : 1.0;
      pi.u0[idx(i, j, 1)] = seed ? 0.25 : 0.0;
    }
  pi.defaults.dt0 = 1.0;
  pi.defaults.max_time = 50.0;
  pi.tolerances = ToleranceSpec::scalar(1e-4, 1e-4);
  pi.default_scheme = "arkimex:ark3:fully-implicit";
  return pi;
}

ProblemInstance bouncing_ball(const ParamMap& prm) {
  const double g = take(prm, "g");
  const double e = take(prm, "restitution");
  ProblemInstance pi;
  FormCallbacks cb;
  cb.g = [g](double, const Vector& u) {
    Vector f(2);
    f << u[1], -g;
    return f;
  };
  cb.g_jacobian = [](double, const Vector&) {
    Matrix J(2, 2);
    J << 0.0, 1.0, 0.0, 0.0;
    return J;
  };
  cb.autonomous = true;
  pi.problem = make_problem(FormKind::NonstiffODE, 2, cb);
  pi.u0 = Vector(2);
  pi.u0 << take(prm, "u0"), take(prm, "v0");
  EventSpec ev;
  ev.nevents = 1;
  ev.h = [](double, const Vector& u) { return Vector::Constant(1, u[0]); };
  ev.direction = {-1};
  ev.terminate = {false};
  ev.tol = Vector::Constant(1, take(prm, "event_tol"));
  ev.post_event = [e](const std::vector<int>&, double, Vector& u, bool) {
    u[1] = -e * u[1];
    return true;
  };
  pi.events = std::move(ev);
  pi.defaults.dt0 = 0.01;
  pi.defaults.max_time = 15.0;
  pi.defaults.max_steps = 100000;
  pi.tolerances = ToleranceSpec::scalar(1e-8, 1e-8);
  pi.default_scheme = "rk:rk4";
  return pi;
}

ProblemInstance linear_test(const ParamMap& prm) {
  const double lam = take(prm, "lambda");
  const double stiff = take(prm, "stiff");
  ProblemInstance pi;
  FormCallbacks cb;
  cb.g = [lam](double, const Vector& u) -> Vector { return lam * u; };
  cb.g_jacobian = [lam](double, const Vector&) { return Matrix::Constant(1, 1, lam); };
  cb.param_jacobian = [](double, const Vector& u) { return Matrix::Constant(1, 1, u[0]); };
  cb.autonomous = true;
  if (stiff != 0.0) {
    cb.h = [stiff](double, const Vector& u) -> Vector { return stiff * u; };
    cb.h_jacobian = [stiff](double, const Vector&) { return Matrix::Constant(1, 1, stiff); };
    pi.problem = make_problem(FormKind::SplitODE, 1, cb, std::nullopt, 1);
  } else {
    pi.problem = make_problem(FormKind::NonstiffODE, 1, cb, std::nullopt, 1);
  }
  const double u0 = take(prm, "u0");
  pi.u0 = Vector::Constant(1, u0);
  const double rate = lam + stiff;
  pi.exact = [u0, rate](double t) { return Vector::Constant(1, u0 * std::exp(rate * t)); };
  pi.param_names = {"lambda"};
  pi.defaults.dt0 = 0.1;
  pi.defaults.max_time = 1.0;
  pi.tolerances = ToleranceSpec::scalar(1e-8, 1e-8);
  pi.default_scheme = "rk:rk4";
  return pi;
}

}  // namespace

const std::vector<LibraryEntry>& problem_library() {
  static const std::vector<LibraryEntry> lib = {
      {"bouncing-ball", "u' = v, v' = -g with an impact event at u = 0 and v <- -e v",
       {{"g", 9.8}, {"restitution", 0.9}, {"u0", 10.0}, {"v0", 0.0}, {"event_tol", 1e-12}}},
      {"grayscott", "Gray-Scott reaction-diffusion on an N x N periodic grid",
       {{"N", 32}, {"D1", 8.0e-5}, {"D2", 4.0e-5}, {"gamma", 0.024}, {"kappa", 0.06}, {"L", 2.5}}},
      {"kinetics", "u0' = -k u0 u1, u1' = -k u0 u1, u2' = k u0 u1 with a closed-form solution",
       {{"k", 0.9}, {"u0", 1.0}, {"u1", 0.7}, {"u2", 0.0}}},
      {"linear-test", "u' = lambda u + stiff u; split into explicit and implicit parts when stiff != 0",
       {{"lambda", -1.0}, {"stiff", 0.0}, {"u0", 1.0}}},
      {"orego", "the Oregonator, a stiff three-variable chemical oscillator", {}},
  };
  return lib;
}

ProblemInstance build_problem(const std::string& name, const ParamMap& overrides) {
  const LibraryEntry* entry = nullptr;
  for (const auto& e : problem_library())
    if (e.name == name) entry = &e;
  if (!entry) {
    std::string msg = "unknown problem '" + name + "'; available:";
    for (const auto& e : problem_library()) msg += " " + e.name;
    throw ConfigError(msg);
  }
  ParamMap prm = entry->defaults;
  for (const auto& [k, v] : overrides) {
    if (!prm.count(k)) {
      std::string msg = "problem " + name + " has no parameter '" + k + "'";
      if (!prm.empty()) {
        msg += "; parameters:";
        for (const auto& [pk, pv] : prm) msg += " " + pk;
      }
      throw ConfigError(msg);
    }
    prm[k] = v;
  }
  ProblemInstance pi;
  if (name == "kinetics") pi = kinetics(prm);
  else if (name == "orego") pi = orego(prm);
  else if (name == "grayscott") pi = grayscott(prm);
  else if (name == "bouncing-ball") pi = bouncing_ball(prm);
  else pi = linear_test(prm);
  pi.name = name;
  pi.params = prm;
  return pi;
}

ParamMap parse_params(const std::string& text) {
  ParamMap out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("parameter '" + item + "' is not of the form name=value");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      out[key] = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + key + "' has a non-numeric value '" + val + "'");
    }
  }
  return out;
}

Objective make_objective(const std::string& spec, std::size_t dim) {
  if (spec.size() < 2 || spec[0] != 'u') throw ConfigError("objective must look like u<i>, got '" + spec + "'");
  std::size_t i = 0;
  try {
    std::size_t used = 0;
    i = static_cast<std::size_t>(std::stoul(spec.substr(1), &used));
    if (used != spec.size() - 1) throw std::invalid_argument(spec);
  } catch (const std::exception&) {
    throw ConfigError("objective must look like u<i>, got '" + spec + "'");
  }
  if (i >= dim) throw ConfigError("objective component " + std::to_string(i) + " out of range");
  const auto k = static_cast<Eigen::Index>(i);
  const auto n = static_cast<Eigen::Index>(dim);
  return Objective{spec, [k](const Vector& u) { return u[k]; },
                   [k, n](const Vector&) {
                     Vector g = Vector::Zero(n);
                     g[k] = 1.0;
                     return g;
                   }};
}

}  // namespace odekit::cli
