#pragma once

#include <odekit/odekit.hpp>

#include <cmath>
#include <cstring>

namespace odekit::testing {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/** u' = lambda u, nonstiff form. */
inline Problem scalar_linear(double lambda) {
  FormCallbacks cb;
  cb.g = [lambda](double, const Vector& u) { return Vector(lambda * u); };
  cb.g_jacobian = [lambda](double, const Vector&) { return Matrix::Constant(1, 1, lambda); };
  cb.param_jacobian = [](double, const Vector& u) { return Matrix::Constant(1, 1, u[0]); };
  cb.autonomous = true;
  return make_problem(FormKind::NonstiffODE, 1, cb, std::nullopt, 1);
}

/** u' = lambda u, stiff form (F = u' - lambda u). */
inline Problem scalar_linear_stiff(double lambda) {
  FormCallbacks cb;
  cb.h = [lambda](double, const Vector& u) { return Vector(lambda * u); };
  cb.h_jacobian = [lambda](double, const Vector&) { return Matrix::Constant(1, 1, lambda); };
  cb.param_jacobian = [](double, const Vector& u) { return Matrix::Constant(1, 1, u[0]); };
  cb.autonomous = true;
  return make_problem(FormKind::StiffODE, 1, cb, std::nullopt, 1);
}

/** u' = stiff u + nonstiff u with the stiff term implicit. */
inline Problem scalar_split(double stiff, double nonstiff) {
  FormCallbacks cb;
  cb.h = [stiff](double, const Vector& u) { return Vector(stiff * u); };
  cb.h_jacobian = [stiff](double, const Vector&) { return Matrix::Constant(1, 1, stiff); };
  cb.g = [nonstiff](double, const Vector& u) { return Vector(nonstiff * u); };
  cb.g_jacobian = [nonstiff](double, const Vector&) { return Matrix::Constant(1, 1, nonstiff); };
  cb.autonomous = true;
  return make_problem(FormKind::SplitODE, 1, cb);
}

inline StepperState state_at(double t, const Vector& u) {
  StepperState s;
  s.t = t;
  s.u = u;
  return s;
}

inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  return true;
}

}  // namespace odekit::testing
