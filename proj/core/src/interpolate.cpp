#include "odekit/steppers.hpp"

namespace odekit {

Vector interpolate(const StageData& sd, double t_query) {
  if (sd.empty()) throw Error("interpolate: no step data");
  if (sd.dt == 0.0) return sd.u0;
  if (t_query == sd.t) return sd.u0;
  if (t_query == sd.t + sd.dt) return sd.u1;
  const double th = (t_query - sd.t) / sd.dt;
  if (th == 0.0) return sd.u0;
  if (th == 1.0) return sd.u1;
  if (sd.bstar && sd.slopes.size() == static_cast<std::size_t>(sd.bstar->rows())) {
    const Vector w = dense_eval(*sd.bstar, th);
    Vector u = sd.u0;
    for (Eigen::Index j = 0; j < w.size(); ++j)
      if (w[j] != 0.0) u += (sd.dt * w[j]) * sd.slopes[static_cast<std::size_t>(j)];
    return u;
  }
  const Vector du = sd.u1 - sd.u0;
  if (sd.udot0 && sd.udot1) {
    // Cubic Hermite.
    const double h10 = th * th * th - 2 * th * th + th;
    const double h01 = -2 * th * th * th + 3 * th * th;
    const double h11 = th * th * th - th * th;
    return sd.u0 + h01 * du + (sd.dt * h10) * *sd.udot0 + (sd.dt * h11) * *sd.udot1;
  }
  if (sd.udot1) {
    // Quadratic matching u0, u1 and the end slope.
    return sd.u0 + th * du + (th * (th - 1.0)) * (sd.dt * *sd.udot1 - du);
  }
  if (sd.udot0) return sd.u0 + th * du + (th * (1.0 - th)) * (sd.dt * *sd.udot0 - du);
  return sd.u0 + th * du;
}

}  // namespace odekit
