#include "odekit/events.hpp"

#include <cmath>
#include <limits>

namespace odekit {

void EventSpec::validate(std::size_t dim) const {
  (void)dim;
  if (nevents == 0) return;
  if (!h) throw ConfigError("event spec: h is required when nevents > 0");
  if (direction.size() != nevents) throw ConfigError("event spec: direction needs one entry per event");
  for (int d : direction)
    if (d < -1 || d > 1) throw ConfigError("event spec: direction entries must be -1, 0 or +1");
  if (!terminate.empty() && terminate.size() != nevents)
    throw ConfigError("event spec: terminate needs one entry per event");
  if (tol.size() != 1 && static_cast<std::size_t>(tol.size()) != nevents)
    throw ConfigError("event spec: tol must be a scalar or have one entry per event");
  for (Eigen::Index i = 0; i < tol.size(); ++i)
    if (!(tol[i] > 0.0) || !std::isfinite(tol[i])) throw ConfigError("event spec: tolerances must be positive");
}

void EventState::update(const EventSpec& spec, const Vector& h) {
  if (armed.size() != spec.nevents) reset(spec.nevents);
  for (std::size_t i = 0; i < spec.nevents; ++i)
    if (!armed[i] && std::abs(h[static_cast<Eigen::Index>(i)]) > spec.tol_at(i)) armed[i] = true;
}

std::vector<int> scan_events(const EventSpec& spec, double t_n, const Vector& h_n, double t_next,
                             const Vector& h_next, const EventState* state) {
  (void)t_n;
  (void)t_next;
  std::vector<int> out;
  for (std::size_t i = 0; i < spec.nevents; ++i) {
    if (state && i < state->armed.size() && !state->armed[i]) continue;
    const auto k = static_cast<Eigen::Index>(i);
    const double a = h_n[k], b = h_next[k];
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    if (a == 0.0) continue;
    const bool crossed = (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0);
    if (!crossed) continue;
    const int dir = b > a ? 1 : -1;
    const int want = spec.direction.empty() ? 0 : spec.direction[i];
    if (want != 0 && want != dir) continue;
    out.push_back(static_cast<int>(i));
  }
  return out;
}

EventRecord locate_event(const EventSpec& spec, const std::function<Vector(double)>& interpolant, double t_n,
                         double t_next, int event_id) {
  const auto k = static_cast<Eigen::Index>(event_id);
  const double tol = spec.tol_at(static_cast<std::size_t>(event_id));
  auto g = [&](double t) { return spec.h(t, interpolant(t))[k]; };

  double a = t_n, b = t_next;
  double fa = g(a), fb = g(b);
  double ga = fa, gb = fb;  // unscaled values, for reporting
  EventRecord rec;
  rec.event_id = event_id;
  if (fb == 0.0) {
    rec.t_star = b;
    rec.u_star = interpolant(b);
    rec.h_value = 0.0;
    return rec;
  }
  const double eps = std::numeric_limits<double>::epsilon();
  double t = b, ft = fb;
  int it = 0;
  for (; it < 50; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = g(c);
    t = c;
    ft = fc;
    if (std::abs(fc) <= tol) {
      ++it;
      break;
    }
    if ((fc > 0.0) == (fb > 0.0)) {
      double m = 1.0 - fc / gb;
      if (m <= 0.0) m = 0.5;
      fa *= m;
      b = c;
      fb = fc;
      gb = fc;
    } else {
      double m = 1.0 - fc / ga;
      if (m <= 0.0) m = 0.5;
      fb *= m;
      a = c;
      fa = fc;
      ga = fc;
    }
    if (b - a <= 4.0 * eps * std::max(std::abs(a), std::abs(b))) {
      ++it;
      // Report the bracket end closest to the root.
      if (std::abs(ga) < std::abs(gb)) {
        t = a;
        ft = ga;
      } else {
        t = b;
        ft = gb;
      }
      break;
    }
  }
  rec.t_star = t;
  rec.u_star = interpolant(t);
  rec.h_value = ft;
  rec.iterations = it;
  return rec;
}

PostEventPlan handle_post_event(const EventSpec& spec, const std::vector<EventRecord>& records, const Vector& u_star,
                                double t_next) {
  if (records.empty()) throw Error("handle_post_event: no event records");
  PostEventPlan plan;
  plan.u = u_star;
  const double ts = records.front().t_star;
  std::vector<int> ids;
  for (const auto& r : records) {
    ids.push_back(r.event_id);
    const auto i = static_cast<std::size_t>(r.event_id);
    if (!spec.terminate.empty() && spec.terminate[i]) plan.terminate = true;
  }
  if (spec.post_event && !spec.post_event(ids, ts, plan.u, true))
    throw Error("post-event handler reported failure at t=" + std::to_string(ts));
  plan.resync_dt = t_next - ts;
  return plan;
}

}  // namespace odekit
