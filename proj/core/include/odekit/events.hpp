#pragma once

#include "odekit/types.hpp"

#include <functional>
#include <vector>

namespace odekit {

struct EventSpec {
  std::size_t nevents = 0;
  std::function<Vector(double t, const Vector& u)> h;
  std::vector<int> direction;   // -1 falling, +1 rising, 0 both
  std::vector<bool> terminate;
  Vector tol;                   // size 1 broadcasts
  // May modify u. Returning false aborts the solve.
  std::function<bool(const std::vector<int>& ids, double t, Vector& u, bool forward)> post_event;

  double tol_at(std::size_t i) const { return tol.size() == 1 ? tol[0] : tol[static_cast<Eigen::Index>(i)]; }
  void validate(std::size_t dim) const;
};

struct EventRecord {
  int event_id = 0;
  double t_star = 0.0;
  Vector u_star;
  double h_value = 0.0;
  int iterations = 0;
  long step_index = 0;
};

/** @brief An event is disarmed after firing until |h| leaves its tolerance band. */
struct EventState {
  std::vector<bool> armed;
  void reset(std::size_t n) { armed.assign(n, true); }
  void update(const EventSpec& spec, const Vector& h);
};

std::vector<int> scan_events(const EventSpec& spec, double t_n, const Vector& h_n, double t_next,
                             const Vector& h_next, const EventState* state = nullptr);

EventRecord locate_event(const EventSpec& spec, const std::function<Vector(double)>& interpolant, double t_n,
                         double t_next, int event_id);

struct PostEventPlan {
  Vector u;
  bool terminate = false;
  double resync_dt = 0.0;  // step from t* landing on the original t_{n+1}
};

/** @brief Applies the handler; throws Error if it reports failure. */
PostEventPlan handle_post_event(const EventSpec& spec, const std::vector<EventRecord>& records, const Vector& u_star,
                                double t_next);

}  // namespace odekit
