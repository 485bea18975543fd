#pragma once

#include "odekit/newton.hpp"
#include "odekit/problem.hpp"
#include "odekit/tableaux.hpp"
#include "odekit/types.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace odekit {

struct Counters {
  long nonlinear_iters = 0;
  long linear_iters = 0;
  long rejected_steps = 0;
  long nonlinear_failures = 0;
  long rhs_evals = 0;

  bool operator==(const Counters&) const = default;
};

/** @brief What a step keeps for dense output, trajectories and adjoints. */
struct StageData {
  double t = 0.0;
  double dt = 0.0;
  Vector u0;
  Vector u1;
  std::optional<Vector> udot0;
  std::optional<Vector> udot1;
  std::vector<Vector> stages;  // stage states (ERK)
  std::vector<Vector> slopes;  // slopes paired with bstar
  std::shared_ptr<const Matrix> bstar;

  bool empty() const { return u0.size() == 0; }
};

struct StepperState {
  double t = 0.0;
  Vector u;
  std::optional<Vector> udot;
  double dt = 0.0;
  long step_index = 0;
  std::deque<std::pair<double, Vector>> bdf_history;  // newest first, front is (t, u)
  std::optional<StageData> previous;
  Counters counters;
};

struct StepOptions {
  NewtonOptions newton;
  bool extrapolate_guess = true;
  bool need_dense = false;  // compute end-point derivatives for Hermite output
};

struct StepOutcome {
  bool ok = true;
  std::string failure;
  Vector u_new;
  std::optional<Vector> err_estimate;  // u - u_tilde
  std::optional<Vector> udot_new;
  StageData stage_data;
  int order_used = 0;
  int newton_iters = 0;
  int linear_iters = 0;
  long rhs_evals = 0;
  bool nonlinear_failure = false;
};

StepOutcome erk_step(const Problem& p, const ButcherTableau& tab, const StepperState& s, double dt,
                     const StepOptions& opts = {});
StepOutcome theta_step(const Problem& p, double theta, const StepperState& s, double dt,
                       const StepOptions& opts = {});
StepOutcome ark_imex_step(const Problem& p, const IMEXTableau& tab, const StepperState& s, double dt,
                          bool fully_implicit, const StepOptions& opts = {});

/** @brief Jacobian cache for W-methods that reuse a stale Jacobian. */
struct RosJacobianCache {
  std::optional<Matrix> mass;
  std::optional<Matrix> jac;  // F_u - G_u
};

StepOutcome rosw_step(const Problem& p, const RosTableau& tab, const StepperState& s, double dt,
                      bool reuse_jacobian = false, RosJacobianCache* cache = nullptr,
                      const StepOptions& opts = {});

/** @brief One variable-step BDF step of the given order from s.bdf_history. */
StepOutcome bdf_step(const Problem& p, int order, const StepperState& s, double dt, const StepOptions& opts = {});

/** @brief Dense output; t_query outside the step extrapolates. */
Vector interpolate(const StageData& sd, double t_query);

/** @brief Runtime scheme selection, parsed from "family:name". */
struct Scheme {
  Family family = Family::ERK;
  std::string name;
  Tableau tableau;
  double theta = 1.0;
  int bdf_order = 1;
  bool fully_implicit = false;
  bool extrapolate_guess = true;
  bool reuse_jacobian = false;
  NewtonOptions newton;

  int order() const;
  int control_order() const;
  bool has_error_estimate() const;
  std::string label() const;
};

Scheme parse_scheme(const std::string& spec);

/** @brief Stateful driver around the step kernels. */
class Stepper {
 public:
  Stepper(const Problem& p, Scheme scheme, bool fixed_step);

  void initialize(StepperState& s) const;
  StepOutcome step(const StepperState& s, double dt, const StepOptions& opts);
  void accept(StepperState& s, const StepOutcome& out) const;
  /** @brief Restart after a discontinuity. */
  void restart(StepperState& s);
  /** @brief Forces a fresh Jacobian on the next Rosenbrock step. */
  void invalidate_jacobian() { ros_cache_ = {}; }

  const Scheme& scheme() const { return scheme_; }

 private:
  StepOutcome bdf_dispatch(const StepperState& s, double dt, const StepOptions& opts) const;
  StepOutcome bdf_startup(const StepperState& s, double dt, const StepOptions& opts) const;

  const Problem& p_;
  Scheme scheme_;
  bool fixed_step_;
  RosJacobianCache ros_cache_;
};

}  // namespace odekit
