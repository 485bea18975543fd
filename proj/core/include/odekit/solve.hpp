#pragma once

#include "odekit/adapt.hpp"
#include "odekit/events.hpp"
#include "odekit/monitor.hpp"
#include "odekit/problem.hpp"
#include "odekit/steppers.hpp"

#include <functional>
#include <string>
#include <vector>

namespace odekit {

class Trajectory;

enum class FinalTimePolicy { StepOver, Interpolate, MatchStep };
std::string to_string(FinalTimePolicy f);
FinalTimePolicy parse_final_time_policy(const std::string& s);

struct SolveOptions {
  double t0 = 0.0;
  double dt0 = 1e-3;
  long max_steps = 100000;
  double max_time = 1.0;
  FinalTimePolicy final_time_policy = FinalTimePolicy::StepOver;
  long max_nonlinear_failures = -1;  // unlimited

  void validate() const;
};

enum class Termination { ReachedMaxTime, ReachedMaxSteps, EventTerminated, Diverged };
std::string to_string(Termination t);

struct SolveResult {
  double final_t = 0.0;
  Vector final_u;
  long steps_taken = 0;
  long steps_rejected = 0;
  Counters counters;
  Termination termination = Termination::ReachedMaxTime;
  std::vector<EventRecord> events;
  std::string message;
};

/** @brief Data handed to on_accept after every accepted step. */
struct AcceptedStep {
  long step_index = 0;  // index of the new state
  double t_prev = 0.0;
  double t_new = 0.0;
  const Vector* u_prev = nullptr;
  const std::optional<Vector>* udot_prev = nullptr;
  const StepOutcome* outcome = nullptr;
};

struct SolveHooks {
  const EventSpec* events = nullptr;
  std::vector<AttachedMonitor> monitors;
  Trajectory* trajectory = nullptr;
  std::function<void(const AcceptedStep&)> on_accept;
};

void attach_monitor(SolveHooks& hooks, MonitorSink& sink, MonitorOptions options = {});

SolveResult solve(const Problem& p, const Vector& u0, const Scheme& scheme, const SolveOptions& opts,
                  const ToleranceSpec& tol, const AdaptConfig& adapt, SolveHooks hooks = {});

/** @brief Checks a scheme/adapt/problem combination; throws ConfigError. */
void validate_configuration(const Problem& p, const Scheme& scheme, const AdaptConfig& adapt);

struct SummaryConfig {
  std::string problem_name;
  Scheme scheme;
  SolveOptions options;
  ToleranceSpec tolerances;
  AdaptConfig adapt;
};

/** @brief Human-readable report in the spirit of TSView. */
std::string view_summary(const SolveResult& result, const SummaryConfig& config);

}  // namespace odekit
