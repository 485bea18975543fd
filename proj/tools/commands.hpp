#pragma once

#include "problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace odekit::cli {

/** @brief Flags shared by solve, events and the building blocks of sweep. */
struct RunConfig {
  std::string problem;
  ParamMap params;
  std::string scheme;  // empty: the problem's default
  std::optional<double> dt;
  std::optional<double> max_time;
  std::optional<long> max_steps;
  std::optional<double> rtol;
  std::optional<std::vector<double>> atol;
  std::optional<std::string> adapt;  // unset: basic when the scheme has an estimate, else none
  std::optional<std::string> final_time;
  std::string monitor_path;
  bool snapshot = false;
};

struct Prepared {
  ProblemInstance instance;
  Scheme scheme;
  SolveOptions options;
  ToleranceSpec tolerances;
  AdaptConfig adapt;
};

Prepared prepare(const RunConfig& cfg);

std::vector<double> parse_list(const std::string& text);

/** @brief Result JSON with final_t, final_u, counters and termination. */
std::string result_json(const Prepared& prep, const SolveResult& res);

struct SolveRun {
  Prepared prepared;
  SolveResult result;
  std::vector<MonitorRecord> records;
};

/** @brief Runs one solve; writes the monitor file when cfg.monitor_path is set. */
SolveRun cmd_solve(const RunConfig& cfg);

struct SweepRow {
  std::string scheme;
  double tolerance = 0.0;
  double error = 0.0;
  long steps = 0;
  long rhs_evals = 0;
  long newton_iters = 0;
  double wall_time = 0.0;
};

struct SweepConfig {
  std::string problem;
  ParamMap params;
  std::vector<std::string> schemes;
  std::vector<double> tolerances;
  std::string reference_scheme;  // empty: the first scheme
  double reference_factor = 100.0;
  long max_steps = 10000000;
};

std::vector<SweepRow> cmd_sweep(const SweepConfig& cfg);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/** @brief max_i |u_i - ref_i| / max(|ref_i|, 1e-12). */
double relative_error(const Vector& u, const Vector& ref);

struct OrderRow {
  double dt = 0.0;
  double error = 0.0;
  std::optional<double> observed;  // against the previous, coarser dt
};

struct OrderConfig {
  std::string problem;
  ParamMap params;
  std::string scheme;
  std::vector<double> dts;
  std::optional<double> max_time;
};

struct OrderReport {
  std::string scheme;
  int declared = 0;
  std::vector<OrderRow> rows;
  bool erratic = false;
};

OrderReport cmd_order(const OrderConfig& cfg);
std::string order_text(const OrderReport& r);

struct AdjointConfig {
  std::string problem;
  ParamMap params;
  std::string scheme;
  std::string objective = "u0";
  double dt = 0.01;
  std::optional<double> max_time;
  std::size_t checkpoints = 0;  // 0: store every step
  double fd_step = 1e-6;
};

struct AdjointReport {
  Vector lambda0, mu0;
  Vector forward_u0, forward_p;
  Vector fd_u0, fd_p;
  double adjoint_vs_fd = 0.0;
  double forward_vs_adjoint = 0.0;
  long steps = 0;
  long recomputations = 0;
  std::size_t max_retained = 0;
};

AdjointReport cmd_adjoint_check(const AdjointConfig& cfg);
std::string adjoint_text(const AdjointReport& r);

/** @brief max |a - b| / max |b|, or max |a - b| when b vanishes. */
double relative_difference(const Vector& a, const Vector& b);

struct EventsRun {
  SolveRun run;
  std::string trajectory_csv;
  std::string events_csv;
};

EventsRun cmd_events(const RunConfig& cfg);

std::string tableau_json(const std::string& name);
std::string problems_text();

}  // namespace odekit::cli
