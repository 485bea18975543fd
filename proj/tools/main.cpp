#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace odekit;
using namespace odekit::cli;

namespace {

struct RunFlags {
  RunConfig cfg;
  std::optional<std::string> atol_text;
  std::string seed_params;
};

void add_run_flags(CLI::App* app, RunFlags& f, bool with_monitor = true) {
  app->add_option("--problem", f.cfg.problem, "Problem name (see 'problems')")->required();
  app->add_option("--scheme", f.cfg.scheme, "family:name, e.g. rosw:ra34pw2, rk:rk4, theta:0.5, bdf:2");
  app->add_option("--dt", f.cfg.dt, "Initial step size");
  app->add_option("--max-time", f.cfg.max_time, "Final time");
  app->add_option("--max-steps", f.cfg.max_steps, "Step budget");
  app->add_option("--rtol", f.cfg.rtol, "Relative tolerance");
  app->add_option("--atol", f.atol_text, "Absolute tolerance, scalar or comma list");
  app->add_option("--adapt", f.cfg.adapt, "none, basic or dsp")
      ->check(CLI::IsMember({"none", "basic", "dsp"}));
  app->add_option("--final-time", f.cfg.final_time, "stepover, interpolate or matchstep")
      ->check(CLI::IsMember({"stepover", "interpolate", "matchstep"}));
  app->add_option("--seed-params", f.seed_params, "Problem parameters k=v,...");
  if (with_monitor) {
    app->add_option("--monitor", f.cfg.monitor_path, "Monitor output, .csv or .jsonl");
    app->add_flag("--snapshot", f.cfg.snapshot, "Include the state in monitor rows");
  }
}

RunConfig finish(RunFlags& f) {
  if (f.atol_text) f.cfg.atol = parse_list(*f.atol_text);
  if (!f.seed_params.empty()) f.cfg.params = parse_params(f.seed_params);
  return f.cfg;
}

void write_to(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path);
  os << text;
}

int exit_for(Termination t) { return t == Termination::Diverged ? 2 : 0; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"odekit: time integration of ODEs and DAEs"};
  app.require_subcommand(1);

  RunFlags solve_flags;
  std::string solve_out;
  bool solve_view = false;
  auto* solve_cmd = app.add_subcommand("solve", "Run one integration and print the result JSON");
  add_run_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--output", solve_out, "Result JSON path (default stdout)");
  solve_cmd->add_flag("--view", solve_view, "Print a run summary to stderr");

  RunFlags ev_flags;
  std::string ev_traj, ev_out, ev_result;
  auto* ev_cmd = app.add_subcommand("events", "Run with event detection; emit trajectory and event CSVs");
  add_run_flags(ev_cmd, ev_flags);
  ev_cmd->add_option("--trajectory", ev_traj, "Trajectory CSV path");
  ev_cmd->add_option("--events-out", ev_out, "Events CSV path (default stdout)");
  ev_cmd->add_option("--output", ev_result, "Result JSON path");

  SweepConfig sweep;
  std::string sweep_schemes, sweep_tols, sweep_params, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Work-precision sweep over a tolerance ladder");
  sweep_cmd->add_option("--problem", sweep.problem)->required();
  sweep_cmd->add_option("--schemes,--scheme", sweep_schemes, "Comma-separated scheme list")->required();
  sweep_cmd->add_option("--tols", sweep_tols, "Comma-separated tolerances")->required();
  sweep_cmd->add_option("--reference-scheme", sweep.reference_scheme, "Scheme for the tight reference run (default: the first scheme)");
  sweep_cmd->add_option("--max-steps", sweep.max_steps);
  sweep_cmd->add_option("--seed-params", sweep_params);
  sweep_cmd->add_option("--output", sweep_out, "Sweep CSV path (default stdout)");

  OrderConfig order;
  std::string order_dts, order_params;
  auto* order_cmd = app.add_subcommand("order", "Fixed-step convergence study");
  order_cmd->add_option("--problem", order.problem)->required();
  order_cmd->add_option("--scheme", order.scheme, "family:name with a fixed-step kernel")->required();
  order_cmd->add_option("--dts", order_dts, "Comma-separated step sizes")->required();
  order_cmd->add_option("--max-time", order.max_time);
  order_cmd->add_option("--seed-params", order_params);

  AdjointConfig adj;
  std::string adj_params;
  std::optional<double> adj_dt;
  auto* adj_cmd = app.add_subcommand("adjoint-check", "Compare adjoint, forward and finite-difference gradients");
  adj_cmd->add_option("--problem", adj.problem)->required();
  adj_cmd->add_option("--scheme", adj.scheme, "rk:<name> or theta:<value>")->required();
  adj_cmd->add_option("--objective", adj.objective, "u<i>: component i at the final time");
  adj_cmd->add_option("--dt", adj_dt);
  adj_cmd->add_option("--max-time", adj.max_time);
  adj_cmd->add_option("--checkpoints", adj.checkpoints, "Binomial checkpoint budget (0 stores every step)");
  adj_cmd->add_option("--seed-params", adj_params);

  std::string tableau_name;
  auto* tab_cmd = app.add_subcommand("tableau", "Dump a registered tableau as JSON");
  tab_cmd->add_option("name", tableau_name)->required();

  auto* list_cmd = app.add_subcommand("problems", "List the problem library");
  auto* schemes_cmd = app.add_subcommand("schemes", "List registered tableau names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      const RunConfig cfg = finish(solve_flags);
      const SolveRun run = cmd_solve(cfg);
      write_to(solve_out, result_json(run.prepared, run.result));
      if (solve_view) {
        const Prepared& p = run.prepared;
        std::cerr << view_summary(run.result,
                                  SummaryConfig{p.instance.name, p.scheme, p.options, p.tolerances, p.adapt});
      }
      if (run.result.termination == Termination::Diverged) std::cerr << "diverged: " << run.result.message << "\n";
      return exit_for(run.result.termination);
    }
    if (*ev_cmd) {
      const RunConfig cfg = finish(ev_flags);
      if (!build_problem(cfg.problem, cfg.params).events)
        std::cerr << "note: problem " << cfg.problem << " has no events; running a plain solve\n";
      const EventsRun er = cmd_events(cfg);
      if (!ev_traj.empty()) write_to(ev_traj, er.trajectory_csv);
      if (!ev_result.empty()) write_to(ev_result, result_json(er.run.prepared, er.run.result));
      write_to(ev_out, er.events_csv);
      return exit_for(er.run.result.termination);
    }
    if (*sweep_cmd) {
      std::stringstream ss(sweep_schemes);
      for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) sweep.schemes.push_back(s);
      sweep.tolerances = parse_list(sweep_tols);
      if (!sweep_params.empty()) sweep.params = parse_params(sweep_params);
      write_to(sweep_out, sweep_csv(cmd_sweep(sweep)));
      return 0;
    }
    if (*order_cmd) {
      order.dts = parse_list(order_dts);
      if (!order_params.empty()) order.params = parse_params(order_params);
      std::cout << order_text(cmd_order(order));
      return 0;
    }
    if (*adj_cmd) {
      if (adj_dt) adj.dt = *adj_dt;
      if (!adj_params.empty()) adj.params = parse_params(adj_params);
      const AdjointReport rep = cmd_adjoint_check(adj);
      std::cout << adjoint_text(rep);
      const bool ok = rep.forward_vs_adjoint <= 1e-8 && rep.adjoint_vs_fd <= 1e-4;
      if (!ok) std::cerr << "gradient check failed\n";
      return ok ? 0 : 3;
    }
    if (*tab_cmd) {
      std::cout << tableau_json(tableau_name);
      return 0;
    }
    if (*list_cmd) {
      std::cout << problems_text();
      return 0;
    }
    if (*schemes_cmd) {
      for (const auto& n : registry_names()) std::cout << n << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
