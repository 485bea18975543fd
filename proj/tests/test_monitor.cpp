#include "support.hpp"

#include <gtest/gtest.h>

#include <problems.hpp>

#include <numeric>
#include <sstream>

using namespace odekit;
using namespace odekit::testing;

namespace {

// Large initial step on a fast decay, so the controller must reject before it settles.
struct RejectingRun {
  Problem p = scalar_linear(-50.0);
  Vector u0 = vec({1.0});
  Scheme sc = parse_scheme("rk:bs3");
  SolveOptions o;
  ToleranceSpec tol = ToleranceSpec::scalar(1e-6, 1e-6);
  RejectingRun() {
    o.dt0 = 1.0;
    o.max_time = 10.0;
    o.max_steps = 10;
  }
  SolveResult run(SolveHooks hooks = {}) const { return solve(p, u0, sc, o, tol, AdaptConfig{}, std::move(hooks)); }
};

MonitorRecord sample(long k, bool accepted, bool snap) {
  MonitorRecord r;
  r.step_index = k;
  r.t = 0.1 * static_cast<double>(k) + 1.0 / 3.0;
  r.dt = 0.1;
  r.accepted = accepted;
  r.werr = accepted ? 0.37 : 4.5;
  r.newton_iters = static_cast<int>(k % 3);
  r.linear_iters = static_cast<int>(k % 5);
  if (k % 4 == 0) r.event_flags = {0, 2};
  if (snap && accepted) r.u_snapshot = vec({1e-300, -2.5, 3.141592653589793});
  return r;
}

}  // namespace

TEST(Monitor, OneRecordPerAttempt) {
  RejectingRun rr;
  CollectingSink sink;
  SolveHooks hooks;
  hooks.monitors.push_back({&sink, {}});
  const SolveResult r = rr.run(hooks);
  EXPECT_EQ(r.termination, Termination::ReachedMaxSteps);
  EXPECT_EQ(r.steps_taken, 10);
  EXPECT_GE(r.steps_rejected, 1);
  ASSERT_EQ(static_cast<long>(sink.records.size()), r.steps_taken + r.steps_rejected);
  long accepted = 0;
  for (const auto& rec : sink.records) {
    accepted += rec.accepted ? 1 : 0;
    if (!rec.accepted) EXPECT_GT(rec.werr, 1.0);
  }
  EXPECT_EQ(accepted, 10);
  EXPECT_FALSE(sink.records.front().accepted);
}

TEST(Monitor, TwoSinksSeeIdenticalStreams) {
  RejectingRun rr;
  CollectingSink a, b;
  SolveHooks hooks;
  hooks.monitors.push_back({&a, {}});
  hooks.monitors.push_back({&b, {}});
  rr.run(hooks);
  ASSERT_FALSE(a.records.empty());
  EXPECT_EQ(a.records, b.records);
}

TEST(Monitor, SnapshotOnlyWhenRequested) {
  RejectingRun rr;
  CollectingSink plain, snap;
  SolveHooks hooks;
  hooks.monitors.push_back({&plain, {}});
  hooks.monitors.push_back({&snap, {1, true}});
  const SolveResult r = rr.run(hooks);
  for (const auto& rec : plain.records) EXPECT_FALSE(rec.u_snapshot.has_value());
  const MonitorRecord* last = nullptr;
  for (const auto& rec : snap.records) {
    EXPECT_EQ(rec.u_snapshot.has_value(), rec.accepted);
    if (rec.accepted) last = &rec;
  }
  ASSERT_NE(last, nullptr);
  EXPECT_TRUE(bitwise_equal(*last->u_snapshot, r.final_u));
}

TEST(Monitor, EveryKThins) {
  RejectingRun rr;
  CollectingSink all, thin;
  SolveHooks hooks;
  hooks.monitors.push_back({&all, {}});
  hooks.monitors.push_back({&thin, {3, false}});
  rr.run(hooks);
  ASSERT_EQ(thin.records.size(), (all.records.size() + 2) / 3);
  for (std::size_t i = 0; i < thin.records.size(); ++i) EXPECT_EQ(thin.records[i], all.records[3 * i]);
}

TEST(Monitor, FailingSinkDoesNotStopSolve) {
  struct Broken : MonitorSink {
    bool write(const MonitorRecord&) override { throw std::runtime_error("disk full"); }
  } broken;
  RejectingRun rr;
  SolveHooks hooks;
  hooks.monitors.push_back({&broken, {}});
  const SolveResult with = rr.run(hooks);
  const SolveResult without = rr.run();
  EXPECT_TRUE(bitwise_equal(with.final_u, without.final_u));
  EXPECT_EQ(with.termination, without.termination);
}

TEST(Monitor, EmptyInputGivesHeaderOnly) {
  EXPECT_EQ(emit({}, MonitorFormat::CSV, 0), csv_header(0) + "\n");
  EXPECT_EQ(emit({}, MonitorFormat::JSONL, 0), "");
  EXPECT_TRUE(parse_csv(emit({}, MonitorFormat::CSV, 0)).empty());
  std::ostringstream os;
  {
    StreamSink s(os, MonitorFormat::CSV, 2);
    s.finish();
  }
  EXPECT_EQ(os.str(), csv_header(2) + "\n");
}

TEST(Monitor, CsvRoundTrip) {
  std::vector<MonitorRecord> recs;
  for (long k = 0; k < 9; ++k) recs.push_back(sample(k, k % 3 != 1, true));
  const auto back = parse_csv(emit(recs, MonitorFormat::CSV, 3));
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(back[i], recs[i]) << i;
}

TEST(Monitor, JsonlRoundTrip) {
  std::vector<MonitorRecord> recs;
  for (long k = 0; k < 9; ++k) recs.push_back(sample(k, k % 3 != 1, k % 2 == 0));
  const auto back = parse_jsonl(emit(recs, MonitorFormat::JSONL, 3));
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(back[i], recs[i]) << i;
}

TEST(Monitor, StreamSinkMatchesEmit) {
  std::vector<MonitorRecord> recs;
  for (long k = 0; k < 5; ++k) recs.push_back(sample(k, true, false));
  for (auto fmt : {MonitorFormat::CSV, MonitorFormat::JSONL}) {
    std::ostringstream os;
    {
      StreamSink s(os, fmt, 0);
      for (const auto& r : recs) EXPECT_TRUE(s.write(r));
    }
    EXPECT_EQ(os.str(), emit(recs, fmt, 0));
  }
}

TEST(Monitor, FormatFromExtension) {
  EXPECT_EQ(monitor_format_for_path("run.csv"), MonitorFormat::CSV);
  EXPECT_EQ(monitor_format_for_path("run.jsonl"), MonitorFormat::JSONL);
}

TEST(Monitor, KineticsStepSizesGrow) {
  const auto pi = cli::build_problem("kinetics");
  CollectingSink sink;
  SolveHooks hooks;
  hooks.monitors.push_back({&sink, {}});
  const SolveResult r = solve(pi.problem, pi.u0, parse_scheme("rosw:ra34pw2"), pi.defaults, pi.tolerances,
                              AdaptConfig{}, hooks);
  std::vector<double> dts;
  for (const auto& rec : sink.records)
    if (rec.accepted) dts.push_back(rec.dt);
  ASSERT_EQ(static_cast<long>(dts.size()), r.steps_taken);
  EXPECT_EQ(dts.front(), pi.defaults.dt0);
  const double largest = *std::max_element(dts.begin(), dts.end());
  EXPECT_GT(largest, 100.0 * dts.front());
  for (const auto& rec : sink.records) {
    if (rec.werr >= 0.0 && rec.accepted) EXPECT_LE(rec.werr, 1.0);
    if (rec.accepted) {
      EXPECT_GE(rec.next_dt / rec.dt, 0.1 - 1e-12);
      EXPECT_LE(rec.next_dt / rec.dt, 10.0 + 1e-12);
    }
  }
}

TEST(Monitor, SumOfAcceptedStepsSpansTheRun) {
  const auto pi = cli::build_problem("kinetics");
  CollectingSink sink;
  SolveHooks hooks;
  hooks.monitors.push_back({&sink, {}});
  SolveOptions o = pi.defaults;
  o.final_time_policy = FinalTimePolicy::MatchStep;
  const SolveResult r =
      solve(pi.problem, pi.u0, parse_scheme("rosw:ra34pw2"), o, pi.tolerances, AdaptConfig{}, hooks);
  double sum = 0.0;
  for (const auto& rec : sink.records)
    if (rec.accepted) sum += rec.dt;
  EXPECT_NEAR(sum, r.final_t - o.t0, 1e-10);
  EXPECT_EQ(r.final_t, 20.0);
}

TEST(Monitor, MonitorsDoNotPerturbTheSolve) {
  for (const char* s : {"rosw:ra34pw2", "arkimex:ark3", "bdf:2", "rk:dp5"}) {
    const auto pi = cli::build_problem("kinetics");
    const Scheme sc = parse_scheme(s);
    const SolveResult a = solve(pi.problem, pi.u0, sc, pi.defaults, pi.tolerances, AdaptConfig{});
    CollectingSink c1, c2;
    std::ostringstream os;
    StreamSink ss(os, MonitorFormat::JSONL, 3);
    SolveHooks hooks;
    hooks.monitors.push_back({&c1, {}});
    hooks.monitors.push_back({&c2, {2, true}});
    hooks.monitors.push_back({&ss, {1, true}});
    const SolveResult b = solve(pi.problem, pi.u0, sc, pi.defaults, pi.tolerances, AdaptConfig{}, hooks);
    EXPECT_EQ(a.final_t, b.final_t) << s;
    EXPECT_TRUE(bitwise_equal(a.final_u, b.final_u)) << s;
    EXPECT_EQ(a.steps_taken, b.steps_taken) << s;
    EXPECT_EQ(a.counters, b.counters) << s;
  }
}

TEST(Summary, ReportsConfigurationAndCounters) {
  const auto pi = cli::build_problem("kinetics");
  const Scheme sc = parse_scheme("rosw:ra34pw2");
  const SolveResult r = solve(pi.problem, pi.u0, sc, pi.defaults, pi.tolerances, AdaptConfig{});
  SummaryConfig cfg{"kinetics", sc, pi.defaults, pi.tolerances, AdaptConfig{}};
  const std::string text = view_summary(r, cfg);
  EXPECT_NE(text.find("maximum steps=1000, maximum time=20"), std::string::npos) << text;
  EXPECT_NE(text.find("total number of steps=" + std::to_string(r.steps_taken)), std::string::npos);
  EXPECT_NE(text.find("total number of rejected steps=" + std::to_string(r.counters.rejected_steps)),
            std::string::npos);
  EXPECT_NE(text.find("total number of right-hand-side evaluations=" + std::to_string(r.counters.rhs_evals)),
            std::string::npos);
  EXPECT_NE(text.find("ReachedMaxTime"), std::string::npos);
}

TEST(Summary, ZeroStepRunHasZeroCounters) {
  const auto pi = cli::build_problem("kinetics");
  SolveOptions o = pi.defaults;
  o.t0 = o.max_time;
  const Scheme sc = parse_scheme("rosw:ra34pw2");
  const SolveResult r = solve(pi.problem, pi.u0, sc, o, pi.tolerances, AdaptConfig{});
  EXPECT_EQ(r.steps_taken, 0);
  EXPECT_EQ(r.counters, Counters{});
  EXPECT_TRUE(bitwise_equal(r.final_u, pi.u0));
  const std::string text = view_summary(r, {"kinetics", sc, o, pi.tolerances, AdaptConfig{}});
  EXPECT_NE(text.find("total number of steps=0"), std::string::npos);
  EXPECT_NE(text.find("total number of nonlinear solver iterations=0"), std::string::npos);
}
