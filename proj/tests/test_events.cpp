#include "support.hpp"

#include <gtest/gtest.h>

#include <problems.hpp>

#include <cmath>

using namespace odekit;
using namespace odekit::testing;

namespace {

EventSpec one_event(int direction) {
  EventSpec ev;
  ev.nevents = 1;
  ev.h = [](double, const Vector& u) { return Vector::Constant(1, u[0]); };
  ev.direction = {direction};
  ev.terminate = {false};
  ev.tol = Vector::Constant(1, 1e-12);
  return ev;
}

SolveResult run_ball(const cli::ProblemInstance& pi, const EventSpec* ev, double max_time = 15.0) {
  SolveOptions o = pi.defaults;
  o.max_time = max_time;
  SolveHooks hooks;
  hooks.events = ev;
  AdaptConfig a;
  a.kind = AdaptKind::None;
  return solve(pi.problem, pi.u0, parse_scheme("rk:rk4"), o, pi.tolerances, a, hooks);
}

}  // namespace

TEST(Events, ValidateRejectsBadSpecs) {
  EventSpec ev = one_event(-1);
  EXPECT_NO_THROW(ev.validate(2));
  ev.direction = {2};
  EXPECT_THROW(ev.validate(2), ConfigError);
  ev = one_event(0);
  ev.h = nullptr;
  EXPECT_THROW(ev.validate(2), ConfigError);
  ev = one_event(0);
  ev.tol = Vector::Constant(1, -1.0);
  EXPECT_THROW(ev.validate(2), ConfigError);
  ev = one_event(0);
  ev.terminate = {true, false};
  EXPECT_THROW(ev.validate(2), ConfigError);
}

TEST(Events, ScanDetectsFallingCrossing) {
  const EventSpec ev = one_event(-1);
  EXPECT_EQ(scan_events(ev, 0.0, vec({1.0}), 0.1, vec({-0.5})), std::vector<int>{0});
  EXPECT_EQ(scan_events(ev, 0.0, vec({1.0}), 0.1, vec({0.0})), std::vector<int>{0});
  EXPECT_TRUE(scan_events(ev, 0.0, vec({1.0}), 0.1, vec({0.5})).empty());
}

TEST(Events, ScanDirectionFilter) {
  const EventSpec rising = one_event(+1);
  EXPECT_TRUE(scan_events(rising, 0.0, vec({1.0}), 0.1, vec({-0.5})).empty());
  EXPECT_EQ(scan_events(rising, 0.0, vec({-1.0}), 0.1, vec({0.5})), std::vector<int>{0});
  const EventSpec both = one_event(0);
  EXPECT_EQ(scan_events(both, 0.0, vec({1.0}), 0.1, vec({-0.5})).size(), 1u);
  EXPECT_EQ(scan_events(both, 0.0, vec({-1.0}), 0.1, vec({0.5})).size(), 1u);
}

TEST(Events, ScanSuppressesZeroAtStart) {
  const EventSpec ev = one_event(0);
  EXPECT_TRUE(scan_events(ev, 0.0, vec({0.0}), 0.1, vec({-0.5})).empty());
}

TEST(Events, DisarmedEventIsSkippedUntilItLeavesTheBand) {
  const EventSpec ev = one_event(0);
  EventState st;
  st.reset(1);
  st.armed[0] = false;
  EXPECT_TRUE(scan_events(ev, 0.0, vec({1.0}), 0.1, vec({-1.0}), &st).empty());
  st.update(ev, vec({1e-14}));
  EXPECT_FALSE(st.armed[0]);
  st.update(ev, vec({1e-3}));
  EXPECT_TRUE(st.armed[0]);
  EXPECT_EQ(scan_events(ev, 0.0, vec({1.0}), 0.1, vec({-1.0}), &st).size(), 1u);
}

TEST(Events, LocateLinearInOneIteration) {
  const EventSpec ev = one_event(-1);
  // u(t) = 0.3 - t on [0, 1]
  auto interp = [](double t) { return vec({0.3 - t}); };
  const EventRecord r = locate_event(ev, interp, 0.0, 1.0, 0);
  EXPECT_NEAR(r.t_star, 0.3, 1e-14);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE(std::abs(r.h_value), 1e-12);
}

TEST(Events, LocateQuadraticStaysInsideBracket) {
  EventSpec ev = one_event(-1);
  ev.tol = Vector::Constant(1, 1e-13);
  auto interp = [](double t) { return vec({10.0 - 4.9 * t * t}); };
  const EventRecord r = locate_event(ev, interp, 1.0, 2.0, 0);
  EXPECT_NEAR(r.t_star, std::sqrt(10.0 / 4.9), 1e-12);
  EXPECT_GT(r.t_star, 1.0);
  EXPECT_LT(r.t_star, 2.0);
  EXPECT_LT(r.iterations, 50);
}

TEST(Events, LocateEndpointRoot) {
  const EventSpec ev = one_event(-1);
  auto interp = [](double t) { return vec({1.0 - t}); };
  const EventRecord r = locate_event(ev, interp, 0.0, 1.0, 0);
  EXPECT_EQ(r.t_star, 1.0);
  EXPECT_EQ(r.h_value, 0.0);
}

TEST(Events, PostEventHandlerReflectsVelocity) {
  EventSpec ev = one_event(-1);
  ev.post_event = [](const std::vector<int>&, double, Vector& u, bool) {
    u[1] = -0.9 * u[1];
    return true;
  };
  EventRecord rec;
  rec.t_star = 1.5;
  const PostEventPlan plan = handle_post_event(ev, {rec}, vec({0.0, -14.0}), 1.6);
  EXPECT_DOUBLE_EQ(plan.u[1], 12.6);
  EXPECT_FALSE(plan.terminate);
  EXPECT_NEAR(plan.resync_dt, 0.1, 1e-15);
}

TEST(Events, NullHandlerLeavesStateUnchanged) {
  const EventSpec ev = one_event(-1);
  EventRecord rec;
  rec.t_star = 0.5;
  const Vector u = vec({0.0, -3.0});
  const PostEventPlan plan = handle_post_event(ev, {rec}, u, 0.75);
  EXPECT_TRUE(bitwise_equal(plan.u, u));
}

TEST(Events, FailingHandlerThrows) {
  EventSpec ev = one_event(-1);
  ev.post_event = [](const std::vector<int>&, double, Vector&, bool) { return false; };
  EventRecord rec;
  EXPECT_THROW(handle_post_event(ev, {rec}, vec({0.0}), 1.0), Error);
  EXPECT_THROW(handle_post_event(ev, {}, vec({0.0}), 1.0), Error);
}

TEST(Events, BouncingBallFirstImpact) {
  const auto pi = cli::build_problem("bouncing-ball");
  const SolveResult r = run_ball(pi, &*pi.events, 2.0);
  ASSERT_GE(r.events.size(), 1u);
  const double t1 = std::sqrt(10.0 / 4.9);
  EXPECT_NEAR(r.events[0].t_star, t1, 1e-6);
  EXPECT_NEAR(r.events[0].u_star[1], -9.8 * t1, 1e-5);
}

TEST(Events, BouncingBallRestitutionAndGeometricIntervals) {
  const auto pi = cli::build_problem("bouncing-ball");
  const SolveResult r = run_ball(pi, &*pi.events);
  EXPECT_EQ(r.termination, Termination::ReachedMaxTime);
  ASSERT_GE(r.events.size(), 4u);
  for (std::size_t i = 1; i < r.events.size(); ++i) {
    const double vb = r.events[i].u_star[1];
    // energy between impacts is conserved, so the speed at impact i is 0.9^i times the first
    EXPECT_NEAR(vb * vb, std::pow(0.81, static_cast<double>(i)) * r.events[0].u_star[1] * r.events[0].u_star[1],
                1e-5 * vb * vb);
  }
  for (std::size_t i = 2; i < r.events.size(); ++i) {
    const double ratio =
        (r.events[i].t_star - r.events[i - 1].t_star) / (r.events[i - 1].t_star - r.events[i - 2].t_star);
    EXPECT_NEAR(ratio, 0.9, 1e-5);
  }
  for (const auto& e : r.events) EXPECT_LE(std::abs(e.h_value), 1e-8);
}

TEST(Events, TerminalEventStopsSolve) {
  auto pi = cli::build_problem("bouncing-ball");
  EventSpec ev = *pi.events;
  ev.terminate = {true};
  const SolveResult r = run_ball(pi, &ev);
  EXPECT_EQ(r.termination, Termination::EventTerminated);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_NEAR(r.final_t, std::sqrt(10.0 / 4.9), 1e-6);
}

TEST(Events, TwoSimultaneousCandidatesResolveToEarliest) {
  auto pi = cli::build_problem("bouncing-ball");
  EventSpec ev;
  ev.nevents = 2;
  ev.h = [](double, const Vector& u) { return vec({u[0] - 5.0, u[0] - 2.0}); };
  ev.direction = {-1, -1};
  ev.terminate = {true, true};
  ev.tol = Vector::Constant(1, 1e-12);
  SolveOptions o = pi.defaults;
  o.dt0 = 0.5;  // one step spans both crossings
  o.max_time = 2.0;
  SolveHooks hooks;
  hooks.events = &ev;
  AdaptConfig a;
  a.kind = AdaptKind::None;
  const SolveResult r = solve(pi.problem, pi.u0, parse_scheme("rk:rk4"), o, pi.tolerances, a, hooks);
  EXPECT_EQ(r.termination, Termination::EventTerminated);
  ASSERT_FALSE(r.events.empty());
  EXPECT_EQ(r.events[0].event_id, 0);
  EXPECT_NEAR(r.events[0].t_star, std::sqrt(5.0 / 4.9), 1e-6);
}

TEST(Events, NoEventsMatchesPlainSolve) {
  const auto pi = cli::build_problem("kinetics");
  EventSpec none;
  SolveHooks hooks;
  hooks.events = &none;
  const Scheme sc = parse_scheme("rosw:ra34pw2");
  const SolveResult a = solve(pi.problem, pi.u0, sc, pi.defaults, pi.tolerances, AdaptConfig{});
  const SolveResult b = solve(pi.problem, pi.u0, sc, pi.defaults, pi.tolerances, AdaptConfig{}, hooks);
  EXPECT_EQ(a.final_t, b.final_t);
  EXPECT_TRUE(bitwise_equal(a.final_u, b.final_u));
  EXPECT_EQ(a.steps_taken, b.steps_taken);
  EXPECT_TRUE(b.events.empty());
}
