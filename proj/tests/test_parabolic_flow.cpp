#include <catch_amalgamated.hpp>

#include <cmath>

#include "mcflab/diagnostics.hpp"
#include "mcflab/fields.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/oracle.hpp"
#include "oracle_values.hpp"

using namespace mcflab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace ov = oracle_values;

namespace {

DomainGrid interval_grid(int n) { return build_grid(DomainSpec::interval(-1, 1), {n, 0}, MetricField::euclidean()); }

ContactAngleSpec grim_phi() { return ContactAngleSpec::constant(-ov::kSinOne, 0.9); }

}  // namespace

TEST_CASE("cfl step examples", "[cfl]") {
  const auto g = interval_grid(200);
  CHECK_THAT(cfl_dt(make_state(g, constant_field(g, 0.0)), g, 0.25), WithinRel(1.25e-5, 1e-12));
  CHECK_THAT(cfl_dt(make_state(g, affine_field(g, 0.0, 1.0, 0.0)), g, 0.25), WithinRel(1.25e-5 / std::sqrt(2.0), 1e-12));
  const auto gp = build_grid(DomainSpec::rectangle(-0.42, 0.42, -0.42, 0.42), {84, 84}, metrics::poincare_disk());
  CHECK_THAT(cfl_dt(make_state(gp, constant_field(gp, 0.0)), gp, 0.25), WithinRel(2.5e-5, 1e-10));
}

TEST_CASE("constant height with a horizontal contact angle is stationary", "[step]") {
  const auto g = build_grid(DomainSpec::disk(0.6), {12, 24}, metrics::poincare_disk());
  GraphState s = make_state(g, constant_field(g, 0.7));
  const auto next = step(s, g, ContactAngleSpec::constant(0.0, 0.5), 1e-4);
  for (double v : next.u) CHECK(v == 0.7);
  CHECK(next.t == 1e-4);
}

TEST_CASE("a step on the grim reaper translates by dt", "[step]") {
  const auto g = interval_grid(400);
  const auto exact = grim_reaper(1.0);
  const double dt = cfl_dt(make_state(g, exact.sample(g)), g, 0.25);
  const auto next = step(make_state(g, exact.sample(g)), g, grim_phi(), dt);
  const auto u0 = exact.sample(g);
  for (int p = 1; p + 1 < g.node_count(); ++p) CHECK_THAT(next.u[p] - u0[p], WithinAbs(dt, 1e-4 * dt));
  CHECK_THAT(next.u.front() - u0.front(), WithinAbs(dt, 1e-2 * dt));
  CHECK_THAT(next.u.back() - u0.back(), WithinAbs(dt, 1e-2 * dt));
}

TEST_CASE("flow from the exact grim reaper reaches u0 + t", "[flow]") {
  const auto g = interval_grid(400);
  const auto exact = grim_reaper(1.0);
  FlowParams p;
  p.t_end = 0.5;
  p.cadence = 2000;
  p.stop_at_translator = false;
  const auto traj = run_flow(exact.sample(g), g, grim_phi(), p);
  const auto& fin = traj.states.back();
  CHECK_THAT(fin.t, WithinAbs(0.5, 1e-12));
  const auto u0 = exact.sample(g);
  for (int q = 0; q < g.node_count(); ++q) CHECK_THAT(fin.u[q] - u0[q], WithinAbs(0.5, 5e-3));
  CHECK_THAT(estimate_speed(traj), WithinAbs(1.0, 1e-3));
}

TEST_CASE("flow from zero converges to the grim reaper", "[flow]") {
  const auto g = interval_grid(100);
  FlowParams p;
  p.t_end = 40.0;
  p.cadence = 500;
  p.stop_tol = 1e-9;
  const auto traj = run_flow(constant_field(g, 0.0), g, grim_phi(), p);
  REQUIRE(traj.converged);
  CHECK_THAT(estimate_speed(traj), WithinAbs(1.0, 2e-3));
  const auto& u = traj.states.back().u;
  const double shift = u[50];
  const auto exact = grim_reaper(1.0);
  for (int i = 0; i < g.n1; ++i) CHECK_THAT(u[i] - shift, WithinAbs(exact.u(g.q1[i]), 2e-3));
}

TEST_CASE("horizontal contact angle: zero speed and decaying max |u_t|", "[flow]") {
  const auto g = interval_grid(60);
  FlowParams p;
  p.t_end = 20.0;
  p.cadence = 50;
  const auto traj = run_flow(random_smooth_field(g, 0.3, 4), g, ContactAngleSpec::constant(0.0, 0.5), p);
  CHECK(traj.converged);
  CHECK_THAT(estimate_speed(traj), WithinAbs(0.0, 1e-6));
  CHECK(monitor_ut_max(traj.series).passed());
  for (std::size_t k = 1; k < traj.series.size(); ++k) {
    CHECK(traj.series[k].max_abs_ut <= traj.series[k - 1].max_abs_ut * (1.0 + 1e-9) + 1e-14);
    CHECK(traj.series[k].energy <= traj.series[k - 1].energy + 1e-12);
  }
}

TEST_CASE("zero data with zero contact angle stops immediately at zero speed", "[flow]") {
  const auto g = interval_grid(20);
  FlowParams p;
  p.cadence = 1;
  const auto traj = run_flow(constant_field(g, 0.0), g, ContactAngleSpec::constant(0.0, 0.5), p);
  CHECK(traj.converged);
  CHECK(traj.series.size() == 6);
  CHECK(estimate_speed(traj) == 0.0);
}

TEST_CASE("trajectory invariants", "[flow][property]") {
  const auto g = build_grid(DomainSpec::disk(0.6), {12, 24}, metrics::poincare_disk());
  FlowParams p;
  p.t_end = 0.2;
  p.cadence = 20;
  p.stop_at_translator = false;
  const auto phi = ContactAngleSpec::constant(-0.5, 0.6);
  const auto u0 = random_smooth_field(g, 0.2, 3);
  const auto traj = run_flow(u0, g, phi, p);
  double lo0 = *std::min_element(u0.begin(), u0.end());
  double hi0 = *std::max_element(u0.begin(), u0.end());
  for (std::size_t k = 0; k < traj.series.size(); ++k) {
    const auto& r = traj.series[k];
    CHECK(r.bc_residual <= 1e-10);
    CHECK(r.max_w >= 1.0);
    if (k > 0) CHECK(r.t > traj.series[k - 1].t);
  }
  CHECK_THAT(traj.series.back().t, WithinAbs(0.2, 1e-12));
  CHECK(traj.osc_u_minus_u0 >= 0.0);
  CHECK(hi0 > lo0);
}

TEST_CASE("speed estimate on synthetic series", "[speed]") {
  Trajectory traj;
  for (int k = 0; k <= 30; ++k) {
    FlowScalars r;
    r.t = 0.1 * k;
    r.mean_u = 0.25 + 1.7 * r.t;
    traj.series.push_back(r);
  }
  CHECK_THAT(estimate_speed(traj), WithinAbs(1.7, 1e-12));
  Trajectory short_traj;
  short_traj.series.push_back(traj.series[0]);
  CHECK_THROWS_AS(estimate_speed(short_traj), EstimationError);
  short_traj.series.push_back(traj.series[1]);
  CHECK_THROWS_AS(estimate_speed(short_traj), EstimationError);
}

TEST_CASE("heun step is second order in time", "[flow][property]") {
  const auto g = interval_grid(40);
  auto u0 = grim_reaper(1.0).sample(g);
  const auto bump = compatible_bump(g, 0.1);
  for (int p = 0; p < g.node_count(); ++p) u0[p] += bump[p];
  const double dt0 = cfl_dt(make_state(g, u0), g, 0.25);
  std::vector<std::vector<double>> finals;
  for (int k : {1, 2, 4}) {
    FlowParams p;
    p.dt_fixed = dt0 / k;
    p.t_end = 400 * dt0;
    p.cadence = 1000000;
    p.stop_at_translator = false;
    finals.push_back(run_flow(u0, g, grim_phi(), p).states.back().u);
  }
  double d1 = 0.0, d2 = 0.0;
  for (int p = 0; p < g.node_count(); ++p) {
    d1 = std::max(d1, std::abs(finals[0][p] - finals[1][p]));
    d2 = std::max(d2, std::abs(finals[1][p] - finals[2][p]));
  }
  CHECK(d1 / d2 >= 3.5);
}

TEST_CASE("oversized steps are reported as blow-up", "[flow]") {
  const auto g = interval_grid(80);
  const auto u0 = random_smooth_field(g, 0.3, 2);
  FlowParams p;
  p.dt_fixed = 40.0 * cfl_dt(make_state(g, u0), g, 0.25);
  p.t_end = 10.0;
  p.stop_at_translator = false;
  CHECK_THROWS_AS(run_flow(u0, g, grim_phi(), p), BlowUpError);
}

TEST_CASE("flow parameter contracts", "[flow]") {
  const auto g = interval_grid(10);
  FlowParams p;
  p.t_end = 0.0;
  CHECK_THROWS_AS(run_flow(constant_field(g, 0.0), g, grim_phi(), p), ContractViolation);
  p.t_end = 1.0;
  p.c_safe = 1.5;
  CHECK_THROWS_AS(run_flow(constant_field(g, 0.0), g, grim_phi(), p), ContractViolation);
  p.c_safe = 0.25;
  auto bad = constant_field(g, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(run_flow(bad, g, grim_phi(), p), ContractViolation);
}

TEST_CASE("flow is deterministic", "[flow][property]") {
  const auto g = build_grid(DomainSpec::rectangle(-0.4, 0.4, -0.3, 0.3), {12, 10}, metrics::poincare_disk());
  FlowParams p;
  p.t_end = 0.05;
  p.stop_at_translator = false;
  const auto phi = ContactAngleSpec::constant(0.3, 0.5);
  const auto a = run_flow(random_smooth_field(g, 0.2, 1), g, phi, p);
  const auto b = run_flow(random_smooth_field(g, 0.2, 1), g, phi, p);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    CHECK(a.series[k].mean_u == b.series[k].mean_u);
    CHECK(a.series[k].energy == b.series[k].energy);
  }
  CHECK(a.states.back().u == b.states.back().u);
}
