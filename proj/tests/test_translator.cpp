#include <catch_amalgamated.hpp>

#include <cmath>

#include "mcflab/diagnostics.hpp"
#include "mcflab/fields.hpp"
#include "mcflab/oracle.hpp"
#include "mcflab/translator.hpp"
#include "oracle_values.hpp"

using namespace mcflab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace ov = oracle_values;

namespace {

DomainGrid interval_grid(int n) { return build_grid(DomainSpec::interval(-1, 1), {n, 0}, MetricField::euclidean()); }

ContactAngleSpec grim_phi() { return ContactAngleSpec::constant(-ov::kSinOne, 0.9); }

DomainGrid ball_grid(int n) { return build_grid(DomainSpec::disk(0.6), {n, 2 * n}, metrics::poincare_disk()); }

std::vector<double> closed_w(const std::vector<double>& u, const DomainGrid& g, const ContactAngleSpec& phi) {
  GraphState s;
  s.u = u;
  oblique_bc_closure(s, g, evaluate_contact_angle(phi, g, u));
  return s.w;
}

}  // namespace

TEST_CASE("horizontal contact angle gives the zero translator", "[regularized]") {
  const auto g = ball_grid(12);
  const auto phi = ContactAngleSpec::constant(0.0, 0.5);
  for (double eps : {1.0, 1e-2, 1e-4}) {
    const auto sol = solve_regularized(eps, g, phi, {});
    for (double v : sol.u()) CHECK(v == 0.0);
  }
  const auto tr = continuation_solve(g, phi);
  CHECK(tr.C == 0.0);
  for (double v : tr.profile) CHECK(v == 0.0);
  CHECK(speed_quadrature(tr.profile, g, phi) == 0.0);
}

TEST_CASE("small eps: eps u_eps approaches the speed uniformly", "[regularized]") {
  const auto g = interval_grid(200);
  const auto sol = solve_regularized(1e-3, g, grim_phi(), {});
  for (double v : sol.u()) CHECK_THAT(1e-3 * v, WithinAbs(1.0, 0.02));
}

TEST_CASE("large eps: integrated identity", "[regularized]") {
  const auto g = interval_grid(200);
  const double eps = 10.0;
  const auto sol = solve_regularized(eps, g, grim_phi(), {});
  const auto u = sol.u();
  const auto w = closed_w(u, g, grim_phi());
  double inv_w = 0.0, u_over_w = 0.0;
  for (int p = 0; p < g.node_count(); ++p) {
    inv_w += g.dV[p] / w[p];
    u_over_w += g.dV[p] * u[p] / w[p];
  }
  const double rhs = 2.0 * ov::kSinOne;
  CHECK_THAT(eps * weighted_mean(g, u) * inv_w, WithinRel(rhs, 0.1));
  CHECK_THAT(eps * u_over_w, WithinRel(rhs, 1e-3));
}

TEST_CASE("regularized residual identity", "[regularized][property]") {
  const auto g = ball_grid(16);
  const auto phi = ContactAngleSpec::constant(-0.5, 0.6);
  const double eps = 0.1;
  const auto sol = solve_regularized(eps, g, phi, {});
  GraphState s;
  s.u = sol.u();
  const auto data = evaluate_contact_angle(phi, g, s.u);
  oblique_bc_closure(s, g, data);
  const auto m = mean_curvature_op(s, g);
  double lhs = 0.0, mdv = 0.0, phids = 0.0;
  for (int p = 0; p < g.node_count(); ++p) {
    lhs += (m[p] - eps * s.u[p] / s.w[p]) * g.dV[p];
    CHECK(std::abs(m[p] - eps * s.u[p] / s.w[p]) <= 1e-10);
    mdv += m[p] * g.dV[p];
  }
  for (std::size_t k = 0; k < g.boundary.size(); ++k) phids += data.phi[k] * g.boundary[k].ds;
  CHECK_THAT(lhs, WithinAbs(0.0, 1e-9));
  CHECK_THAT(mdv, WithinRel(-phids, 0.05));
}

TEST_CASE("grim reaper translator", "[translator]") {
  const auto g = interval_grid(400);
  const auto sol = continuation_solve(g, grim_phi());
  CHECK_THAT(sol.C, WithinAbs(1.0, 5e-3));
  CHECK_THAT(speed_quadrature(sol.profile, g, grim_phi()), WithinAbs(1.0, 5e-3));
  CHECK(sol.pde_residual <= 1e-9);
  CHECK(sol.bc_residual <= 1e-10);
  CHECK_FALSE(sol.low_confidence);
  auto exact = grim_reaper(1.0).sample(g);
  const double m = weighted_mean(g, exact);
  CHECK_THAT(m, WithinAbs(ov::kGrimMeanU, 1e-4));
  for (int p = 0; p < g.node_count(); ++p) CHECK_THAT(sol.profile[p], WithinAbs(exact[p] - m, 1e-3));
}

TEST_CASE("continuation gaps shrink monotonically", "[translator]") {
  const auto g = interval_grid(200);
  const auto sol = continuation_solve(g, grim_phi());
  REQUIRE(sol.history.size() == 4);
  for (std::size_t k = 2; k < sol.history.size(); ++k) {
    const double d1 = std::abs(sol.history[k - 1].eps_mean_u - sol.history[k - 2].eps_mean_u);
    const double d2 = std::abs(sol.history[k].eps_mean_u - sol.history[k - 1].eps_mean_u);
    CHECK(d2 < d1);
    CHECK((sol.history[k - 1].eps_mean_u - sol.history[k - 2].eps_mean_u) *
              (sol.history[k].eps_mean_u - sol.history[k - 1].eps_mean_u) >= 0.0);
  }
  CHECK_THAT(sol.C_richardson, WithinAbs(sol.C, 1e-3));
}

TEST_CASE("tilted plane is a minimal translator", "[translator]") {
  const double m = 1.0 / std::sqrt(3.0);
  const auto exact = tilted_minimal(m);
  const auto g = build_grid(exact.domain(), {100, 0}, MetricField::euclidean());
  const auto phi = exact.contact_angle(0.6);
  const auto sol = continuation_solve(g, phi);
  CHECK_THAT(sol.C, WithinAbs(0.0, 1e-8));
  const auto u = exact.sample(g);
  for (int p = 0; p < g.node_count(); ++p) CHECK_THAT(sol.profile[p], WithinAbs(u[p], 1e-8));
  CHECK_THAT(speed_quadrature(sol.profile, g, phi), WithinAbs(0.0, 1e-15));
}

TEST_CASE("quadrature speed on exact data", "[translator]") {
  const auto g = interval_grid(400);
  CHECK_THAT(speed_quadrature(grim_reaper(1.0).sample(g), g, grim_phi()), WithinAbs(1.0, 1e-4));
  CHECK(speed_quadrature(constant_field(g, 0.0), g, ContactAngleSpec::constant(0.0, 0.5)) == 0.0);
}

TEST_CASE("hyperbolic ball: estimators agree and the speed bound holds", "[translator]") {
  const auto g = ball_grid(32);
  const auto phi = ContactAngleSpec::constant(-0.5, 0.6);
  const auto sol = continuation_solve(g, phi);
  const double cq = speed_quadrature(sol.profile, g, phi);
  CHECK(sol.C > 0.0);
  CHECK_THAT(cq, WithinRel(sol.C, 5e-3));
  CHECK(estimator_agreement(sol.C, cq).passed());
  CHECK(speed_bound(sol, g).passed());
  CHECK(inf_H_inequality(sol, g).verdict.passed());
  CHECK(sol.pde_residual <= 1e-8);
}

TEST_CASE("uniqueness probes", "[translator][property]") {
  SECTION("grim reaper") {
    const auto rep = uniqueness_probe(interval_grid(200), grim_phi());
    REQUIRE(rep.complete());
    CHECK(rep.max_dC <= 1e-6);
    CHECK(rep.profile_spread <= 1e-6);
  }
  SECTION("horizontal contact angle") {
    const auto rep = uniqueness_probe(ball_grid(12), ContactAngleSpec::constant(0.0, 0.5));
    REQUIRE(rep.complete());
    for (double c : rep.speeds) CHECK_THAT(c, WithinAbs(0.0, 1e-12));
    CHECK(rep.profile_spread <= 1e-6);
  }
  SECTION("hyperbolic ball") {
    const auto rep = uniqueness_probe(ball_grid(16), ContactAngleSpec::constant(0.3, 0.5));
    REQUIRE(rep.complete());
    CHECK(rep.max_dC <= 1e-6);
    CHECK(rep.profile_spread <= 1e-6);
  }
}

TEST_CASE("interval translators: C = a for Phi = -sin a, within the speed bound", "[translator][property]") {
  const auto g = interval_grid(100);
  for (double a : {0.2, 0.6, 1.0, 1.3}) {
    const auto phi = ContactAngleSpec::constant(-std::sin(a), 0.99);
    const auto sol = continuation_solve(g, phi);
    CHECK(speed_bound(sol, g).passed());
    CHECK_THAT(sol.C, WithinRel(a, 0.01));
  }
}

TEST_CASE("translator option contracts", "[translator]") {
  const auto g = interval_grid(20);
  CHECK_THROWS_AS(solve_regularized(0.0, g, grim_phi(), {}), ContractViolation);
  CHECK_THROWS_AS(solve_regularized(-1.0, g, grim_phi(), {}), ContractViolation);
  TranslatorOptions bad;
  bad.eps_schedule = {1e-2, 1e-1};
  CHECK_THROWS_AS(continuation_solve(g, grim_phi(), bad), ContractViolation);
  bad.eps_schedule = {1e-2};
  CHECK_THROWS_AS(continuation_solve(g, grim_phi(), bad), ContractViolation);
}

TEST_CASE("newton failure reports the residual", "[translator]") {
  const auto g = ball_grid(16);
  TranslatorOptions opt;
  opt.max_newton = 1;
  try {
    continuation_solve(g, ContactAngleSpec::constant(-0.5, 0.6), opt);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}
