#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "mcflab/contact_angle.hpp"
#include "mcflab/fields.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/operators.hpp"
#include "oracle_values.hpp"

using namespace mcflab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace ov = oracle_values;

namespace {

DomainGrid interval_grid(int n, double a = -1.0, double b = 1.0) {
  return build_grid(DomainSpec::interval(a, b), {n, 0}, MetricField::euclidean());
}

std::vector<double> sample(const DomainGrid& g, const std::function<double(double, double)>& f) {
  std::vector<double> u(g.node_count());
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) u[g.node(i, j)] = f(g.q1[i], g.dim == 2 ? g.q2[j] : 0.0);
  }
  return u;
}

// M[u] for u = x^2/2 - 0.3 x y + 0.2 sin 2y on the Poincare disk.
double poincare_manufactured(double x, double y) {
  const double a = std::pow(3 * x - 4 * std::cos(2 * y), 2) + std::pow(10 * x - 3 * y, 2);
  const double q = x * x + y * y - 1;
  const double num =
      (0.5 * ((-10 * x + 3 * y) * (-2 * x * a + (-109 * x + 30 * y + 12 * std::cos(2 * y)) * q) +
              (3 * x - 4 * std::cos(2 * y)) *
                  (-2 * y * a + q * (-24 * x * std::sin(2 * y) + 30 * x - 9 * y + 16 * std::sin(4 * y)))) *
           (-q) -
       (a * q * q + 400) * (4 * std::sin(2 * y) - 5)) *
      q * q;
  return num / std::pow(a * q * q + 400, 1.5);
}

double max_error(const DomainGrid& g, const std::vector<double>& u,
                 const std::function<double(double, double)>& exact) {
  const auto m = mean_curvature_op(make_state(g, u), g);
  double e = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      e = std::max(e, std::abs(m[g.node(i, j)] - exact(g.q1[i], g.dim == 2 ? g.q2[j] : 0.0)));
    }
  }
  return e;
}

}  // namespace

TEST_CASE("w of flat and linear graphs", "[w]") {
  const auto g = interval_grid(50);
  const auto w0 = compute_w(make_state(g, constant_field(g, 0.0)), g);
  for (double v : w0) CHECK(v == 1.0);
  const auto w1 = compute_w(make_state(g, sample(g, [](double x, double) { return x; })), g);
  for (double v : w1) CHECK_THAT(v, WithinAbs(std::sqrt(2.0), 1e-13));
}

TEST_CASE("w on the grim reaper at x = 0.5", "[w]") {
  const auto g = interval_grid(400);
  const auto u = sample(g, [](double x, double) { return -std::log(std::cos(x)); });
  const auto w = compute_w(make_state(g, u), g);
  CHECK_THAT(w[300], WithinAbs(ov::kGrimW05, 1e-5));
  CHECK_THAT(u[300], WithinAbs(ov::kGrimU05, 1e-15));
}

TEST_CASE("w is at least one", "[w][property]") {
  const auto g = build_grid(DomainSpec::disk(0.6), {16, 32}, metrics::poincare_disk());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (double v : compute_w(make_state(g, random_smooth_field(g, 2.0, seed)), g)) CHECK(v >= 1.0);
  }
}

TEST_CASE("mean curvature of constants and planes vanishes", "[operator]") {
  const auto g = build_grid(DomainSpec::rectangle(-1, 1, -0.5, 0.5), {20, 10}, MetricField::euclidean());
  for (double v : mean_curvature_op(make_state(g, constant_field(g, 3.0)), g)) CHECK(v == 0.0);
  for (double v : mean_curvature_op(make_state(g, affine_field(g, 0.1, 0.7, -0.4)), g)) {
    CHECK_THAT(v, WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("mean curvature of the grim reaper at the origin", "[operator]") {
  const auto g = interval_grid(400);
  const auto m = mean_curvature_op(make_state(g, sample(g, [](double x, double) { return -std::log(std::cos(x)); })), g);
  CHECK_THAT(m[200], WithinAbs(1.0, 1e-4));
}

TEST_CASE("operator converges at second order on manufactured solutions", "[operator][property]") {
  SECTION("poincare rectangle") {
    std::vector<double> err;
    for (int n : {16, 32, 64, 128}) {
      const auto g = build_grid(DomainSpec::rectangle(-0.5, 0.4, -0.3, 0.5), {n, n}, metrics::poincare_disk());
      auto f = [](double x, double y) { return 0.5 * x * x - 0.3 * x * y + 0.2 * std::sin(2 * y); };
      err.push_back(max_error(g, sample(g, f), poincare_manufactured));
    }
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.9);
  }
  SECTION("euclidean annulus, u = r^2 / 2") {
    std::vector<double> err;
    for (int n : {16, 32, 64, 128}) {
      const auto g = build_grid(DomainSpec::annulus(0.3, 1.0), {n, 2 * n}, MetricField::euclidean());
      err.push_back(max_error(g, sample(g, [](double r, double) { return 0.5 * r * r; }),
                              [](double r, double) { return (2 + r * r) / std::pow(1 + r * r, 1.5); }));
    }
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.9);
  }
  SECTION("grim reaper interval") {
    std::vector<double> err;
    for (int n : {256, 512, 1024, 2048}) {
      const auto g = interval_grid(n);
      err.push_back(max_error(g, sample(g, [](double x, double) { return -std::log(std::cos(x)); }),
                              [](double x, double) { return std::cos(x); }));
    }
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.9);
  }
}

TEST_CASE("discrete divergence theorem", "[operator][property]") {
  const std::vector<std::pair<DomainSpec, MetricField>> cases = {
      {DomainSpec::interval(-1, 1), MetricField::euclidean()},
      {DomainSpec::rectangle(0, 1, 0, 1), MetricField::euclidean()},
      {DomainSpec::disk(0.6), metrics::poincare_disk()},
      {DomainSpec::annulus(0.3, 1.2), metrics::sphere()}};
  for (const auto& [spec, field] : cases) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      double prev = 0.0;
      for (int n : {32, 64, 128}) {
        const auto g = build_grid(spec, {n, 2 * n}, field);
        const auto s = make_state(g, random_smooth_field(g, 0.5, seed));
        const auto m = mean_curvature_op(s, g);
        double acc = inward_flux_sum(g, s);
        for (int p = 0; p < g.node_count(); ++p) acc += m[p] * g.dV[p];
        const double e = std::abs(acc);
        CHECK(e < 0.1);
        if (prev > 1e-12) CHECK(prev / e > 2.5);
        prev = e;
      }
    }
  }
}

TEST_CASE("closure with flat tangential data", "[closure]") {
  const auto g = interval_grid(40);
  GraphState s;
  s.u = constant_field(g, 0.0);
  const auto data = evaluate_contact_angle(ContactAngleSpec::constant(0.6, 0.9), g, s.u);
  oblique_bc_closure(s, g, data);
  for (const auto& b : g.boundary) CHECK_THAT(normal_derivative(g, s, b), WithinAbs(ov::kPhi06Closure, 1e-15));
  CHECK(bc_residual(g, s, data) < 1e-15);

  const auto data0 = evaluate_contact_angle(ContactAngleSpec::constant(0.0, 0.5), g, s.u);
  oblique_bc_closure(s, g, data0);
  for (const auto& b : g.boundary) CHECK(normal_derivative(g, s, b) == 0.0);
}

TEST_CASE("closure on the grim reaper reproduces -tan 1", "[closure]") {
  const auto g = interval_grid(400);
  GraphState s;
  s.u = sample(g, [](double x, double) { return -std::log(std::cos(x)); });
  const auto data = evaluate_contact_angle(ContactAngleSpec::constant(-ov::kSinOne, 0.9), g, s.u);
  oblique_bc_closure(s, g, data);
  for (const auto& b : g.boundary) CHECK_THAT(normal_derivative(g, s, b), WithinAbs(-ov::kTanOne, 1e-12));
}

TEST_CASE("closure is a fixed point of the boundary condition", "[closure][property]") {
  const std::vector<std::pair<DomainSpec, MetricField>> cases = {
      {DomainSpec::rectangle(-0.4, 0.4, -0.3, 0.3), metrics::poincare_disk()},
      {DomainSpec::annulus(0.3, 1.2), metrics::sphere()},
      {DomainSpec::disk(0.6), metrics::poincare_disk()}};
  ContactAngleSpec trig;
  trig.kind = PhiKind::trig;
  trig.value = -0.3;
  trig.cos_coef = {0.2};
  trig.sin_coef = {0.0, 0.1};
  trig.phi0 = 0.7;
  for (const auto& [spec, field] : cases) {
    const auto g = build_grid(spec, {24, 48}, field);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      GraphState s;
      s.u = random_smooth_field(g, 1.0, seed);
      const auto data = evaluate_contact_angle(trig, g, s.u);
      oblique_bc_closure(s, g, data);
      CHECK(bc_residual(g, s, data) <= 1e-10);
    }
  }
}

TEST_CASE("refreshing a state is idempotent", "[closure][property]") {
  const auto g = build_grid(DomainSpec::rectangle(-0.4, 0.4, -0.3, 0.3), {20, 16}, metrics::poincare_disk());
  GraphState s;
  s.u = random_smooth_field(g, 1.0, 9);
  const auto data = evaluate_contact_angle(ContactAngleSpec::constant(-0.4, 0.5), g, s.u);
  oblique_bc_closure(s, g, data);
  const auto w1 = s.w;
  const auto grad1 = s.grad;
  oblique_bc_closure(s, g, data);
  for (std::size_t p = 0; p < w1.size(); ++p) {
    CHECK(s.w[p] == w1[p]);
    CHECK(s.grad[p] == grad1[p]);
  }
  const auto w2 = compute_w(s, g);
  for (std::size_t p = 0; p < w1.size(); ++p) CHECK_THAT(w2[p], WithinAbs(w1[p], 1e-14));
}

TEST_CASE("spectral bound of the inverse metric", "[operator]") {
  CHECK(aij_spectral_bound(interval_grid(10)) == 1.0);
  const auto gp = build_grid(DomainSpec::rectangle(-0.42, 0.42, -0.42, 0.42), {84, 84}, metrics::poincare_disk());
  CHECK_THAT(aij_spectral_bound(gp), WithinAbs(0.25, 1e-14));
  const auto gs = build_grid(DomainSpec::annulus(0.3, 1.2), {36, 64}, metrics::sphere());
  CHECK_THAT(aij_spectral_bound(gs), WithinRel(ov::kSphereLambda, 1e-12));
}

TEST_CASE("contact angle contract violations", "[closure]") {
  const auto g = interval_grid(10);
  CHECK_THROWS_AS(evaluate_contact_angle(ContactAngleSpec::constant(0.5, 1.0), g, {}), ContractViolation);
  CHECK_THROWS_AS(evaluate_contact_angle(ContactAngleSpec::constant(0.5, 0.4), g, {}), ContractViolation);
  ContactAngleSpec lin;
  lin.kind = PhiKind::affine_u;
  lin.value = 0.1;
  lin.slope_u = 0.5;
  lin.phi0 = 0.6;
  const auto u = constant_field(g, 2.0);
  CHECK_THROWS_AS(evaluate_contact_angle(lin, g, u), ContractViolation);
  CHECK_NOTHROW(evaluate_contact_angle(lin, g, constant_field(g, 0.5)));
}
