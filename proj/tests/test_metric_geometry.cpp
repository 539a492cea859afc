#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mcflab/grid.hpp"
#include "mcflab/metric.hpp"
#include "oracle_values.hpp"

using namespace mcflab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace ov = oracle_values;

namespace {

double outer_length(const DomainGrid& g) {
  double l = 0.0;
  for (const auto& b : g.boundary) {
    if (b.facets[0].segment == Segment::outer) l += b.ds;
  }
  return l;
}

}  // namespace

TEST_CASE("euclidean metric is flat", "[metric]") {
  const auto s = metric_at(MetricField::euclidean(), {0.3, -0.7});
  CHECK(s.g == std::array<double, 4>{1.0, 0.0, 0.0, 1.0});
  CHECK(s.sqrt_det == 1.0);
  CHECK(s.gauss == 0.0);
}

TEST_CASE("poincare disk at the origin", "[metric]") {
  const auto s = metric_at(metrics::poincare_disk(), {0.0, 0.0});
  CHECK_THAT(s.g[0], WithinAbs(4.0, 1e-14));
  CHECK_THAT(s.g[3], WithinAbs(4.0, 1e-14));
  CHECK(s.g[1] == 0.0);
  CHECK_THAT(s.sqrt_det, WithinAbs(4.0, 1e-14));
  CHECK_THAT(s.gauss, WithinAbs(ov::kPoincareCurvature, 1e-14));
}

TEST_CASE("poincare and half-plane curvature is -1 everywhere", "[metric]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.65, 0.65), yv(0.1, 3.0);
  const auto pd = metrics::poincare_disk();
  const auto hp = metrics::hyperbolic_halfplane();
  for (int k = 0; k < 50; ++k) {
    CHECK_THAT(metric_at(pd, {u(rng), u(rng)}).gauss, WithinAbs(-1.0, 1e-12));
    CHECK_THAT(metric_at(hp, {u(rng), yv(rng)}).gauss, WithinAbs(-1.0, 1e-12));
  }
}

TEST_CASE("sphere warp at pi/4", "[metric]") {
  const auto s = metric_at(metrics::sphere(), {std::numbers::pi / 4, 0.0});
  CHECK_THAT(s.g[3], WithinAbs(0.5, 1e-15));
  CHECK_THAT(s.gauss, WithinAbs(1.0, 1e-15));
  CHECK_THAT(metric_at(metrics::hyperbolic_polar(), {0.8, 1.0}).gauss, WithinAbs(-1.0, 1e-15));
}

TEST_CASE("inverse metric times metric is the identity", "[metric]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.6, 0.6), r(0.1, 1.4);
  const std::vector<MetricField> fields{MetricField::euclidean(), metrics::poincare_disk(),
                                        metrics::custom_conformal({0.1, 0.3, -0.2}), metrics::sphere(),
                                        metrics::hyperbolic_polar(), metrics::custom_warp({0.0, 1.0, 0.0, 0.2})};
  for (const auto& f : fields) {
    for (int k = 0; k < 20; ++k) {
      const Point2 x = f.is_conformal() ? Point2{u(rng), u(rng)} : Point2{r(rng), u(rng)};
      const auto s = metric_at(f, x);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const double d = s.ginv[2 * i] * s.g[j] + s.ginv[2 * i + 1] * s.g[2 + j];
          CHECK_THAT(d, WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
        }
      }
      CHECK(s.sqrt_det > 0.0);
      CHECK(s.g[0] > 0.0);
      CHECK(s.g[3] > 0.0);
    }
  }
}

TEST_CASE("curvature matches finite differences of the stored components", "[metric][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5), r(0.3, 1.3);
  const auto cc = metrics::custom_conformal({0.1, 0.4, -0.3});
  const auto cw = metrics::custom_warp({0.0, 1.0, 0.3, -0.1});
  for (int k = 0; k < 20; ++k) {
    const double x = u(rng), y = u(rng);
    auto lam = [&](double a, double b) { return 0.5 * std::log(metric_at(cc, {a, b}).g[0]); };
    auto k_fd = [&](double h) {
      const double lap = (lam(x + h, y) + lam(x - h, y) + lam(x, y + h) + lam(x, y - h) - 4.0 * lam(x, y)) / (h * h);
      return -std::exp(-2.0 * lam(x, y)) * lap;
    };
    const double exact = metric_at(cc, {x, y}).gauss;
    const double e1 = std::abs(k_fd(2e-2) - exact), e2 = std::abs(k_fd(1e-2) - exact);
    CHECK(e2 < 1e-3);
    if (e1 > 1e-9) CHECK(e1 / e2 > 3.0);

    const double rr = r(rng);
    auto f = [&](double a) { return std::sqrt(metric_at(cw, {a, 0.0}).g[3]); };
    auto kw = [&](double h) { return -(f(rr + h) - 2.0 * f(rr) + f(rr - h)) / (h * h) / f(rr); };
    const double exw = metric_at(cw, {rr, 0.0}).gauss;
    const double w1 = std::abs(kw(2e-2) - exw), w2 = std::abs(kw(1e-2) - exw);
    CHECK(w2 < 1e-3);
    if (w1 > 1e-9) CHECK(w1 / w2 > 3.0);
  }
}

TEST_CASE("pole and chart exterior queries are domain errors", "[metric]") {
  CHECK_THROWS_AS(metric_at(metrics::sphere(), {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(metric_at(metrics::sphere(), {3.5, 0.0}), DomainError);
  CHECK_THROWS_AS(metric_at(metrics::poincare_disk(), {0.8, 0.8}), DomainError);
  CHECK_THROWS_AS(metric_at(metrics::hyperbolic_halfplane(), {0.0, -1.0}), DomainError);
}

TEST_CASE("interval grid", "[grid]") {
  const auto g = build_grid(DomainSpec::interval(-1, 1), {200, 0}, MetricField::euclidean());
  CHECK(g.node_count() == 201);
  REQUIRE(g.boundary.size() == 2);
  CHECK(g.boundary[0].node == 0);
  CHECK(g.boundary[0].normal[0] == 1.0);
  CHECK(g.boundary[1].node == 200);
  CHECK(g.boundary[1].normal[0] == -1.0);
  CHECK(g.boundary[0].ds == 1.0);
  CHECK(g.boundary[1].ds == 1.0);
  CHECK_THAT(g.total_volume(), WithinAbs(2.0, 1e-14));
}

TEST_CASE("unit square volume", "[grid]") {
  const auto g = build_grid(DomainSpec::rectangle(0, 1, 0, 1), {64, 64}, MetricField::euclidean());
  CHECK_THAT(g.total_volume(), WithinAbs(1.0, 1e-10));
  CHECK_THAT(g.boundary_length(), WithinAbs(4.0, 1e-12));
  const std::vector<double> one(g.node_count(), 1.0);
  CHECK_THAT(integrate_domain(g, one), WithinAbs(1.0, 1e-10));
}

TEST_CASE("hyperbolic circle length on a poincare annulus", "[grid]") {
  const auto g = build_grid(DomainSpec::annulus(0.05, 0.6), {128, 128}, metrics::poincare_disk());
  CHECK_THAT(outer_length(g), WithinRel(ov::kBallR06Length, 5e-3));
}

TEST_CASE("hyperbolic ball length is exact and area converges at second order", "[grid][property]") {
  double prev_a = 0.0;
  for (int n : {32, 64, 128}) {
    const auto g = build_grid(DomainSpec::disk(0.6), {n, 2 * n}, metrics::poincare_disk());
    const std::vector<double> one(g.node_count(), 1.0);
    const std::vector<double> bone(g.boundary.size(), 1.0);
    const double el = std::abs(integrate_boundary(g, bone) - ov::kBallR06Length);
    const double ea = std::abs(integrate_domain(g, one) - ov::kBallR06Area);
    CHECK(el / ov::kBallR06Length < 1e-12);
    CHECK(ea / ov::kBallR06Area < 5e-3);
    if (prev_a > 0.0) CHECK(prev_a / ea > 3.5);
    prev_a = ea;
  }
}

TEST_CASE("square quadrature converges at second order for a smooth integrand", "[grid][property]") {
  double prev = 0.0;
  const double exact = (std::exp(1.0) - 1.0) * (1.0 - std::cos(1.0));
  for (int n : {16, 32, 64}) {
    const auto g = build_grid(DomainSpec::rectangle(0, 1, 0, 1), {n, n}, MetricField::euclidean());
    std::vector<double> f(g.node_count());
    for (int i = 0; i < g.n1; ++i) {
      for (int j = 0; j < g.n2; ++j) f[g.node(i, j)] = std::exp(g.q1[i]) * std::sin(g.q2[j]);
    }
    const double e = std::abs(integrate_domain(g, f) - exact);
    if (prev > 0.0) CHECK(prev / e > 3.8);
    prev = e;
  }
}

TEST_CASE("boundary normals are metric-unit and point inward", "[grid][property]") {
  std::vector<DomainGrid> grids;
  grids.push_back(build_grid(DomainSpec::rectangle(-0.4, 0.4, -0.3, 0.5), {20, 24}, metrics::poincare_disk()));
  grids.push_back(build_grid(DomainSpec::annulus(0.3, 1.2), {16, 32}, metrics::sphere()));
  grids.push_back(build_grid(DomainSpec::disk(0.6), {16, 32}, metrics::poincare_disk()));
  grids.push_back(build_grid(DomainSpec::interval(-1, 1), {16, 0}, metrics::custom_conformal({0.2, 0.1})));
  for (const auto& g : grids) {
    for (const auto& b : g.boundary) {
      const double n1 = b.normal[0], n2 = b.normal[1];
      const double norm = g.g11[b.node] * n1 * n1 + (g.dim == 2 ? g.g22[b.node] * n2 * n2 : 0.0);
      CHECK_THAT(norm, WithinAbs(1.0, 1e-12));
      const double tau = g.h_min() / 4.0;
      const double q1 = g.q1[b.i] + tau * n1;
      CHECK(q1 >= g.q1.front());
      CHECK(q1 <= g.q1.back());
      if (g.dim == 2 && !g.periodic2) {
        const double q2 = g.q2[b.j] + tau * n2;
        CHECK(q2 >= g.q2.front());
        CHECK(q2 <= g.q2.back());
      }
    }
  }
}

TEST_CASE("grid construction errors", "[grid]") {
  CHECK_THROWS_AS(build_grid(DomainSpec::interval(-1, 1), {4, 0}, MetricField::euclidean()), ConfigError);
  CHECK_THROWS_AS(build_grid(DomainSpec::disk(1.0), {16, 32}, metrics::poincare_disk()), ConfigError);
  CHECK_THROWS_AS(build_grid(DomainSpec::rectangle(0, 1, 0, 1), {16, 16}, metrics::sphere()), ConfigError);
  CHECK_THROWS_AS(build_grid(DomainSpec::annulus(0.5, 3.5), {16, 16}, metrics::sphere()), ConfigError);
  const auto g = build_grid(DomainSpec::interval(0, 1), {8, 0}, MetricField::euclidean());
  CHECK_THROWS_AS(integrate_domain(g, std::vector<double>(3, 1.0)), ContractViolation);
  CHECK_THROWS_AS(integrate_boundary(g, std::vector<double>(3, 1.0)), ContractViolation);
}

TEST_CASE("node ordering is lexicographic and deterministic", "[grid]") {
  const auto a = build_grid(DomainSpec::rectangle(0, 1, 0, 2), {10, 12}, MetricField::euclidean());
  const auto b = build_grid(DomainSpec::rectangle(0, 1, 0, 2), {10, 12}, MetricField::euclidean());
  CHECK(a.node(3, 4) == 3 * a.n2 + 4);
  CHECK(a.dV == b.dV);
  REQUIRE(a.boundary.size() == b.boundary.size());
  for (std::size_t k = 0; k < a.boundary.size(); ++k) CHECK(a.boundary[k].node == b.boundary[k].node);
}
