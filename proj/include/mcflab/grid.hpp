#pragma once

// Structured grids over the supported domains together with metric-weighted
// trapezoid quadrature and boundary data (inward normals, length elements).
//
// Grid coordinates (q1, q2) are Cartesian (x, y) for intervals and rectangles
// and polar (r, theta) for annuli and disks. In every supported case the
// metric is diagonal in grid coordinates, which the stencils rely on.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcflab/errors.hpp"
#include "mcflab/metric.hpp"

namespace mcflab {

enum class DomainKind { interval, rectangle, annulus, disk };
enum class CoordSystem { cartesian, polar };
enum class Segment { left, right, bottom, top, inner, outer };

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::annulus: return "annulus";
    case DomainKind::disk: return "disk";
  }
  return "?";
}

inline const char* to_string(Segment s) {
  switch (s) {
    case Segment::left: return "left";
    case Segment::right: return "right";
    case Segment::bottom: return "bottom";
    case Segment::top: return "top";
    case Segment::inner: return "inner";
    case Segment::outer: return "outer";
  }
  return "?";
}

/// Geometry of Omega in grid coordinates.
///   interval   [lo[0], hi[0]]
///   rectangle  [lo[0], hi[0]] x [lo[1], hi[1]]
///   annulus    r in [lo[0], hi[0]], full turn in theta
///   disk       r < hi[0]; the cap r < r_min is lumped into the innermost ring
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  std::array<double, 2> lo{-1.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::optional<double> r_min;

  static DomainSpec interval(double a, double b) { return {DomainKind::interval, {a, 0.0}, {b, 0.0}, {}}; }
  static DomainSpec rectangle(double x0, double x1, double y0, double y1) {
    return {DomainKind::rectangle, {x0, y0}, {x1, y1}, {}};
  }
  static DomainSpec annulus(double r_in, double r_out) {
    return {DomainKind::annulus, {r_in, 0.0}, {r_out, 2.0 * std::numbers::pi}, {}};
  }
  static DomainSpec disk(double r_out, std::optional<double> r_min = {}) {
    return {DomainKind::disk, {0.0, 0.0}, {r_out, 2.0 * std::numbers::pi}, r_min};
  }
};

/// Cells along axis 1 and along axis 2 (for polar grids n2 is the number of
/// angular nodes, the axis being periodic). n2 is ignored for intervals.
struct Resolution {
  int n1 = 0;
  int n2 = 0;
};

/// One boundary face contribution of a boundary node; corners carry two.
struct Facet {
  int dir = 0;       // 0: axis 1, 1: axis 2
  int side = 0;      // 0: low end of the axis, 1: high end
  Segment segment = Segment::left;
  double ds = 0.0;   // metric length element owned by this facet
};

struct BoundaryNode {
  int node = 0;
  int i = 0;
  int j = 0;
  std::array<Facet, 2> facets{};
  int nfacets = 1;
  Point2 normal{};       // inward, unit in sigma, grid-coordinate components
  double ds = 0.0;       // total length weight (1 per endpoint in 1D)
  double arclength = 0;  // normalized position along its boundary component, in [0, 1)
  bool corner() const noexcept { return nfacets == 2; }
};

/// Diagonal metric in grid coordinates.
struct CoordMetric {
  double g11 = 1.0;
  double g22 = 1.0;
  double sqrt_g = 1.0;
};

inline CoordMetric coord_metric(const MetricField& field, CoordSystem cs, int dim, double q1,
                                double q2) {
  if (dim == 1) {
    const double l = field.conformal_exponent(q1, 0.0);
    return {std::exp(2.0 * l), 1.0, std::exp(l)};
  }
  if (cs == CoordSystem::cartesian) {
    const double e = std::exp(2.0 * field.conformal_exponent(q1, q2));
    return {e, e, e};
  }
  if (field.is_conformal()) {
    if (!(q1 > 0.0)) throw DomainError("polar query at r <= 0 (pole excluded)");
    const double e = std::exp(2.0 * field.conformal_exponent(q1 * std::cos(q2), q1 * std::sin(q2)));
    return {e, e * q1 * q1, e * q1};
  }
  const double f = field.warp_value(q1);
  return {1.0, f * f, f};
}

class DomainGrid {
 public:
  int dim = 1;
  DomainKind kind = DomainKind::interval;
  CoordSystem coords = CoordSystem::cartesian;
  bool periodic2 = false;
  int n1 = 0;  // nodes along axis 1
  int n2 = 1;  // nodes along axis 2
  double h1 = 0.0;
  double h2 = 1.0;
  std::vector<double> q1;
  std::vector<double> q2;

  // Per node, index i * n2 + j.
  std::vector<double> g11, g22, sqrt_g, dV;

  // Axis-1 faces: index k * n2 + j, k = 0..n1, face k lies between nodes k-1 and k.
  std::vector<double> f1_a, f1_ginv1, f1_ginv2;
  // Axis-2 faces: index i * nf2 + k, face k lies between nodes k-1 and k (wrapped if periodic).
  int nf2 = 0;
  std::vector<double> f2_a, f2_ginv1, f2_ginv2;

  // Disk only: ring-0 cell volume per unit angle, and the radial extent of that cell.
  std::vector<double> cap_volume;
  double cap_extent = 0.0;

  std::vector<BoundaryNode> boundary;
  std::vector<int> boundary_index;  // node -> index into boundary or -1

  int node_count() const noexcept { return n1 * n2; }
  int node(int i, int j) const noexcept { return i * n2 + j; }
  bool is_disk() const noexcept { return kind == DomainKind::disk; }
  double h_min() const noexcept { return dim == 1 ? h1 : std::min(h1, h2); }

  int wrap2(int j) const noexcept { return ((j % n2) + n2) % n2; }

  /// Extended (ghosted) layout: one ghost layer per non-periodic axis.
  int ext_n2() const noexcept { return dim == 1 ? 1 : (periodic2 ? n2 : n2 + 2); }
  int ext_size() const noexcept { return (n1 + 2) * ext_n2(); }
  int ext(int i, int j) const noexcept {
    const int jj = dim == 1 ? 0 : (periodic2 ? wrap2(j) : j + 1);
    return (i + 1) * ext_n2() + jj;
  }

  /// Grid point in the native chart of the metric (for metric_at / curvature).
  Point2 chart_point(const MetricField& field, int i, int j) const {
    if (coords == CoordSystem::polar && field.is_conformal()) {
      return {q1[i] * std::cos(q2[j]), q1[i] * std::sin(q2[j])};
    }
    return {q1[i], dim == 1 ? 0.0 : q2[j]};
  }

  double total_volume() const {
    double v = 0.0;
    for (double w : dV) v += w;
    return v;
  }

  double boundary_length() const {
    double l = 0.0;
    for (const auto& b : boundary) l += b.ds;
    return l;
  }
};

namespace detail {

inline double gauss_legendre(auto&& fn, double a, double b, int panels) {
  static constexpr double x4[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                   0.8611363115940526};
  static constexpr double w4[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                   0.3478548451374538};
  const double step = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double m = a + (p + 0.5) * step;
    for (int k = 0; k < 4; ++k) acc += w4[k] * fn(m + 0.5 * step * x4[k]);
  }
  return 0.5 * step * acc;
}

}  // namespace detail

/// Builds the grid, face coefficients, quadrature weights and boundary data.
inline DomainGrid build_grid(const DomainSpec& spec, Resolution res, const MetricField& field) {
  DomainGrid g;
  g.kind = spec.kind;
  const bool polar = spec.kind == DomainKind::annulus || spec.kind == DomainKind::disk;
  g.dim = spec.kind == DomainKind::interval ? 1 : 2;
  g.coords = polar ? CoordSystem::polar : CoordSystem::cartesian;
  g.periodic2 = polar;

  if (res.n1 < 8 || (g.dim == 2 && res.n2 < 8)) {
    throw ConfigError("resolution must be at least 8 cells per axis");
  }
  if (!polar && !field.is_conformal()) {
    throw ConfigError(std::string("metric '") + field.name() +
                      "' is rotationally symmetric and needs a polar domain (annulus or disk)");
  }

  double r_lo = spec.lo[0];
  const double r_hi = spec.hi[0];
  if (spec.kind == DomainKind::disk) {
    if (!(r_hi > 0.0)) throw ConfigError("disk radius must be positive");
    if (spec.r_min) {
      r_lo = *spec.r_min;
      if (!(r_lo > 0.0 && r_lo < r_hi)) throw ConfigError("disk r_min must lie in (0, radius)");
    } else {
      r_lo = 2.0 * r_hi / (res.n1 + 2);  // r_min = 2h with h = (R - r_min) / n1
    }
  }
  if (!(r_hi > r_lo)) throw ConfigError("domain upper bound must exceed lower bound on axis 1");
  if (spec.kind == DomainKind::annulus && !(r_lo > 0.0)) {
    throw ConfigError("annulus inner radius must be positive");
  }
  if (spec.kind == DomainKind::rectangle && !(spec.hi[1] > spec.lo[1])) {
    throw ConfigError("rectangle upper bound must exceed lower bound on axis 2");
  }

  g.n1 = res.n1 + 1;
  g.h1 = (r_hi - r_lo) / res.n1;
  g.q1.resize(g.n1);
  for (int i = 0; i < g.n1; ++i) g.q1[i] = r_lo + i * g.h1;
  g.q1.back() = r_hi;

  if (g.dim == 1) {
    g.n2 = 1;
    g.h2 = 1.0;
    g.q2 = {0.0};
  } else if (polar) {
    g.n2 = res.n2;
    g.h2 = 2.0 * std::numbers::pi / res.n2;
    g.q2.resize(g.n2);
    for (int j = 0; j < g.n2; ++j) g.q2[j] = j * g.h2;
  } else {
    g.n2 = res.n2 + 1;
    g.h2 = (spec.hi[1] - spec.lo[1]) / res.n2;
    g.q2.resize(g.n2);
    for (int j = 0; j < g.n2; ++j) g.q2[j] = spec.lo[1] + j * g.h2;
    g.q2.back() = spec.hi[1];
  }

  auto cm = [&](double a, double b) { return coord_metric(field, g.coords, g.dim, a, b); };

  try {
    const int nn = g.node_count();
    g.g11.resize(nn);
    g.g22.resize(nn);
    g.sqrt_g.resize(nn);
    g.dV.resize(nn);
    for (int i = 0; i < g.n1; ++i) {
      for (int j = 0; j < g.n2; ++j) {
        const auto m = cm(g.q1[i], g.q2[j]);
        const int p = g.node(i, j);
        g.g11[p] = m.g11;
        g.g22[p] = m.g22;
        g.sqrt_g[p] = m.sqrt_g;
      }
    }

    // Axis-1 faces, including the two ghost faces just outside Omega.
    g.f1_a.resize(static_cast<std::size_t>(g.n1 + 1) * g.n2);
    g.f1_ginv1.resize(g.f1_a.size());
    g.f1_ginv2.resize(g.f1_a.size());
    for (int k = 0; k <= g.n1; ++k) {
      const double qf = r_lo + (k - 0.5) * g.h1;
      if (g.is_disk() && k == 0) continue;  // zero-flux pole cell
      for (int j = 0; j < g.n2; ++j) {
        const auto m = cm(qf, g.q2[j]);
        const int f = k * g.n2 + j;
        g.f1_a[f] = m.sqrt_g / m.g11;
        g.f1_ginv1[f] = 1.0 / m.g11;
        g.f1_ginv2[f] = 1.0 / m.g22;
      }
    }

    if (g.dim == 2) {
      g.nf2 = g.periodic2 ? g.n2 : g.n2 + 1;
      g.f2_a.resize(static_cast<std::size_t>(g.n1) * g.nf2);
      g.f2_ginv1.resize(g.f2_a.size());
      g.f2_ginv2.resize(g.f2_a.size());
      for (int i = 0; i < g.n1; ++i) {
        for (int k = 0; k < g.nf2; ++k) {
          const double qf = g.q2[0] + (k - 0.5) * g.h2;
          const auto m = cm(g.q1[i], qf);
          const int f = i * g.nf2 + k;
          g.f2_a[f] = m.sqrt_g / m.g22;
          g.f2_ginv1[f] = 1.0 / m.g11;
          g.f2_ginv2[f] = 1.0 / m.g22;
        }
      }
    }

    if (g.is_disk()) {
      g.cap_extent = r_lo + 0.5 * g.h1;
      g.cap_volume.resize(g.n2);
      for (int j = 0; j < g.n2; ++j) {
        g.cap_volume[j] = detail::gauss_legendre(
            [&](double r) { return cm(r, g.q2[j]).sqrt_g; }, 0.0, g.cap_extent, 8);
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("domain touches chart singularity: ") + e.what());
  }

  // Trapezoid weights per axis.
  std::vector<double> w1(g.n1, g.h1), w2(g.n2, g.dim == 1 ? 1.0 : g.h2);
  w1.front() *= 0.5;
  w1.back() *= 0.5;
  if (g.dim == 2 && !g.periodic2) {
    w2.front() *= 0.5;
    w2.back() *= 0.5;
  }
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const int p = g.node(i, j);
      g.dV[p] = g.sqrt_g[p] * w1[i] * w2[j];
      if (g.is_disk() && i == 0) g.dV[p] = g.cap_volume[j] * w2[j];
    }
  }

  // Boundary nodes.
  g.boundary_index.assign(g.node_count(), -1);
  auto add_facet = [&](int i, int j, int dir, int side, Segment seg, double ds) {
    const int p = g.node(i, j);
    int& bi = g.boundary_index[p];
    if (bi < 0) {
      bi = static_cast<int>(g.boundary.size());
      BoundaryNode b;
      b.node = p;
      b.i = i;
      b.j = j;
      b.nfacets = 0;
      g.boundary.push_back(b);
    }
    auto& b = g.boundary[bi];
    b.facets[b.nfacets++] = Facet{dir, side, seg, ds};
  };

  if (g.dim == 1) {
    add_facet(0, 0, 0, 0, Segment::left, 1.0);
    add_facet(g.n1 - 1, 0, 0, 1, Segment::right, 1.0);
  } else if (!polar) {
    // Counter-clockwise from (x_lo, y_lo): bottom, right, top, left.
    for (int i = 0; i < g.n1; ++i) {
      add_facet(i, 0, 1, 0, Segment::bottom, std::sqrt(g.g11[g.node(i, 0)]) * w1[i]);
    }
    for (int j = 0; j < g.n2; ++j) {
      add_facet(g.n1 - 1, j, 0, 1, Segment::right,
                std::sqrt(g.g22[g.node(g.n1 - 1, j)]) * w2[j]);
    }
    for (int i = g.n1 - 1; i >= 0; --i) {
      add_facet(i, g.n2 - 1, 1, 1, Segment::top,
                std::sqrt(g.g11[g.node(i, g.n2 - 1)]) * w1[i]);
    }
    for (int j = g.n2 - 1; j >= 0; --j) {
      add_facet(0, j, 0, 0, Segment::left, std::sqrt(g.g22[g.node(0, j)]) * w2[j]);
    }
  } else {
    if (spec.kind == DomainKind::annulus) {
      for (int j = 0; j < g.n2; ++j) {
        add_facet(0, j, 0, 0, Segment::inner, std::sqrt(g.g22[g.node(0, j)]) * g.h2);
      }
    }
    for (int j = 0; j < g.n2; ++j) {
      add_facet(g.n1 - 1, j, 0, 1, Segment::outer,
                std::sqrt(g.g22[g.node(g.n1 - 1, j)]) * g.h2);
    }
  }

  // Normals, total weights and normalized arclength per boundary component.
  double len_outer = 0.0, len_inner = 0.0;
  for (auto& b : g.boundary) {
    const int p = b.node;
    Point2 n{0.0, 0.0};
    b.ds = 0.0;
    for (int k = 0; k < b.nfacets; ++k) {
      const auto& f = b.facets[k];
      const double gdd = f.dir == 0 ? g.g11[p] : g.g22[p];
      n[f.dir] += (f.side == 0 ? 1.0 : -1.0) / std::sqrt(gdd);
      b.ds += f.ds;
    }
    if (b.nfacets == 2) {
      n[0] /= std::sqrt(2.0);
      n[1] /= std::sqrt(2.0);
    }
    b.normal = n;
    if (b.facets[0].segment == Segment::inner) len_inner += b.ds; else len_outer += b.ds;
  }
  if (g.dim == 1) {
    g.boundary[0].arclength = 0.0;
    g.boundary[1].arclength = 0.5;
  } else if (polar) {
    for (auto& b : g.boundary) b.arclength = g.q2[b.j] / (2.0 * std::numbers::pi);
  } else {
    double acc = 0.0;
    for (auto& b : g.boundary) {
      b.arclength = acc / len_outer;
      acc += b.ds;
    }
  }
  (void)len_inner;
  return g;
}

/// Sum of phi * dV over the nodes.
inline double integrate_domain(const DomainGrid& grid, std::span<const double> phi) {
  if (phi.size() != static_cast<std::size_t>(grid.node_count())) {
    throw ContractViolation("integrate_domain: field size does not match the grid");
  }
  double acc = 0.0;
  for (std::size_t p = 0; p < phi.size(); ++p) acc += phi[p] * grid.dV[p];
  return acc;
}

/// Sum of phi * ds over the boundary nodes; phi is indexed like grid.boundary.
inline double integrate_boundary(const DomainGrid& grid, std::span<const double> phi) {
  if (phi.size() != grid.boundary.size()) {
    throw ContractViolation("integrate_boundary: field size does not match the boundary");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) acc += phi[k] * grid.boundary[k].ds;
  return acc;
}

/// dV-weighted mean of a nodal field.
inline double weighted_mean(const DomainGrid& grid, std::span<const double> phi) {
  return integrate_domain(grid, phi) / grid.total_volume();
}

}  // namespace mcflab
