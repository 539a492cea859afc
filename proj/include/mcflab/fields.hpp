#pragma once

// Initial height fields on a grid.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mcflab/grid.hpp"

namespace mcflab {

/// Chart-Cartesian position of a node: (x, y) for Cartesian grids and
/// (r cos theta, r sin theta) for polar grids.
inline Point2 cartesian_position(const DomainGrid& g, int i, int j) {
  if (g.coords == CoordSystem::polar) return {g.q1[i] * std::cos(g.q2[j]), g.q1[i] * std::sin(g.q2[j])};
  return {g.q1[i], g.dim == 1 ? 0.0 : g.q2[j]};
}

inline std::vector<double> constant_field(const DomainGrid& g, double c) {
  return std::vector<double>(g.node_count(), c);
}

/// u = c0 + c1 x + c2 y in chart-Cartesian coordinates.
inline std::vector<double> affine_field(const DomainGrid& g, double c0, double c1, double c2) {
  std::vector<double> u(g.node_count());
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const auto x = cartesian_position(g, i, j);
      u[g.node(i, j)] = c0 + c1 * x[0] + c2 * x[1];
    }
  }
  return u;
}

/// amplitude * prod over axes of cos(pi s) with s in [0, 1] the normalized
/// axis coordinate; its normal derivative vanishes on Cartesian boundaries.
/// On polar grids only the radial factor is used.
inline std::vector<double> bump_field(const DomainGrid& g, double amplitude) {
  std::vector<double> u(g.node_count());
  const double l1 = g.q1.back() - g.q1.front();
  const double l2 = g.dim == 2 ? g.q2.back() - g.q2.front() : 1.0;
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      double v = std::cos(std::numbers::pi * (g.q1[i] - g.q1.front()) / l1);
      if (g.dim == 2 && g.coords == CoordSystem::cartesian) {
        v *= std::cos(std::numbers::pi * (g.q2[j] - g.q2.front()) / l2);
      }
      u[g.node(i, j)] = amplitude * v;
    }
  }
  return u;
}

/// amplitude * prod over Cartesian axes of (1 - s^2)^4 with s in [-1, 1];
/// first to third normal derivatives vanish on the boundary, so adding it to
/// data that satisfies the contact-angle condition keeps the data compatible.
/// On polar grids s runs over the radial axis only (annuli: both ends).
inline std::vector<double> compatible_bump(const DomainGrid& g, double amplitude) {
  std::vector<double> u(g.node_count());
  auto factor = [](double q, double lo, double hi) {
    const double s = 2.0 * (q - lo) / (hi - lo) - 1.0;
    const double b = 1.0 - s * s;
    return b * b * b * b;
  };
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      double v = 1.0;
      if (g.is_disk()) {
        const double r = g.q1[i] / g.q1.back();
        const double b = 1.0 - r * r;
        v = b * b * b * b;
      } else {
        v = factor(g.q1[i], g.q1.front(), g.q1.back());
        if (g.dim == 2 && g.coords == CoordSystem::cartesian) v *= factor(g.q2[j], g.q2.front(), g.q2.back());
      }
      u[g.node(i, j)] = amplitude * v;
    }
  }
  return u;
}

/// Seeded sum of low-frequency modes with unit-scale amplitude.
inline std::vector<double> random_smooth_field(const DomainGrid& g, double amplitude, std::uint64_t seed,
                                               int modes = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> a(modes), b(modes), c(modes);
  for (int k = 0; k < modes; ++k) {
    a[k] = coef(rng);
    b[k] = coef(rng);
    c[k] = coef(rng);
  }
  std::vector<double> u(g.node_count());
  const double l1 = g.q1.back() - g.q1.front();
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const double s = (g.q1[i] - g.q1.front()) / l1;
      double v = 0.0;
      for (int k = 0; k < modes; ++k) {
        v += a[k] * std::cos(std::numbers::pi * (k + 1) * s) / (k + 1);
        if (g.dim == 2) {
          const double t = g.coords == CoordSystem::polar
                               ? g.q2[j]
                               : std::numbers::pi * (g.q2[j] - g.q2.front()) / (g.q2.back() - g.q2.front());
          v += (b[k] * std::cos((k + 1) * t) + c[k] * std::sin((k + 1) * t)) * s / (k + 1);
        }
      }
      u[g.node(i, j)] = amplitude * v;
    }
  }
  return u;
}

}  // namespace mcflab
