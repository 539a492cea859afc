#pragma once

// Prescribed contact-angle data Phi = cos(angle between the graph normal and
// the boundary cylinder normal), evaluated per boundary node.

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mcflab/errors.hpp"
#include "mcflab/grid.hpp"

namespace mcflab {

enum class PhiKind { constant, segments, trig, affine_u };

inline const char* to_string(PhiKind k) {
  switch (k) {
    case PhiKind::constant: return "constant";
    case PhiKind::segments: return "segments";
    case PhiKind::trig: return "trig";
    case PhiKind::affine_u: return "affine_u";
  }
  return "?";
}

/// Catalog expression for Phi(x, u).
///   constant   Phi = value
///   segments   Phi = segment_values[segment]  (corners average their two faces)
///   trig       Phi = value + sum_k cos_coef[k] cos(2 pi (k+1) s) + sin_coef[k] sin(2 pi (k+1) s),
///              s the normalized arclength along the boundary component
///   affine_u   Phi = value + slope_u * u
struct ContactAngleSpec {
  PhiKind kind = PhiKind::constant;
  double value = 0.0;
  std::map<Segment, double> segment_values;
  std::vector<double> cos_coef;
  std::vector<double> sin_coef;
  double slope_u = 0.0;
  double phi0 = 0.0;

  static ContactAngleSpec constant(double v, double bound) {
    ContactAngleSpec s;
    s.value = v;
    s.phi0 = bound;
    return s;
  }
  static ContactAngleSpec segments(std::map<Segment, double> values, double bound) {
    ContactAngleSpec s;
    s.kind = PhiKind::segments;
    s.segment_values = std::move(values);
    s.phi0 = bound;
    return s;
  }

  bool depends_on_u() const noexcept { return kind == PhiKind::affine_u && slope_u != 0.0; }

  double eval(const BoundaryNode& b, double u) const {
    switch (kind) {
      case PhiKind::constant: return value;
      case PhiKind::segments: {
        double acc = 0.0;
        for (int k = 0; k < b.nfacets; ++k) {
          auto it = segment_values.find(b.facets[k].segment);
          acc += it == segment_values.end() ? 0.0 : it->second;
        }
        return acc / b.nfacets;
      }
      case PhiKind::trig: {
        double acc = value;
        const double s = 2.0 * std::numbers::pi * b.arclength;
        for (std::size_t k = 0; k < cos_coef.size(); ++k) acc += cos_coef[k] * std::cos((k + 1.0) * s);
        for (std::size_t k = 0; k < sin_coef.size(); ++k) acc += sin_coef[k] * std::sin((k + 1.0) * s);
        return acc;
      }
      case PhiKind::affine_u: return value + slope_u * u;
    }
    return 0.0;
  }
};

/// Phi evaluated on the boundary nodes of a grid, with the bound Phi0 enforced.
struct ContactAngleData {
  std::vector<double> phi;  // indexed like grid.boundary
  double phi0 = 0.0;
};

/// Evaluates Phi at every boundary node for the nodal heights u.
/// Rejects Phi0 >= 1 and any |Phi| > Phi0.
inline ContactAngleData evaluate_contact_angle(const ContactAngleSpec& spec, const DomainGrid& grid,
                                               std::span<const double> u) {
  if (!(spec.phi0 >= 0.0 && spec.phi0 < 1.0)) {
    std::ostringstream os;
    os << "contact angle bound Phi0 = " << spec.phi0 << " violates |Phi| <= Phi0 < 1";
    throw ContractViolation(os.str());
  }
  ContactAngleData d;
  d.phi0 = spec.phi0;
  d.phi.resize(grid.boundary.size());
  for (std::size_t k = 0; k < grid.boundary.size(); ++k) {
    const auto& b = grid.boundary[k];
    const double v = spec.eval(b, u.empty() ? 0.0 : u[b.node]);
    if (!(std::abs(v) <= spec.phi0 * (1.0 + 1e-14))) {
      std::ostringstream os;
      os << "|Phi| = " << std::abs(v) << " exceeds Phi0 = " << spec.phi0
         << " at boundary node " << b.node << " (contract |Phi| <= Phi0 < 1)";
      throw ContractViolation(os.str());
    }
    d.phi[k] = v;
  }
  return d;
}

}  // namespace mcflab
