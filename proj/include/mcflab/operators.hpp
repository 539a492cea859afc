#pragma once

// Discrete operators of the graph flow: metric gradient, tilt factor w,
// the conservative mean-curvature operator div(grad u / w) and the
// contact-angle closure that fills one ghost layer around the grid.
//
// Face fluxes F = sqrt(g) g^{dd} d_d u / W are differenced conservatively;
// W on a face uses the compact normal difference and the average of the two
// adjacent nodal tangential differences. The same templated face/node
// routines serve the double path (flow, residuals) and the dual-number path
// (exact Newton Jacobians).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mcflab/contact_angle.hpp"
#include "mcflab/dual.hpp"
#include "mcflab/grid.hpp"

namespace mcflab {

/// ghost value = sum coef * u[node] + constant
struct AffineTerm {
  int node;
  double coef;
};

struct GhostRule {
  int slot = 0;  // index into the extended array
  std::vector<AffineTerm> terms;
  double constant = 0.0;
};

struct GhostLayer {
  std::vector<GhostRule> rules;
  std::vector<int> rule_of_slot;  // slot -> rule index, -1 for interior slots
};

struct GraphState {
  std::vector<double> u;
  double t = 0.0;
  std::vector<double> ext;    // ghosted copy of u
  std::vector<Point2> grad;   // centered grid-coordinate gradient per node
  std::vector<double> w;      // sqrt(1 + |grad u|^2_sigma) per node
};

namespace detail {

inline int step_node(const DomainGrid& g, int i, int j, int dir, int side, int k) {
  // k steps inward from a boundary node along axis `dir`
  const int s = side == 0 ? k : -k;
  return dir == 0 ? g.node(i + s, j) : g.node(i, j + s);
}

inline int ghost_slot(const DomainGrid& g, int i, int j, int dir, int side) {
  const int s = side == 0 ? -1 : 1;
  return dir == 0 ? g.ext(i + s, j) : g.ext(i, j + s);
}

/// Inward normal derivative target for the closure at a corner node.
/// Returns (a, b): unit-normal derivatives along the axis-1 and axis-2 facets.
inline std::pair<double, double> corner_targets(const DomainGrid& g, const BoundaryNode& b,
                                                std::span<const double> u, double phi) {
  double one_sided[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    const auto& f = b.facets[k];
    const double h = f.dir == 0 ? g.h1 : g.h2;
    const double gdd = f.dir == 0 ? g.g11[b.node] : g.g22[b.node];
    const double du = (-3.0 * u[b.node] + 4.0 * u[step_node(g, b.i, b.j, f.dir, f.side, 1)] -
                       u[step_node(g, b.i, b.j, f.dir, f.side, 2)]) /
                      (2.0 * h);
    one_sided[f.dir] = du / std::sqrt(gdd);
  }
  // Bisector gamma_c = (gx + gy)/sqrt2, tangent tau = (gx - gy)/sqrt2.
  const double dtau = (one_sided[0] - one_sided[1]) / std::sqrt(2.0);
  const double c = phi * std::sqrt((1.0 + dtau * dtau) / (1.0 - phi * phi));
  return {(c + dtau) / std::sqrt(2.0), (c - dtau) / std::sqrt(2.0)};
}

}  // namespace detail

/// Builds the ghost layer. Without contact-angle data ghosts are cubic
/// extrapolations along the inward normal (one-sided differences); with data
/// they realize grad_gamma u = Phi w through the closed form
/// grad_gamma u = Phi sqrt((1 + |grad^T u|^2) / (1 - Phi^2)), with the
/// tangential part taken from the current nodal values.
inline GhostLayer build_ghosts(const DomainGrid& g, std::span<const double> u,
                               const ContactAngleData* phi) {
  GhostLayer layer;
  layer.rule_of_slot.assign(g.ext_size(), -1);
  auto add = [&](GhostRule r) {
    layer.rule_of_slot[r.slot] = static_cast<int>(layer.rules.size());
    layer.rules.push_back(std::move(r));
  };

  for (std::size_t bk = 0; bk < g.boundary.size(); ++bk) {
    const auto& b = g.boundary[bk];
    std::pair<double, double> corner{0.0, 0.0};
    if (phi && b.corner()) corner = detail::corner_targets(g, b, u, phi->phi[bk]);
    for (int k = 0; k < b.nfacets; ++k) {
      const auto& f = b.facets[k];
      GhostRule r;
      r.slot = detail::ghost_slot(g, b.i, b.j, f.dir, f.side);
      if (!phi) {
        static constexpr double c[4] = {4.0, -6.0, 4.0, -1.0};
        for (int s = 0; s < 4; ++s) r.terms.push_back({detail::step_node(g, b.i, b.j, f.dir, f.side, s), c[s]});
      } else {
        const double h = f.dir == 0 ? g.h1 : g.h2;
        const double gdd = f.dir == 0 ? g.g11[b.node] : g.g22[b.node];
        double target = 0.0;
        if (b.corner()) {
          target = f.dir == 0 ? corner.first : corner.second;
        } else {
          double t2 = 0.0;
          if (g.dim == 2) {
            if (f.dir == 0) {
              const double d = (u[g.node(b.i, g.wrap2(b.j + 1))] - u[g.node(b.i, g.wrap2(b.j - 1))]) /
                               (2.0 * g.h2);
              t2 = d * d / g.g22[b.node];
            } else {
              const double d = (u[g.node(b.i + 1, b.j)] - u[g.node(b.i - 1, b.j)]) / (2.0 * g.h1);
              t2 = d * d / g.g11[b.node];
            }
          }
          const double p = phi->phi[bk];
          target = p * std::sqrt((1.0 + t2) / (1.0 - p * p));
        }
        r.terms.push_back({detail::step_node(g, b.i, b.j, f.dir, f.side, 1), 1.0});
        r.constant = -2.0 * h * std::sqrt(gdd) * target;
      }
      add(std::move(r));
    }
  }

  if (g.is_disk()) {
    // Innermost ring: quadratic extrapolation feeds the nodal gradient only;
    // the face toward the pole carries zero flux.
    for (int j = 0; j < g.n2; ++j) {
      GhostRule r;
      r.slot = g.ext(-1, j);
      r.terms = {{g.node(0, j), 3.0}, {g.node(1, j), -3.0}, {g.node(2, j), 1.0}};
      add(std::move(r));
    }
  }

  if (g.dim == 2 && !g.periodic2) {
    // Double ghosts: cubic extrapolation of the ghost column along axis 2.
    static constexpr double c[4] = {4.0, -6.0, 4.0, -1.0};
    for (int ci : {-1, g.n1}) {
      for (int side = 0; side < 2; ++side) {
        GhostRule r;
        r.slot = g.ext(ci, side == 0 ? -1 : g.n2);
        for (int s = 0; s < 4; ++s) {
          const int jj = side == 0 ? s : g.n2 - 1 - s;
          const auto& src = layer.rules[layer.rule_of_slot[g.ext(ci, jj)]];
          for (const auto& t : src.terms) r.terms.push_back({t.node, c[s] * t.coef});
          r.constant += c[s] * src.constant;
        }
        add(std::move(r));
      }
    }
  }
  return layer;
}

/// Copies u into the extended array and evaluates every ghost rule.
inline void apply_ghosts(const DomainGrid& g, const GhostLayer& layer, std::span<const double> u,
                         std::vector<double>& ext) {
  ext.assign(g.ext_size(), 0.0);
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) ext[g.ext(i, j)] = u[g.node(i, j)];
  }
  for (const auto& r : layer.rules) {
    double v = r.constant;
    for (const auto& t : r.terms) v += t.coef * u[t.node];
    ext[r.slot] = v;
  }
}

// ---------------------------------------------------------------------------
// Templated stencil pieces. `at(i, j)` returns the (extended) value at grid
// position (i, j); i in [-1, n1], j in [-1, n2].

template <class T, class Acc>
inline T face_flux1(const DomainGrid& g, int k, int j, Acc&& at, bool freeze_w = false) {
  using std::sqrt;
  const int f = k * g.n2 + j;
  const T delta = (at(k, j) - at(k - 1, j)) / g.h1;
  T q = 1.0 + g.f1_ginv1[f] * delta * delta;
  if (g.dim == 2) {
    const T tau = (0.25 / g.h2) * ((at(k - 1, j + 1) - at(k - 1, j - 1)) + (at(k, j + 1) - at(k, j - 1)));
    q = q + g.f1_ginv2[f] * tau * tau;
  }
  T wf = sqrt(q);
  if (freeze_w) wf = detach(wf);
  return g.f1_a[f] * delta / wf;
}

template <class T, class Acc>
inline T face_flux2(const DomainGrid& g, int i, int k, Acc&& at, bool freeze_w = false) {
  using std::sqrt;
  const int f = i * g.nf2 + (g.periodic2 ? g.wrap2(k) : k);
  const T delta = (at(i, k) - at(i, k - 1)) / g.h2;
  const T tau = (0.25 / g.h1) * ((at(i + 1, k - 1) - at(i - 1, k - 1)) + (at(i + 1, k) - at(i - 1, k)));
  const T q = 1.0 + g.f2_ginv2[f] * delta * delta + g.f2_ginv1[f] * tau * tau;
  T wf = sqrt(q);
  if (freeze_w) wf = detach(wf);
  return g.f2_a[f] * delta / wf;
}

/// Conservative divergence at node (i, j) from its four face fluxes.
template <class T>
inline T node_divergence(const DomainGrid& g, int i, int j, const T& f1m, const T& f1p,
                         const T& f2m, const T& f2p) {
  if (g.is_disk() && i == 0) {
    T num = f1p * g.h2;
    if (g.dim == 2) num = num + (f2p - f2m) * g.cap_extent;
    return num / (g.cap_volume[j] * g.h2);
  }
  T m = (f1p - f1m) / g.h1;
  if (g.dim == 2) m = m + (f2p - f2m) / g.h2;
  return m / g.sqrt_g[g.node(i, j)];
}

template <class T, class Acc>
inline T nodal_w(const DomainGrid& g, int i, int j, Acc&& at) {
  using std::sqrt;
  const int p = g.node(i, j);
  const T d1 = (at(i + 1, j) - at(i - 1, j)) / (2.0 * g.h1);
  T q = 1.0 + d1 * d1 / g.g11[p];
  if (g.dim == 2) {
    const T d2 = (at(i, j + 1) - at(i, j - 1)) / (2.0 * g.h2);
    q = q + d2 * d2 / g.g22[p];
  }
  return sqrt(q);
}

/// M[u] at one node using the templated stencil (all four faces recomputed).
template <class T, class Acc>
inline T node_mean_curvature(const DomainGrid& g, int i, int j, Acc&& at, bool freeze_w = false) {
  const T zero(0.0);
  const T f1m = (g.is_disk() && i == 0) ? zero : face_flux1<T>(g, i, j, at, freeze_w);
  const T f1p = face_flux1<T>(g, i + 1, j, at, freeze_w);
  T f2m = zero, f2p = zero;
  if (g.dim == 2) {
    f2m = face_flux2<T>(g, i, j, at, freeze_w);
    f2p = face_flux2<T>(g, i, j + 1, at, freeze_w);
  }
  return node_divergence(g, i, j, f1m, f1p, f2m, f2p);
}

// ---------------------------------------------------------------------------
// Double-precision field evaluation.

/// Evaluates M[u] and nodal w on all nodes from a ghosted array.
/// Face fluxes are computed once and shared by their two nodes.
struct OperatorWorkspace {
  std::vector<double> f1, f2;
};

inline void evaluate_operator(const DomainGrid& g, std::span<const double> ext, std::span<double> m,
                              std::span<double> w, OperatorWorkspace& ws) {
  auto at = [&](int i, int j) { return ext[g.ext(i, j)]; };
  ws.f1.resize(static_cast<std::size_t>(g.n1 + 1) * g.n2);
  for (int k = 0; k <= g.n1; ++k) {
    for (int j = 0; j < g.n2; ++j) {
      ws.f1[k * g.n2 + j] = (g.is_disk() && k == 0) ? 0.0 : face_flux1<double>(g, k, j, at);
    }
  }
  if (g.dim == 2) {
    ws.f2.resize(static_cast<std::size_t>(g.n1) * g.nf2);
    for (int i = 0; i < g.n1; ++i) {
      for (int k = 0; k < g.nf2; ++k) ws.f2[i * g.nf2 + k] = face_flux2<double>(g, i, k, at);
    }
  }
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const int p = g.node(i, j);
      double f2m = 0.0, f2p = 0.0;
      if (g.dim == 2) {
        f2m = ws.f2[i * g.nf2 + j];
        f2p = ws.f2[i * g.nf2 + (g.periodic2 ? (j + 1) % g.n2 : j + 1)];
      }
      m[p] = node_divergence(g, i, j, ws.f1[i * g.n2 + j], ws.f1[(i + 1) * g.n2 + j], f2m, f2p);
      w[p] = nodal_w<double>(g, i, j, at);
    }
  }
}

/// Recomputes ghosted array, gradient and w caches of a state.
inline void refresh_state(GraphState& s, const DomainGrid& g, const GhostLayer& layer) {
  apply_ghosts(g, layer, s.u, s.ext);
  s.grad.resize(g.node_count());
  s.w.resize(g.node_count());
  auto at = [&](int i, int j) { return s.ext[g.ext(i, j)]; };
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const int p = g.node(i, j);
      s.grad[p][0] = (at(i + 1, j) - at(i - 1, j)) / (2.0 * g.h1);
      s.grad[p][1] = g.dim == 2 ? (at(i, j + 1) - at(i, j - 1)) / (2.0 * g.h2) : 0.0;
      s.w[p] = nodal_w<double>(g, i, j, at);
    }
  }
}

/// State with ghosts from one-sided (extrapolated) differences.
inline GraphState make_state(const DomainGrid& g, std::vector<double> u, double t = 0.0) {
  GraphState s;
  s.u = std::move(u);
  s.t = t;
  refresh_state(s, g, build_ghosts(g, s.u, nullptr));
  return s;
}

/// w = sqrt(1 + sigma^{jk} d_j u d_k u) at every node, from the state's ghost layer.
inline std::vector<double> compute_w(const GraphState& s, const DomainGrid& g) {
  std::vector<double> w(g.node_count());
  auto at = [&](int i, int j) { return s.ext[g.ext(i, j)]; };
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) w[g.node(i, j)] = nodal_w<double>(g, i, j, at);
  }
  return w;
}

/// M[u] = (1/sqrt g) d_j (sqrt g sigma^{jk} d_k u / w) at every node.
inline std::vector<double> mean_curvature_op(const GraphState& s, const DomainGrid& g) {
  std::vector<double> m(g.node_count()), w(g.node_count());
  OperatorWorkspace ws;
  evaluate_operator(g, s.ext, m, w, ws);
  return m;
}

/// Applies the contact-angle closure to the ghost layer and refreshes caches.
inline void oblique_bc_closure(GraphState& s, const DomainGrid& g, const ContactAngleData& phi) {
  refresh_state(s, g, build_ghosts(g, s.u, &phi));
}

/// Inward unit-normal derivative of u along one facet of a boundary node.
inline double facet_normal_derivative(const DomainGrid& g, const GraphState& s, const BoundaryNode& b,
                                      const Facet& f) {
  const double d = s.grad[b.node][f.dir];
  const double gdd = f.dir == 0 ? g.g11[b.node] : g.g22[b.node];
  return (f.side == 0 ? 1.0 : -1.0) * d / std::sqrt(gdd);
}

/// grad_gamma u at a boundary node (bisector direction at corners).
inline double normal_derivative(const DomainGrid& g, const GraphState& s, const BoundaryNode& b) {
  double acc = 0.0;
  for (int k = 0; k < b.nfacets; ++k) acc += facet_normal_derivative(g, s, b, b.facets[k]);
  return b.corner() ? acc / std::sqrt(2.0) : acc;
}

/// max over boundary nodes of |grad_gamma u - Phi w| / (1 + |grad_gamma u|).
inline double bc_residual(const DomainGrid& g, const GraphState& s, const ContactAngleData& phi) {
  double worst = 0.0;
  for (std::size_t k = 0; k < g.boundary.size(); ++k) {
    const auto& b = g.boundary[k];
    const double dn = normal_derivative(g, s, b);
    worst = std::max(worst, std::abs(dn - phi.phi[k] * s.w[b.node]) / (1.0 + std::abs(dn)));
  }
  return worst;
}

/// Sum over boundary facets of (grad_gamma u / w) ds (inward flux).
inline double inward_flux_sum(const DomainGrid& g, const GraphState& s) {
  double acc = 0.0;
  for (const auto& b : g.boundary) {
    for (int k = 0; k < b.nfacets; ++k) {
      acc += facet_normal_derivative(g, s, b, b.facets[k]) / s.w[b.node] * b.facets[k].ds;
    }
  }
  return acc;
}

/// Largest eigenvalue of the grid-coordinate inverse metric over all nodes.
inline double aij_spectral_bound(const DomainGrid& g) {
  double lam = 0.0;
  for (int p = 0; p < g.node_count(); ++p) {
    lam = std::max(lam, 1.0 / g.g11[p]);
    if (g.dim == 2) lam = std::max(lam, 1.0 / g.g22[p]);
  }
  return lam;
}

}  // namespace mcflab
