#pragma once

// Elliptic translator equation div(grad u / w) = C / w with the contact-angle
// condition, solved through the regularization div(grad u / w) = eps u / w
// and eps -> 0 continuation, plus the divergence-theorem speed
//   C = -(sum Phi ds) / (sum w^-1 dV)
// (gamma inward, grad_gamma u = Phi w).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcflab/contact_angle.hpp"
#include "mcflab/dual.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/fields.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/operators.hpp"

namespace mcflab {

struct TranslatorOptions {
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  double tol_newton = 1e-10;  // regularized solves: max residual < tol_newton * eps
  double tol_ell = 1e-9;      // final translator residual
  int max_newton = 60;
  double monotone_tol = 1e-10;
};

/// u_eps = offset + v; the offset carries the large eps^-1 part exactly.
struct RegularizedSolution {
  double eps = 0.0;
  double offset = 0.0;
  std::vector<double> v;
  double residual = 0.0;
  int iterations = 0;
  bool roundoff_limited = false;
  bool used_picard = false;

  double eps_mean(const DomainGrid& g) const { return eps * (offset + weighted_mean(g, v)); }
  std::vector<double> u() const {
    std::vector<double> r = v;
    for (double& x : r) x += offset;
    return r;
  }
};

struct ContinuationStep {
  double eps = 0.0;
  double eps_mean_u = 0.0;  // eps * mean(u_eps)
  int iterations = 0;
  double residual = 0.0;
  bool roundoff_limited = false;
};

struct TranslatorSolution {
  std::vector<double> profile;  // mean zero
  std::vector<double> w;
  double C = 0.0;               // speed from the final translator solve
  double C_richardson = 0.0;    // extrapolated eps * mean(u_eps)
  std::vector<ContinuationStep> history;
  double pde_residual = 0.0;    // max |M[u] - C / w|
  double bc_residual = 0.0;
  bool low_confidence = false;
  int polish_iterations = 0;
};

namespace detail {

enum class SourceKind { regularized, translator };

/// Newton machinery shared by the regularized and the translator problems.
class NewtonProblem {
 public:
  NewtonProblem(const DomainGrid& g, const ContactAngleSpec& phi, SourceKind kind, double eps, double offset)
      : g_(g), spec_(phi), kind_(kind), eps_(eps), offset_(offset) {}

  int unknowns() const { return g_.node_count() + (kind_ == SourceKind::translator ? 1 : 0); }

  /// Residual vector (size unknowns()) at x = (v[, C]). Rebuilds the ghost layer.
  void residual(const std::vector<double>& x, std::vector<double>& r) {
    prepare(x);
    const int n = g_.node_count();
    r.resize(unknowns());
    evaluate_operator(g_, ext_, m_, w_, ws_);
    for (int p = 0; p < n; ++p) r[p] = m_[p] - source(x, p, w_[p]);
    if (kind_ == SourceKind::translator) {
      r[n] = weighted_mean(g_, std::span<const double>(x.data(), n));
    }
  }

  /// Jacobian at the state of the last residual() call (ghost layer frozen).
  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& x, bool picard) const {
    using D = Dual<9>;
    const int n = g_.node_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 12);
    for (int i = 0; i < g_.n1; ++i) {
      for (int j = 0; j < g_.n2; ++j) {
        const int p = g_.node(i, j);
        auto at = [&](int ii, int jj) {
          const int slot = (ii - i + 1) * 3 + (jj - j + 1);
          return D::seed(ext_[g_.ext(ii, jj)], slot);
        };
        const D m = node_mean_curvature<D>(g_, i, j, at, picard);
        D w = nodal_w<D>(g_, i, j, at);
        if (picard) w = detach(w);
        D src;
        if (kind_ == SourceKind::regularized) {
          src = eps_ * (offset_ + at(i, j)) / w;
        } else {
          src = x[n] / w;
          trip.emplace_back(p, n, -1.0 / w.v);
        }
        const D r = m - src;
        for (int s = 0; s < 9; ++s) {
          if (r.d[s] == 0.0) continue;
          scatter(trip, p, i + s / 3 - 1, j + s % 3 - 1, r.d[s]);
        }
      }
    }
    if (kind_ == SourceKind::translator) {
      const double vol = g_.total_volume();
      for (int p = 0; p < n; ++p) trip.emplace_back(n, p, g_.dV[p] / vol);
    }
    Eigen::SparseMatrix<double> J(unknowns(), unknowns());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  const std::vector<double>& w() const { return w_; }
  const ContactAngleData& data() const { return data_; }

 private:
  double source(const std::vector<double>& x, int p, double w) const {
    if (kind_ == SourceKind::regularized) return eps_ * (offset_ + x[p]) / w;
    return x[g_.node_count()] / w;
  }

  void prepare(const std::vector<double>& x) {
    const int n = g_.node_count();
    std::span<const double> v(x.data(), n);
    if (spec_.depends_on_u()) {
      u_.resize(n);
      for (int p = 0; p < n; ++p) u_[p] = offset_ + v[p];
      data_ = evaluate_contact_angle(spec_, g_, u_);
    } else if (data_.phi.empty()) {
      data_ = evaluate_contact_angle(spec_, g_, {});
    }
    layer_ = build_ghosts(g_, v, &data_);
    apply_ghosts(g_, layer_, v, ext_);
    m_.resize(n);
    w_.resize(n);
  }

  void scatter(std::vector<Eigen::Triplet<double>>& trip, int row, int ii, int jj, double d) const {
    const bool in1 = ii >= 0 && ii < g_.n1;
    const bool in2 = g_.dim == 1 || g_.periodic2 || (jj >= 0 && jj < g_.n2);
    if (in1 && in2) {
      trip.emplace_back(row, g_.node(ii, g_.dim == 1 ? 0 : (g_.periodic2 ? g_.wrap2(jj) : jj)), d);
      return;
    }
    const int rule = layer_.rule_of_slot[g_.ext(ii, jj)];
    for (const auto& t : layer_.rules[rule].terms) trip.emplace_back(row, t.node, d * t.coef);
  }

  const DomainGrid& g_;
  const ContactAngleSpec& spec_;
  SourceKind kind_;
  double eps_;
  double offset_;
  ContactAngleData data_;
  GhostLayer layer_;
  OperatorWorkspace ws_;
  std::vector<double> ext_, m_, w_, u_;
};

inline double max_abs(const std::vector<double>& r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

inline double l2(const std::vector<double>& r) {
  double m = 0.0;
  for (double v : r) m += v * v;
  return std::sqrt(m);
}

struct NewtonResult {
  int iterations = 0;
  double residual = 0.0;
  bool roundoff_limited = false;
  bool used_picard = false;
};

/// Damped Newton with backtracking; falls back to a Picard step when the
/// Jacobian factorization fails or the Newton direction does not descend.
inline NewtonResult newton_solve(NewtonProblem& prob, std::vector<double>& x, double tol, int max_iter,
                                 const std::string& what) {
  NewtonResult res;
  std::vector<double> r, r_try, x_try;
  prob.residual(x, r);
  double rmax = max_abs(r);
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    res.residual = rmax;
    if (rmax < tol) return res;

    bool accepted = false;
    double last_step = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const bool picard = attempt == 1;
      if (picard) prob.residual(x, r);
      Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
      auto J = prob.jacobian(x, picard);
      J.makeCompressed();
      lu.compute(J);
      if (lu.info() != Eigen::Success) continue;
      Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
      const Eigen::VectorXd dx = lu.solve(rv);
      if (lu.info() != Eigen::Success || !dx.allFinite()) continue;
      const double r0 = l2(r);
      for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
        x_try = x;
        for (std::size_t k = 0; k < x.size(); ++k) x_try[k] -= alpha * dx[static_cast<Eigen::Index>(k)];
        prob.residual(x_try, r_try);
        const double rt = l2(r_try);
        if (std::isfinite(rt) && rt < (1.0 - 1e-4 * alpha) * r0) {
          last_step = alpha * dx.cwiseAbs().maxCoeff();
          x.swap(x_try);
          r.swap(r_try);
          accepted = true;
          res.used_picard = res.used_picard || picard;
          break;
        }
      }
      if (!accepted) {
        // Direction did not descend. At roundoff level this is convergence.
        const double scale = 1.0 + max_abs(x);
        if (dx.cwiseAbs().maxCoeff() < 1e-11 * scale && rmax < 1e-6) {
          prob.residual(x, r);
          res.residual = max_abs(r);
          res.roundoff_limited = true;
          res.iterations = it + 1;
          return res;
        }
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << what << ": Newton and Picard steps stagnated at residual " << rmax << " (iteration " << it << ")";
      throw SolverError(os.str(), rmax);
    }
    const double new_max = max_abs(r);
    const double scale = 1.0 + max_abs(x);
    if (new_max >= tol && last_step < 1e-13 * scale && new_max < 1e-6) {
      res.iterations = it + 1;
      res.residual = new_max;
      res.roundoff_limited = true;
      return res;
    }
    rmax = new_max;
  }
  res.residual = rmax;
  if (rmax < tol) return res;
  std::ostringstream os;
  os << what << ": no convergence after " << max_iter << " Newton iterations, residual " << rmax;
  throw SolverError(os.str(), rmax);
}

}  // namespace detail

/// Solves M[u] - eps u / w = 0 with the contact-angle closure.
inline RegularizedSolution solve_regularized(double eps, const DomainGrid& g, const ContactAngleSpec& phi,
                                             const std::vector<double>& u_init,
                                             const TranslatorOptions& opt = {}) {
  if (!(eps > 0.0)) throw ContractViolation("regularization parameter eps must be positive");
  RegularizedSolution sol;
  sol.eps = eps;
  sol.offset = u_init.empty() ? 0.0 : weighted_mean(g, u_init);
  sol.v.assign(g.node_count(), 0.0);
  if (!u_init.empty()) {
    for (int p = 0; p < g.node_count(); ++p) sol.v[p] = u_init[p] - sol.offset;
  }
  detail::NewtonProblem prob(g, phi, detail::SourceKind::regularized, eps, sol.offset);
  std::ostringstream what;
  what << "regularized solve (eps = " << eps << ")";
  const auto res = detail::newton_solve(prob, sol.v, opt.tol_newton * eps, opt.max_newton, what.str());
  sol.residual = res.residual;
  sol.iterations = res.iterations;
  sol.roundoff_limited = res.roundoff_limited;
  sol.used_picard = res.used_picard;
  return sol;
}

/// C = -(sum Phi ds) / (sum w^-1 dV), w from u with the closure applied.
inline double speed_quadrature(const std::vector<double>& u, const DomainGrid& g, const ContactAngleSpec& phi) {
  const auto data = evaluate_contact_angle(phi, g, u);
  GraphState s;
  s.u = u;
  oblique_bc_closure(s, g, data);
  double num = 0.0;
  for (std::size_t k = 0; k < g.boundary.size(); ++k) num += data.phi[k] * g.boundary[k].ds;
  if (num == 0.0) return 0.0;
  double den = 0.0;
  for (int p = 0; p < g.node_count(); ++p) den += g.dV[p] / s.w[p];
  return -num / den;
}

/// eps -> 0 continuation followed by a translator solve for (u, C) with a
/// mean-zero constraint.
inline TranslatorSolution continuation_solve(const DomainGrid& g, const ContactAngleSpec& phi,
                                             const TranslatorOptions& opt = {},
                                             std::vector<double> u_init = {}) {
  const auto& eps = opt.eps_schedule;
  if (eps.size() < 2) throw ContractViolation("eps schedule needs at least two values");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0) || (k > 0 && !(eps[k] < eps[k - 1]))) {
      throw ContractViolation("eps schedule must be positive and strictly decreasing");
    }
  }

  TranslatorSolution out;
  std::vector<double> init = std::move(u_init);
  RegularizedSolution prev;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (k > 0) {
      // Warm start: keep the profile, move the offset along eps * u ~ C.
      const double c_est = prev.eps_mean(g);
      init = prev.u();
      for (double& x : init) x += c_est * (1.0 / eps[k] - 1.0 / eps[k - 1]);
    }
    prev = solve_regularized(eps[k], g, phi, init, opt);
    out.history.push_back({eps[k], prev.eps_mean(g), prev.iterations, prev.residual, prev.roundoff_limited});
  }

  const std::size_t n = out.history.size();
  const double e1 = out.history[n - 2].eps, e2 = out.history[n - 1].eps;
  const double f1 = out.history[n - 2].eps_mean_u, f2 = out.history[n - 1].eps_mean_u;
  out.C_richardson = (e1 * f2 - e2 * f1) / (e1 - e2);

  // eps * mean(u_eps) must approach its limit monotonically.
  for (std::size_t k = 2; k < n; ++k) {
    const double d1 = out.history[k - 1].eps_mean_u - out.history[k - 2].eps_mean_u;
    const double d2 = out.history[k].eps_mean_u - out.history[k - 1].eps_mean_u;
    if (d1 * d2 < 0.0 && std::abs(d2) > opt.monotone_tol) out.low_confidence = true;
  }

  std::vector<double> x = prev.v;
  const double mv = weighted_mean(g, x);
  for (double& v : x) v -= mv;
  x.push_back(out.C_richardson);
  detail::NewtonProblem polish(g, phi, detail::SourceKind::translator, 0.0, 0.0);
  const auto res = detail::newton_solve(polish, x, opt.tol_ell, opt.max_newton, "translator solve");
  out.polish_iterations = res.iterations;
  out.C = x.back();
  x.pop_back();
  out.profile = std::move(x);

  const auto data = evaluate_contact_angle(phi, g, out.profile);
  GraphState s;
  s.u = out.profile;
  oblique_bc_closure(s, g, data);
  out.w = s.w;
  const auto m = mean_curvature_op(s, g);
  for (int p = 0; p < g.node_count(); ++p) {
    out.pde_residual = std::max(out.pde_residual, std::abs(m[p] - out.C / s.w[p]));
  }
  out.bc_residual = bc_residual(g, s, data);
  return out;
}

struct UniquenessReport {
  std::vector<double> speeds;
  double max_dC = 0.0;
  double profile_spread = 0.0;
  std::vector<std::string> failures;
  bool complete() const { return failures.empty(); }
};

/// Runs continuation_solve from zero, random smooth and affine initial data.
inline UniquenessReport uniqueness_probe(const DomainGrid& g, const ContactAngleSpec& phi,
                                         const TranslatorOptions& opt = {}, std::uint64_t seed = 7) {
  UniquenessReport rep;
  const std::vector<std::pair<std::string, std::vector<double>>> inits = {
      {"zero", constant_field(g, 0.0)},
      {"random_smooth", random_smooth_field(g, 0.5, seed)},
      {"affine", affine_field(g, 0.25, 0.5, -0.3)}};
  std::vector<std::vector<double>> profiles;
  for (const auto& [name, u0] : inits) {
    try {
      auto sol = continuation_solve(g, phi, opt, u0);
      rep.speeds.push_back(sol.C);
      profiles.push_back(std::move(sol.profile));
    } catch (const Error& e) {
      rep.failures.push_back(name + ": " + e.what());
    }
  }
  for (std::size_t a = 0; a < profiles.size(); ++a) {
    for (std::size_t b = a + 1; b < profiles.size(); ++b) {
      rep.max_dC = std::max(rep.max_dC, std::abs(rep.speeds[a] - rep.speeds[b]));
      for (std::size_t p = 0; p < profiles[a].size(); ++p) {
        rep.profile_spread = std::max(rep.profile_spread, std::abs(profiles[a][p] - profiles[b][p]));
      }
    }
  }
  return rep;
}

}  // namespace mcflab
