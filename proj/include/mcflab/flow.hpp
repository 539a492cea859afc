#pragma once

// Explicit two-stage (Heun) integration of u_t = w div(grad u / w) with the
// contact-angle closure applied before every stage.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "mcflab/contact_angle.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/operators.hpp"

namespace mcflab {

struct FlowParams {
  double t_end = 1.0;
  double c_safe = 0.25;
  int cadence = 10;          // steps between recorded scalar rows
  int state_every = 0;       // steps between stored GraphStates (0: first and last only)
  double stop_tol = 1e-8;    // translator reached: max|u_t - mean u_t| < stop_tol * max(1, |mean u_t|)
  bool stop_at_translator = true;
  long max_steps = 50'000'000;
  int w_refresh = 20;        // steps between max-w updates of the CFL step
  std::optional<double> dt_fixed;
};

/// One recorded row of the per-step scalar series.
struct FlowScalars {
  double t = 0.0;
  double dt = 0.0;
  double mean_u = 0.0;
  double max_abs_ut = 0.0;
  double max_w = 1.0;
  double energy = 0.0;       // sum w dV + sum u Phi ds
  double dissipation = 0.0;  // sum u_t^2 / w dV
  double bc_residual = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double mean_ut = 0.0;
  double spread_ut = 0.0;    // max |u_t - mean u_t|
};

struct Trajectory {
  std::vector<GraphState> states;
  std::vector<FlowScalars> series;
  long steps = 0;
  bool converged = false;       // stop criterion met
  bool hit_max_steps = false;   // partial trajectory
  double h_min = 0.0;
  double min_u0 = 0.0, max_u0 = 0.0;
  double osc_u_minus_u0 = 0.0;  // max - min of (u - u0) over recorded space-time samples
};

/// dt = c_safe h_min^2 / (2 n Lambda max w).
inline double cfl_dt(const GraphState& s, const DomainGrid& g, double c_safe) {
  const double lam = aij_spectral_bound(g);
  const double wmax = *std::max_element(s.w.begin(), s.w.end());
  const double h = g.h_min();
  return c_safe * h * h / (2.0 * g.dim * lam * wmax);
}

/// Reusable buffers for repeated rate evaluations.
class FlowStepper {
 public:
  FlowStepper(const DomainGrid& grid, const ContactAngleSpec& phi) : g_(grid), spec_(phi) {
    const int n = g_.node_count();
    m_.resize(n);
    w_.resize(n);
    k1_.resize(n);
    k2_.resize(n);
    stage_.resize(n);
    if (!spec_.depends_on_u()) data_ = evaluate_contact_angle(spec_, g_, {});
  }

  /// u_t = w M[u] with the closure applied to u; also leaves w in `w()`.
  void rate(std::span<const double> u, std::span<double> out) {
    if (spec_.depends_on_u()) data_ = evaluate_contact_angle(spec_, g_, u);
    const auto layer = build_ghosts(g_, u, &data_);
    apply_ghosts(g_, layer, u, ext_);
    evaluate_operator(g_, ext_, m_, w_, ws_);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = w_[p] * m_[p];
  }

  /// Heun step; k1 (the rate at u) is left in `k1()`.
  void step(std::vector<double>& u, double dt) {
    rate(u, k1_);
    for (std::size_t p = 0; p < u.size(); ++p) stage_[p] = u[p] + dt * k1_[p];
    rate(stage_, k2_);
    for (std::size_t p = 0; p < u.size(); ++p) u[p] += 0.5 * dt * (k1_[p] + k2_[p]);
  }

  const std::vector<double>& k1() const { return k1_; }
  const std::vector<double>& w() const { return w_; }
  const ContactAngleData& data() const { return data_; }

 private:
  const DomainGrid& g_;
  const ContactAngleSpec& spec_;
  ContactAngleData data_;
  OperatorWorkspace ws_;
  std::vector<double> ext_, m_, w_, k1_, k2_, stage_;
};

/// One Heun step of the flow. The closure is applied before each stage.
inline GraphState step(const GraphState& s, const DomainGrid& g, const ContactAngleSpec& phi, double dt) {
  FlowStepper st(g, phi);
  GraphState out;
  out.u = s.u;
  st.step(out.u, dt);
  out.t = s.t + dt;
  for (double v : out.u) {
    if (!std::isfinite(v)) throw BlowUpError("non-finite value after flow step", out.t, 1);
  }
  const auto data = evaluate_contact_angle(phi, g, out.u);
  oblique_bc_closure(out, g, data);
  return out;
}

namespace detail {

inline FlowScalars record_scalars(const DomainGrid& g, const GraphState& s, std::span<const double> ut,
                                  const ContactAngleData& phi, double dt) {
  FlowScalars r;
  r.t = s.t;
  r.dt = dt;
  r.mean_u = weighted_mean(g, s.u);
  double wsum = 0.0, dis = 0.0, ut_mean = 0.0;
  r.max_w = 0.0;
  r.max_abs_ut = 0.0;
  r.min_u = std::numeric_limits<double>::infinity();
  r.max_u = -r.min_u;
  for (int p = 0; p < g.node_count(); ++p) {
    wsum += s.w[p] * g.dV[p];
    dis += ut[p] * ut[p] / s.w[p] * g.dV[p];
    ut_mean += ut[p] * g.dV[p];
    r.max_w = std::max(r.max_w, s.w[p]);
    r.max_abs_ut = std::max(r.max_abs_ut, std::abs(ut[p]));
    r.min_u = std::min(r.min_u, s.u[p]);
    r.max_u = std::max(r.max_u, s.u[p]);
  }
  double bterm = 0.0;
  for (std::size_t k = 0; k < g.boundary.size(); ++k) {
    bterm += s.u[g.boundary[k].node] * phi.phi[k] * g.boundary[k].ds;
  }
  r.energy = wsum + bterm;
  r.dissipation = dis;
  r.mean_ut = ut_mean / g.total_volume();
  r.spread_ut = 0.0;
  for (double v : ut) r.spread_ut = std::max(r.spread_ut, std::abs(v - r.mean_ut));
  r.bc_residual = bc_residual(g, s, phi);
  return r;
}

}  // namespace detail

/// Integrates to t_end, or until the translator stop criterion holds.
inline Trajectory run_flow(std::vector<double> u0, const DomainGrid& g, const ContactAngleSpec& phi,
                           const FlowParams& params) {
  if (!(params.t_end > 0.0)) throw ContractViolation("flow t_end must be positive");
  if (!(params.c_safe > 0.0 && params.c_safe <= 1.0)) throw ContractViolation("c_safe must lie in (0, 1]");
  for (double v : u0) {
    if (!std::isfinite(v)) throw ContractViolation("initial data must be finite");
  }

  Trajectory traj;
  traj.h_min = g.h_min();
  FlowStepper st(g, phi);
  GraphState s;
  s.u = std::move(u0);
  s.t = 0.0;
  const std::vector<double> u_init = s.u;
  double osc_lo = 0.0, osc_hi = 0.0;

  auto closed_state = [&](const GraphState& src) {
    GraphState c = src;
    const auto data = evaluate_contact_angle(phi, g, c.u);
    oblique_bc_closure(c, g, data);
    return c;
  };
  auto track_osc = [&](const std::vector<double>& u) {
    for (std::size_t p = 0; p < u.size(); ++p) {
      const double d = u[p] - u_init[p];
      osc_lo = std::min(osc_lo, d);
      osc_hi = std::max(osc_hi, d);
    }
  };

  double dt = 0.0;
  double wmax = 1.0;
  long n = 0;
  auto refresh_dt = [&]() {
    if (params.dt_fixed) {
      dt = *params.dt_fixed;
      return;
    }
    const double lam = aij_spectral_bound(g);
    const double h = g.h_min();
    dt = params.c_safe * h * h / (2.0 * g.dim * lam * wmax);
  };

  std::vector<double> ut(g.node_count());
  for (;;) {
    const bool record = (n % params.cadence) == 0;
    if (n % params.w_refresh == 0 || n == 0) {
      st.rate(s.u, ut);
      wmax = *std::max_element(st.w().begin(), st.w().end());
      if (!std::isfinite(wmax) || wmax > 1e6) {
        std::ostringstream os;
        os << "gradient blow-up: max w = " << wmax << " at t = " << s.t << " (step " << n << ")";
        throw BlowUpError(os.str(), s.t, n);
      }
      refresh_dt();
    }
    const double dt_step = std::min(dt, params.t_end - s.t);
    const bool last = dt_step <= 1e-15 * std::max(1.0, params.t_end) || n >= params.max_steps;

    if (record || last) {
      st.rate(s.u, ut);
      const auto cs = closed_state(s);
      auto row = detail::record_scalars(g, cs, ut, st.data(), dt);
      traj.series.push_back(row);
      track_osc(s.u);
      if (n == 0 || (params.state_every > 0 && n % params.state_every == 0)) traj.states.push_back(cs);
      // At least six samples so the final-third speed fit is defined.
      const bool done = params.stop_at_translator && traj.series.size() >= 6 &&
                        row.spread_ut < params.stop_tol * std::max(1.0, std::abs(row.mean_ut));
      if (done || last) {
        traj.converged = done;
        traj.hit_max_steps = !done && n >= params.max_steps && s.t < params.t_end;
        if (traj.states.empty() || traj.states.back().t != cs.t) traj.states.push_back(cs);
        break;
      }
    }

    st.step(s.u, dt_step);
    s.t += dt_step;
    ++n;
    for (double v : s.u) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite height at t = " << s.t << " (step " << n << "), dt = " << dt_step;
        throw BlowUpError(os.str(), s.t, n);
      }
    }
  }
  traj.steps = n;
  traj.osc_u_minus_u0 = osc_hi - osc_lo;
  return traj;
}

/// Least-squares slope of mean u(t) over the final third of the run.
inline double estimate_speed(const Trajectory& traj) {
  if (traj.series.size() < 2) throw EstimationError("trajectory too short to estimate a speed");
  const double t0 = traj.series.front().t;
  const double t1 = traj.series.back().t;
  const double cut = t1 - (t1 - t0) / 3.0;
  double st = 0, su = 0, stt = 0, stu = 0;
  int k = 0;
  for (const auto& r : traj.series) {
    if (r.t < cut) continue;
    st += r.t;
    su += r.mean_u;
    ++k;
  }
  if (k < 2) throw EstimationError("fewer than two samples in the final third of the trajectory");
  const double tm = st / k, um = su / k;
  for (const auto& r : traj.series) {
    if (r.t < cut) continue;
    stt += (r.t - tm) * (r.t - tm);
    stu += (r.t - tm) * (r.mean_u - um);
  }
  if (!(stt > 0.0)) throw EstimationError("degenerate time samples in the final third");
  return stu / stt;
}

}  // namespace mcflab
