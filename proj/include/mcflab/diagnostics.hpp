#pragma once

// Invariant monitors over flow trajectories and translator solutions, and the
// curvature-obstruction probes (Cheeger ratio, mean-curvature inequality).
// Every monitor is a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcflab/flow.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/translator.hpp"

namespace mcflab {

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

/// margin > 0 means slack; the failing sample time is kept when located.
struct Verdict {
  std::string monitor;
  Status status = Status::inconclusive;
  double margin = 0.0;
  std::string detail;
  std::optional<double> located_t;

  bool passed() const noexcept { return status == Status::pass; }
};

struct ReportRow {
  double t = 0.0;
  double max_abs_ut = 0.0;
  double max_w = 1.0;
  double energy = 0.0;
  double osc_u_minus_Ct = 0.0;
  double bc_residual = 0.0;
};

struct RunReport {
  std::string fingerprint;
  double speed_estimate = std::numeric_limits<double>::quiet_NaN();
  std::vector<ReportRow> series;
  std::vector<Verdict> verdicts;

  bool all_passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed(); });
  }
  const Verdict* find(const std::string& name) const {
    for (const auto& v : verdicts) {
      if (v.monitor == name) return &v;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------

/// Pass iff max|u_t|(t) <= max|u_t|(0) (1 + rel_tol) + 1e-12 at every sample.
inline Verdict monitor_ut_max(std::span<const FlowScalars> s, double rel_tol = 1e-6) {
  Verdict v;
  v.monitor = "ut_max";
  if (s.size() < 2) {
    v.detail = "fewer than two samples";
    return v;
  }
  const double bound = s.front().max_abs_ut * (1.0 + rel_tol) + 1e-12;
  v.margin = std::numeric_limits<double>::infinity();
  for (const auto& r : s) {
    const double m = bound - r.max_abs_ut;
    if (m < v.margin) v.margin = m;
    if (m < 0.0 && !v.located_t) v.located_t = r.t;
  }
  v.status = v.located_t ? Status::fail : Status::pass;
  std::ostringstream os;
  if (v.located_t) {
    os << "max|u_t| exceeds its initial value " << s.front().max_abs_ut << " first at t = " << *v.located_t;
  } else {
    os << "max|u_t| stays below " << bound;
  }
  v.detail = os.str();
  return v;
}

struct EnergyResidual {
  std::vector<double> t;
  std::vector<double> abs_r;   // |dE/dt + sum u_t^2 / w dV|
  double max_r = 0.0;
  double k_measured = 0.0;     // max|R| / (dt + h^2)
  Verdict verdict;
};

inline constexpr double kEnergyConstant = 50.0;

/// R(t) = dE/dt + sum u_t^2/w dV with E = sum w dV + sum u Phi ds and a
/// centered difference in time over consecutive samples.
inline EnergyResidual energy_identity_residual(std::span<const FlowScalars> s, double h,
                                               double k_r = kEnergyConstant) {
  EnergyResidual out;
  out.verdict.monitor = "energy_identity";
  if (s.size() < 3) {
    out.verdict.detail = "fewer than three samples";
    return out;
  }
  for (const auto& r : s) {
    if (!std::isfinite(r.dissipation) || !std::isfinite(r.energy)) {
      out.verdict.detail = "dissipation not available in the series";
      return out;
    }
  }
  double dt = 0.0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double span = s[k + 1].t - s[k - 1].t;
    if (!(span > 0.0)) continue;
    const double r = (s[k + 1].energy - s[k - 1].energy) / span + s[k].dissipation;
    out.t.push_back(s[k].t);
    out.abs_r.push_back(std::abs(r));
    if (std::abs(r) > out.max_r) {
      out.max_r = std::abs(r);
      out.verdict.located_t = s[k].t;
    }
    dt = std::max(dt, s[k].dt);
  }
  const double scale = dt + h * h;
  out.k_measured = out.max_r / scale;
  out.verdict.margin = k_r * scale - out.max_r;
  out.verdict.status = out.verdict.margin >= 0.0 ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "max|R| = " << out.max_r << ", K = max|R|/(dt+h^2) = " << out.k_measured << ", K_R = " << k_r;
  out.verdict.detail = os.str();
  if (out.verdict.status == Status::pass) out.verdict.located_t.reset();
  return out;
}

struct GradientBound {
  double w_max = 1.0;
  double m_t = 0.0;  // oscillation of u - u0
  Verdict verdict;
};

inline constexpr double kBlowUpW = 1e6;

inline GradientBound gradient_bound_monitor(std::span<const FlowScalars> s, double osc_u_minus_u0) {
  GradientBound g;
  g.verdict.monitor = "gradient_bound";
  g.m_t = osc_u_minus_u0;
  g.w_max = 0.0;
  for (const auto& r : s) {
    if (!std::isfinite(r.max_w) || r.max_w > g.w_max) {
      g.w_max = r.max_w;
      if (!std::isfinite(r.max_w) || r.max_w >= kBlowUpW) {
        g.verdict.located_t = r.t;
        break;
      }
    }
  }
  g.verdict.margin = std::log(kBlowUpW) - std::log(g.w_max);
  g.verdict.status = std::isfinite(g.w_max) && g.w_max < kBlowUpW ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "w_max = " << g.w_max << ", M_T = " << g.m_t;
  g.verdict.detail = os.str();
  return g;
}

struct EnvelopeFit {
  double slope = 0.0;      // least squares d(log w_max)/d(M_T), clipped at 0
  double intercept = 0.0;  // raised so that every point lies below the line
  bool nondecreasing = true;
  Verdict verdict;
};

/// log w_max against M_T across an amplitude sweep: every run must stay below
/// the blow-up threshold; the affine envelope is reported.
inline EnvelopeFit gradient_envelope(std::span<const GradientBound> runs) {
  EnvelopeFit f;
  f.verdict.monitor = "gradient_envelope";
  if (runs.empty()) {
    f.verdict.detail = "no runs";
    return f;
  }
  std::vector<std::pair<double, double>> pts;
  bool finite = true;
  for (const auto& r : runs) {
    finite = finite && r.verdict.passed();
    pts.emplace_back(r.m_t, std::log(r.w_max));
  }
  std::sort(pts.begin(), pts.end());
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (pts[k].second < pts[k - 1].second - 1e-12) f.nondecreasing = false;
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  f.slope = sxx > 0.0 ? std::max(0.0, sxy / sxx) : 0.0;
  f.intercept = -std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pts) f.intercept = std::max(f.intercept, y - f.slope * x);
  f.verdict.status = finite ? Status::pass : Status::fail;
  f.verdict.margin = finite ? 1.0 : -1.0;
  std::ostringstream os;
  os << "log w_max <= " << f.intercept << " + " << f.slope << " M_T over " << pts.size() << " runs"
     << (f.nondecreasing ? "" : " (not monotone in M_T)");
  f.verdict.detail = os.str();
  return f;
}

/// Space-time oscillation of u - C t over the whole run compared with its
/// value over the first 10% of the run.
inline Verdict sandwich_monitor(std::span<const FlowScalars> s, double C, double slack = 1e-3) {
  Verdict v;
  v.monitor = "sandwich";
  if (s.size() < 2) {
    v.detail = "fewer than two samples";
    return v;
  }
  const double t0 = s.front().t;
  const double cut = t0 + 0.1 * (s.back().t - t0);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double lo10 = lo, hi10 = hi;
  for (const auto& r : s) {
    const double a = r.min_u - C * r.t, b = r.max_u - C * r.t;
    lo = std::min(lo, a);
    hi = std::max(hi, b);
    if (r.t <= cut) {
      lo10 = std::min(lo10, a);
      hi10 = std::max(hi10, b);
    }
    if (!v.located_t && (hi - lo) > (hi10 - lo10) + slack) v.located_t = r.t;
  }
  v.margin = (hi10 - lo10) + slack - (hi - lo);
  v.status = v.margin >= 0.0 ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "osc(u - Ct) = " << (hi - lo) << " over the run, " << (hi10 - lo10) << " over the first 10%";
  v.detail = os.str();
  return v;
}

/// |C| <= w_max Length / Vol on a translator solution.
inline Verdict speed_bound(const TranslatorSolution& sol, const DomainGrid& g) {
  Verdict v;
  v.monitor = "speed_bound";
  const double wmax = *std::max_element(sol.w.begin(), sol.w.end());
  const double bound = wmax * g.boundary_length() / g.total_volume();
  v.margin = bound - std::abs(sol.C);
  v.status = v.margin >= 0.0 ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "|C| = " << std::abs(sol.C) << ", w_max L/V = " << bound;
  v.detail = os.str();
  return v;
}

/// Relative gap between the continuation speed and the quadrature speed.
inline Verdict estimator_agreement(double C, double C_quad, double rel_tol = 5e-3) {
  Verdict v;
  v.monitor = "estimator_agreement";
  const double scale = std::max(std::abs(C), std::abs(C_quad));
  const double gap = scale > 0.0 ? std::abs(C - C_quad) / scale : 0.0;
  const double abs_gap = std::abs(C - C_quad);
  v.margin = rel_tol - gap;
  v.status = (gap <= rel_tol || abs_gap <= 1e-10) ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "C = " << C << ", C_quad = " << C_quad << ", relative gap " << gap;
  v.detail = os.str();
  return v;
}

// ---------------------------------------------------------------------------

/// Length(boundary) / Area(Omega) with the grid quadrature.
inline double cheeger_ratio(const DomainGrid& g) {
  if (g.dim != 2) throw ContractViolation("cheeger_ratio needs a two-dimensional domain");
  return g.boundary_length() / g.total_volume();
}

struct InfHResult {
  double two_inf_H = 0.0;  // |C| / max w
  double ratio = 0.0;      // Length / Vol
  Verdict verdict;
};

/// 2 inf H = C / max w on a translator (applied to -u when C < 0);
/// pass iff 2 inf H <= Length / Vol + 1e-8.
inline InfHResult inf_H_inequality(double C, std::span<const double> w, const DomainGrid& g) {
  InfHResult r;
  r.verdict.monitor = "inf_H_inequality";
  const double wmax = *std::max_element(w.begin(), w.end());
  r.two_inf_H = std::abs(C) / wmax;
  r.ratio = g.boundary_length() / g.total_volume();
  r.verdict.margin = r.ratio + 1e-8 - r.two_inf_H;
  r.verdict.status = r.verdict.margin >= 0.0 ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "2 inf H = " << r.two_inf_H << ", Length/Vol = " << r.ratio;
  r.verdict.detail = os.str();
  return r;
}

inline InfHResult inf_H_inequality(const TranslatorSolution& sol, const DomainGrid& g) {
  return inf_H_inequality(sol.C, sol.w, g);
}

// ---------------------------------------------------------------------------

/// Report series from a trajectory; osc(u - Ct) is the spatial oscillation
/// of u - C t accumulated over samples up to t.
inline RunReport build_report(const Trajectory& traj, double C) {
  RunReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : traj.series) {
    lo = std::min(lo, r.min_u - C * r.t);
    hi = std::max(hi, r.max_u - C * r.t);
    rep.series.push_back({r.t, r.max_abs_ut, r.max_w, r.energy, hi - lo, r.bc_residual});
  }
  return rep;
}

/// Fixed-format table: monitor, status, margin.
inline std::string verdict_table(std::span<const Verdict> vs) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %-13s %14s\n", "monitor", "status", "margin");
  os << line;
  for (const auto& v : vs) {
    std::snprintf(line, sizeof line, "%-22s %-13s %14.6e\n", v.monitor.c_str(), to_string(v.status), v.margin);
    os << line;
  }
  return os.str();
}

}  // namespace mcflab
