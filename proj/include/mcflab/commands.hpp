#pragma once

// Subcommands flow | translator | verify | sweep | cheeger.
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 monitor failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcflab/diagnostics.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/io.hpp"
#include "mcflab/scenario.hpp"
#include "mcflab/translator.hpp"

namespace mcflab {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitMonitor = 4 };

struct CliOptions {
  std::string config;
  std::string out;  // empty: the config's output entry
  int jobs = 1;
  bool quiet = false;
};

namespace detail {

inline std::filesystem::path out_dir(const ScenarioConfig& c, const CliOptions& o) {
  return o.out.empty() ? std::filesystem::path(c.output) : std::filesystem::path(o.out);
}

inline void say(const CliOptions& o, const std::string& s) {
  if (!o.quiet) std::cout << s << std::flush;
}

inline Json config_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["fingerprint"] = c.fingerprint;
  j["metric"] = c.metric.name;
  j["domain"] = to_string(c.domain.kind);
  j["resolution"] = Json::array({c.resolution.n1, c.resolution.n2});
  j["contact_angle"] = to_string(c.phi.kind);
  j["phi0"] = c.phi.phi0;
  return j;
}

/// |C_flow - C| <= 1% |C| + 1e-6.
inline Verdict flow_speed_agreement(double c_flow, double c) {
  Verdict v;
  v.monitor = "flow_speed_agreement";
  const double tol = 0.01 * std::abs(c) + 1e-6;
  v.margin = tol - std::abs(c_flow - c);
  v.status = std::isfinite(c_flow) && v.margin >= 0.0 ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "flow estimate " << c_flow << ", translator C " << c;
  v.detail = os.str();
  return v;
}

/// Every sampled state satisfies the closure to 1e-10.
inline Verdict bc_closure_monitor(std::span<const FlowScalars> s) {
  Verdict v;
  v.monitor = "bc_closure";
  double worst = 0.0;
  for (const auto& r : s) {
    if (r.bc_residual > worst) {
      worst = r.bc_residual;
      if (worst > 1e-10 && !v.located_t) v.located_t = r.t;
    }
  }
  v.margin = 1e-10 - worst;
  v.status = v.margin >= 0.0 ? Status::pass : Status::fail;
  v.detail = "max closure residual " + format_double(worst);
  return v;
}

struct FlowOutcome {
  Trajectory traj;
  RunReport report;
};

inline FlowOutcome run_flow_report(const ScenarioConfig& c, const DomainGrid& g) {
  FlowOutcome o;
  o.traj = run_flow(make_initial(c, g), g, c.phi, c.flow);
  double speed = std::numeric_limits<double>::quiet_NaN();
  try {
    speed = estimate_speed(o.traj);
  } catch (const EstimationError&) {
  }
  o.report = build_report(o.traj, std::isfinite(speed) ? speed : 0.0);
  o.report.speed_estimate = speed;
  o.report.fingerprint = c.fingerprint;
  o.report.verdicts.push_back(monitor_ut_max(o.traj.series, c.ut_rel_tol));
  o.report.verdicts.push_back(energy_identity_residual(o.traj.series, g.h_min(), c.energy_constant).verdict);
  o.report.verdicts.push_back(gradient_bound_monitor(o.traj.series, o.traj.osc_u_minus_u0).verdict);
  o.report.verdicts.push_back(bc_closure_monitor(o.traj.series));
  return o;
}

inline void write_flow_outputs(const std::filesystem::path& dir, const ScenarioConfig& c, const DomainGrid& g,
                               const FlowOutcome& o) {
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(o.traj));
  Json j = to_json(o.report);
  j["scenario"] = config_json(c);
  j["steps"] = o.traj.steps;
  j["converged"] = o.traj.converged;
  j["partial"] = o.traj.hit_max_steps;
  j["M_T"] = jnum(o.traj.osc_u_minus_u0);
  write_file_atomic(dir / "report.json", dump_json(j));
  const auto& last = o.traj.states.back();
  write_file_atomic(dir / "final_state.csv", profile_csv(g, last.u, last.w));
}

struct TranslatorOutcome {
  TranslatorSolution sol;
  double C_quad = 0.0;
  std::vector<Verdict> verdicts;
};

inline TranslatorOutcome run_translator(const ScenarioConfig& c, const DomainGrid& g) {
  TranslatorOutcome o;
  o.sol = continuation_solve(g, c.phi, c.translator, make_initial(c, g));
  o.C_quad = speed_quadrature(o.sol.profile, g, c.phi);
  o.verdicts.push_back(estimator_agreement(o.sol.C, o.C_quad));
  o.verdicts.push_back(speed_bound(o.sol, g));
  o.verdicts.push_back(inf_H_inequality(o.sol, g).verdict);
  return o;
}

inline void write_translator_outputs(const std::filesystem::path& dir, const ScenarioConfig& c, const DomainGrid& g,
                                     const TranslatorOutcome& o) {
  Json j = to_json(o.sol);
  j["C_quad"] = jnum(o.C_quad);
  j["scenario"] = config_json(c);
  const auto ih = inf_H_inequality(o.sol, g);
  j["two_inf_H"] = jnum(ih.two_inf_H);
  j["length_over_volume"] = jnum(ih.ratio);
  Json vs = Json::array();
  for (const auto& v : o.verdicts) vs.push_back(to_json(v));
  j["verdicts"] = vs;
  write_file_atomic(dir / "translator.json", dump_json(j));
  write_file_atomic(dir / "profile.csv", profile_csv(g, o.sol.profile, o.sol.w));
}

inline bool any_failed(std::span<const Verdict> vs) {
  return std::any_of(vs.begin(), vs.end(), [](const Verdict& v) { return v.status == Status::fail; });
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_flow(const ScenarioConfig& c, const CliOptions& opt) {
  const auto g = make_grid(c);
  const auto o = detail::run_flow_report(c, g);
  detail::write_flow_outputs(detail::out_dir(c, opt), c, g, o);
  std::ostringstream os;
  os << c.name << ": " << o.traj.steps << " steps to t = " << format_double(o.traj.series.back().t)
     << (o.traj.converged ? " (translator reached)" : "") << (o.traj.hit_max_steps ? " (partial: max steps)" : "")
     << ", speed estimate " << format_double(o.report.speed_estimate) << "\n";
  detail::say(opt, os.str());
  return kExitOk;
}

inline int cmd_translator(const ScenarioConfig& c, const CliOptions& opt) {
  const auto g = make_grid(c);
  const auto o = detail::run_translator(c, g);
  detail::write_translator_outputs(detail::out_dir(c, opt), c, g, o);
  std::ostringstream os;
  os << c.name << ": C = " << format_double(o.sol.C) << ", C_quad = " << format_double(o.C_quad)
     << (o.sol.low_confidence ? " (low confidence)" : "") << "\n";
  detail::say(opt, os.str());
  return kExitOk;
}

/// Full monitor suite; exit 4 when any monitor fails (inconclusive monitors
/// are reported but do not fail the run).
inline int cmd_verify(const ScenarioConfig& c, const CliOptions& opt) {
  const auto dir = detail::out_dir(c, opt);
  RunReport rep;
  rep.fingerprint = c.fingerprint;

  if (c.trajectory) {
    std::filesystem::path p = *c.trajectory;
    if (p.is_relative()) p = c.base_dir / p;
    const auto rows = read_trajectory_csv(p);
    Trajectory t;
    t.series = rows;
    rep = build_report(t, 0.0);
    rep.fingerprint = c.fingerprint;
    for (auto& r : rep.series) r.osc_u_minus_Ct = std::numeric_limits<double>::quiet_NaN();
    rep.verdicts.push_back(monitor_ut_max(rows, c.ut_rel_tol));
    const auto g = make_grid(c);
    rep.verdicts.push_back(energy_identity_residual(rows, g.h_min(), c.energy_constant).verdict);
    rep.verdicts.push_back(gradient_bound_monitor(rows, std::numeric_limits<double>::quiet_NaN()).verdict);
    rep.verdicts.push_back(detail::bc_closure_monitor(rows));
  } else {
    const auto g = make_grid(c);
    const auto tr = detail::run_translator(c, g);
    auto fl = detail::run_flow_report(c, g);
    rep = fl.report;
    rep.verdicts.push_back(sandwich_monitor(fl.traj.series, tr.sol.C));
    rep.verdicts.push_back(detail::flow_speed_agreement(fl.report.speed_estimate, tr.sol.C));
    for (const auto& v : tr.verdicts) rep.verdicts.push_back(v);
    write_file_atomic(dir / "trajectory.csv", trajectory_csv(fl.traj));
    detail::write_translator_outputs(dir, c, g, tr);
  }

  Json j = to_json(rep);
  j["scenario"] = detail::config_json(c);
  write_file_atomic(dir / "report.json", dump_json(j));
  const auto table = verdict_table(rep.verdicts);
  write_file_atomic(dir / "verdicts.txt", table);
  detail::say(opt, table);
  if (detail::any_failed(rep.verdicts)) {
    for (const auto& v : rep.verdicts) {
      if (v.status == Status::fail) std::cerr << "monitor failed: " << v.monitor << ": " << v.detail << "\n";
    }
    return kExitMonitor;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepPoint {
  double value = 0.0;
  ScenarioConfig config;
  std::string error;
  int error_code = 0;
  double C = std::numeric_limits<double>::quiet_NaN();
  double C_quad = std::numeric_limits<double>::quiet_NaN();
  double w_max = std::numeric_limits<double>::quiet_NaN();
  double two_inf_H = std::numeric_limits<double>::quiet_NaN();
  double length_over_volume = std::numeric_limits<double>::quiet_NaN();
  double M_T = std::numeric_limits<double>::quiet_NaN();
  std::vector<Verdict> verdicts;
  GradientBound gradient;
};

inline ScenarioConfig apply_sweep_value(ScenarioConfig c, const std::string& param, double v) {
  if (param == "radius") {
    c.domain.radius = v;
    c.domain.hyperbolic_radius.reset();
    c.domain.r_out = v;
    c.domain.hi = v;
  } else if (param == "hyperbolic_radius") {
    c.domain.hyperbolic_radius = v;
  } else if (param == "phi") {
    c.phi.value = v;
  } else if (param == "resolution") {
    const int n = static_cast<int>(std::lround(v));
    c.resolution = {n, n};
  } else if (param == "amplitude") {
    c.initial.amplitude = v;
    c.initial.bump = v;
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "'");
  }
  return c;
}

/// Runs each sweep point (concurrently up to --jobs) into its own
/// subdirectory and writes summary.csv in point order.
inline int cmd_sweep(const ScenarioConfig& c, const CliOptions& opt) {
  if (!c.sweep) throw ConfigError("sweep: section required for the sweep command");
  const auto& sw = *c.sweep;
  const auto dir = detail::out_dir(c, opt);
  std::vector<SweepPoint> pts(sw.values.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    pts[k].value = sw.values[k];
    pts[k].config = apply_sweep_value(c, sw.parameter, sw.values[k]);
  }
  // Validate every point before running any.
  std::vector<std::string> violations;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    try {
      const auto g = make_grid(pts[k].config);
      evaluate_contact_angle(pts[k].config.phi, g, make_initial(pts[k].config, g));
    } catch (const Error& e) {
      violations.push_back("sweep.values[" + std::to_string(k) + "]: " + e.what());
    }
  }
  if (!violations.empty()) throw ValidationError(violations);

  auto run_point = [&](SweepPoint& p, std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", k);
    const auto pdir = dir / name;
    try {
      const auto g = make_grid(p.config);
      if (g.dim == 2) p.length_over_volume = g.boundary_length() / g.total_volume();
      if (sw.mode == "translator") {
        const auto o = detail::run_translator(p.config, g);
        detail::write_translator_outputs(pdir, p.config, g, o);
        p.C = o.sol.C;
        p.C_quad = o.C_quad;
        p.w_max = *std::max_element(o.sol.w.begin(), o.sol.w.end());
        const auto ih = inf_H_inequality(o.sol, g);
        p.two_inf_H = ih.two_inf_H;
        p.length_over_volume = ih.ratio;
        p.verdicts = o.verdicts;
      } else {
        const auto o = detail::run_flow_report(p.config, g);
        detail::write_flow_outputs(pdir, p.config, g, o);
        p.C = o.report.speed_estimate;
        p.M_T = o.traj.osc_u_minus_u0;
        p.gradient = gradient_bound_monitor(o.traj.series, o.traj.osc_u_minus_u0);
        p.w_max = p.gradient.w_max;
        p.verdicts = o.report.verdicts;
      }
    } catch (const ConfigError& e) {
      p.error = e.what();
      p.error_code = kExitConfig;
    } catch (const ContractViolation& e) {
      p.error = e.what();
      p.error_code = kExitConfig;
    } catch (const std::exception& e) {
      p.error = e.what();
      p.error_code = kExitSolver;
    }
  };

  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(pts.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < pts.size(); k = next++) run_point(pts[k], k);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string csv = "point," + sw.parameter + ",C,C_quad,w_max,two_inf_H,length_over_volume,M_T,status\n";
  std::vector<Verdict> all;
  int code = kExitOk;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    std::string status = "ok";
    if (!p.error.empty()) {
      status = "error";
      code = std::max(code, p.error_code);
    } else if (detail::any_failed(p.verdicts)) {
      status = "monitor_failure";
    }
    csv += std::to_string(k) + ',' + format_double(p.value) + ',' + format_double(p.C) + ',' + format_double(p.C_quad) +
           ',' + format_double(p.w_max) + ',' + format_double(p.two_inf_H) + ',' +
           format_double(p.length_over_volume) + ',' + format_double(p.M_T) + ',' + status + '\n';
    for (auto v : p.verdicts) {
      v.monitor += "[" + std::to_string(k) + "]";
      all.push_back(v);
    }
  }
  if (sw.mode == "flow") {
    std::vector<GradientBound> gb;
    for (const auto& p : pts) {
      if (p.error.empty()) gb.push_back(p.gradient);
    }
    if (!gb.empty()) all.push_back(gradient_envelope(gb).verdict);
  }
  write_file_atomic(dir / "summary.csv", csv);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = detail::config_json(c);
  j["parameter"] = sw.parameter;
  j["mode"] = sw.mode;
  Json errs = Json::array();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!pts[k].error.empty()) errs.push_back({{"point", k}, {"message", pts[k].error}});
  }
  j["errors"] = errs;
  Json vs = Json::array();
  for (const auto& v : all) vs.push_back(to_json(v));
  j["verdicts"] = vs;
  write_file_atomic(dir / "sweep.json", dump_json(j));

  detail::say(opt, csv);
  if (code != kExitOk) return code;
  return detail::any_failed(all) ? kExitMonitor : kExitOk;
}

// ---------------------------------------------------------------------------

/// Length/Area tables over disks. With `hyperbolic`, radii are hyperbolic
/// radii R and the reference coth(R/2) (constant curvature -1) is reported.
inline int cmd_cheeger(const ScenarioConfig& c, const CliOptions& opt) {
  std::vector<double> radii = c.cheeger_radii;
  const bool disk = c.domain.kind == DomainKind::disk;
  if (radii.empty()) {
    const auto g = make_grid(c);
    if (g.dim != 2) throw ConfigError("cheeger: needs a two-dimensional domain");
    const double ratio = cheeger_ratio(g);
    std::string csv = "radius,length,area,ratio\n";
    csv += format_double(disk ? disk_chart_radius(c) : std::numeric_limits<double>::quiet_NaN()) + ',' +
           format_double(g.boundary_length()) + ',' + format_double(g.total_volume()) + ',' + format_double(ratio) +
           '\n';
    write_file_atomic(detail::out_dir(c, opt) / "cheeger.csv", csv);
    detail::say(opt, csv);
    return kExitOk;
  }
  if (!disk) throw ConfigError("cheeger.radii: needs a disk domain");
  std::string csv = "radius,chart_radius,length,area,ratio,reference,relative_error\n";
  for (double r : radii) {
    ScenarioConfig ci = c;
    if (c.cheeger_hyperbolic) {
      ci.domain.hyperbolic_radius = r;
    } else {
      ci.domain.hyperbolic_radius.reset();
      ci.domain.radius = r;
    }
    const auto g = make_grid(ci);
    const double ratio = cheeger_ratio(g);
    const double ref = c.cheeger_hyperbolic ? 1.0 / std::tanh(0.5 * r) : std::numeric_limits<double>::quiet_NaN();
    csv += format_double(r) + ',' + format_double(disk_chart_radius(ci)) + ',' + format_double(g.boundary_length()) +
           ',' + format_double(g.total_volume()) + ',' + format_double(ratio) + ',' + format_double(ref) + ',' +
           format_double(std::abs(ratio - ref) / ref) + '\n';
  }
  write_file_atomic(detail::out_dir(c, opt) / "cheeger.csv", csv);
  detail::say(opt, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Loads the config, dispatches, and maps errors to exit codes; failures
/// leave error.json in the output directory.
inline int run_command(const std::string& name, const CliOptions& opt) {
  std::filesystem::path dir = opt.out.empty() ? std::filesystem::path("out") : std::filesystem::path(opt.out);
  auto fail = [&](const std::string& kind, int code, const std::string& msg, const std::vector<std::string>& v = {}) {
    std::cerr << "error (" << kind << "): " << msg << "\n";
    try {
      write_file_atomic(dir / "error.json", dump_json(error_json(kind, code, msg, v)));
    } catch (const std::exception&) {
    }
    return code;
  };
  try {
    const auto c = parse_config(opt.config);
    dir = detail::out_dir(c, opt);
    if (name == "flow") return cmd_flow(c, opt);
    if (name == "translator") return cmd_translator(c, opt);
    if (name == "verify") return cmd_verify(c, opt);
    if (name == "sweep") return cmd_sweep(c, opt);
    if (name == "cheeger") return cmd_cheeger(c, opt);
    return fail("config_error", kExitConfig, "unknown subcommand '" + name + "'");
  } catch (const ValidationError& e) {
    return fail(e.kind(), kExitConfig, e.what(), e.violations());
  } catch (const ConfigError& e) {
    return fail(e.kind(), kExitConfig, e.what());
  } catch (const ContractViolation& e) {
    return fail(e.kind(), kExitConfig, e.what());
  } catch (const Error& e) {
    return fail(e.kind(), kExitSolver, e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", kExitSolver, e.what());
  }
}

}  // namespace mcflab
