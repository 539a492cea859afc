#pragma once

// Declarative scenario configuration (YAML). Parsing validates the whole
// file and reports every violation with its key path.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mcflab/contact_angle.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/fields.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/metric.hpp"
#include "mcflab/oracle.hpp"
#include "mcflab/translator.hpp"

namespace mcflab {

/// Configuration error carrying every violation found.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<std::string> v) : ConfigError(join(v)), violations_(std::move(v)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& x : v) s += "\n  " + x;
    return s;
  }
  std::vector<std::string> violations_;
};

struct MetricConfig {
  std::string name = "euclidean";
  std::vector<double> coefficients;  // custom_conformal / custom_warp
};

struct DomainConfig {
  DomainKind kind = DomainKind::interval;
  double lo = -1.0, hi = 1.0;        // interval
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;  // rectangle
  double r_in = 0.1, r_out = 1.0;    // annulus
  double radius = 0.5;               // disk, chart units
  std::optional<double> hyperbolic_radius;
  std::optional<double> r_min;
};

struct InitialConfig {
  std::string kind = "zero";  // zero constant affine bump compatible_bump random_smooth exact
  double value = 0.0;
  std::vector<double> coef{0.0, 0.0, 0.0};
  double amplitude = 0.0;
  int modes = 3;
  std::string exact = "grim_reaper";  // grim_reaper | tilted_minimal
  double slope = 0.0;
  double bump = 0.0;  // compatible bump added to the exact solution
};

struct SweepConfig {
  std::string parameter;  // radius hyperbolic_radius phi resolution amplitude
  std::vector<double> values;
  std::string mode = "translator";  // translator | flow
};

struct ScenarioConfig {
  std::string name = "scenario";
  MetricConfig metric;
  DomainConfig domain;
  Resolution resolution{64, 64};
  ContactAngleSpec phi;
  InitialConfig initial;
  FlowParams flow;
  TranslatorOptions translator;
  double energy_constant = kEnergyConstant;
  double ut_rel_tol = 1e-6;
  std::optional<std::string> trajectory;  // verify a recorded trajectory CSV
  std::optional<SweepConfig> sweep;
  std::vector<double> cheeger_radii;
  bool cheeger_hyperbolic = false;
  std::uint64_t seed = 7;
  std::string output = "out";
  std::string fingerprint;
  std::filesystem::path base_dir;
};

// ---------------------------------------------------------------------------

inline MetricField make_metric(const MetricConfig& m) {
  if (m.name == "euclidean") return MetricField::euclidean();
  if (m.name == "poincare_disk") return metrics::poincare_disk();
  if (m.name == "hyperbolic_halfplane") return metrics::hyperbolic_halfplane();
  if (m.name == "sphere") return metrics::sphere();
  if (m.name == "hyperbolic_polar") return metrics::hyperbolic_polar();
  if (m.name == "custom_conformal") return metrics::custom_conformal(m.coefficients);
  if (m.name == "custom_warp") return metrics::custom_warp(m.coefficients);
  throw ConfigError("unknown metric '" + m.name + "'");
}

/// Chart radius of a disk: Poincare balls of hyperbolic radius R have r0 = tanh(R/2);
/// geodesic polar metrics use R directly.
inline double disk_chart_radius(const ScenarioConfig& c) {
  if (!c.domain.hyperbolic_radius) return c.domain.radius;
  const double R = *c.domain.hyperbolic_radius;
  if (c.metric.name == "poincare_disk") return std::tanh(0.5 * R);
  return R;
}

inline DomainSpec make_domain(const ScenarioConfig& c) {
  const auto& d = c.domain;
  switch (d.kind) {
    case DomainKind::interval: return DomainSpec::interval(d.lo, d.hi);
    case DomainKind::rectangle: return DomainSpec::rectangle(d.x0, d.x1, d.y0, d.y1);
    case DomainKind::annulus: return DomainSpec::annulus(d.r_in, d.r_out);
    case DomainKind::disk: return DomainSpec::disk(disk_chart_radius(c), d.r_min);
  }
  throw ConfigError("unknown domain kind");
}

inline DomainGrid make_grid(const ScenarioConfig& c) {
  return build_grid(make_domain(c), c.resolution, make_metric(c.metric));
}

inline std::vector<double> make_initial(const ScenarioConfig& c, const DomainGrid& g) {
  const auto& u = c.initial;
  if (u.kind == "zero") return constant_field(g, 0.0);
  if (u.kind == "constant") return constant_field(g, u.value);
  if (u.kind == "affine") return affine_field(g, u.coef[0], u.coef[1], u.coef[2]);
  if (u.kind == "bump") return bump_field(g, u.amplitude);
  if (u.kind == "compatible_bump") return compatible_bump(g, u.amplitude);
  if (u.kind == "random_smooth") return random_smooth_field(g, u.amplitude, c.seed, u.modes);
  if (u.kind == "exact") {
    if (g.dim != 1) throw ConfigError("initial.exact needs an interval domain");
    const auto ex = u.exact == "grim_reaper" ? grim_reaper(g.q1.back()) : tilted_minimal(u.slope);
    auto v = ex.sample(g);
    if (u.bump != 0.0) {
      const auto b = compatible_bump(g, u.bump);
      for (std::size_t p = 0; p < v.size(); ++p) v[p] += b[p];
    }
    return v;
  }
  throw ConfigError("unknown initial kind '" + u.kind + "'");
}

// ---------------------------------------------------------------------------

namespace detail {

class Reader {
 public:
  std::vector<std::string> errors;

  void keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!n) return;
    if (!n.IsMap()) {
      errors.push_back(path + ": expected a mapping");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (!ok.count(k)) errors.push_back(join(path, k) + ": unknown key");
    }
  }

  template <class T>
  bool get(const YAML::Node& n, const std::string& path, const char* key, T& out) {
    if (!n || !n.IsMap() || !n[key]) return false;
    try {
      out = n[key].as<T>();
      return true;
    } catch (const YAML::Exception&) {
      errors.push_back(join(path, key) + ": wrong type");
      return false;
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline std::optional<Segment> parse_segment(const std::string& s) {
  for (Segment seg : {Segment::left, Segment::right, Segment::bottom, Segment::top, Segment::inner, Segment::outer}) {
    if (s == to_string(seg)) return seg;
  }
  return std::nullopt;
}

}  // namespace detail

/// Parses and validates a scenario from YAML text. base_dir resolves relative paths.
inline ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError({std::string("syntax: ") + e.what()});
  }
  if (!root || !root.IsMap()) throw ValidationError({"<root>: expected a mapping"});

  detail::Reader rd;
  ScenarioConfig c;
  c.base_dir = base_dir;
  c.fingerprint = [&] {
    std::ostringstream os;
    os << std::hex << detail::fnv1a(text);
    return os.str();
  }();

  rd.keys(root, "", {"name", "metric", "domain", "resolution", "contact_angle", "initial", "flow", "translator",
                     "monitors", "verify", "sweep", "cheeger", "seed", "output"});
  rd.get(root, "", "name", c.name);
  rd.get(root, "", "output", c.output);
  rd.get(root, "", "seed", c.seed);

  // metric
  if (const auto m = root["metric"]) {
    rd.keys(m, "metric", {"name", "coefficients"});
    rd.get(m, "metric", "name", c.metric.name);
    rd.get(m, "metric", "coefficients", c.metric.coefficients);
    static const std::set<std::string> names{"euclidean", "poincare_disk", "hyperbolic_halfplane", "sphere",
                                             "hyperbolic_polar", "custom_conformal", "custom_warp"};
    if (!names.count(c.metric.name)) rd.errors.push_back("metric.name: unknown metric '" + c.metric.name + "'");
    if ((c.metric.name == "custom_conformal" || c.metric.name == "custom_warp") && c.metric.coefficients.empty()) {
      rd.errors.push_back("metric.coefficients: required for " + c.metric.name);
    }
  }

  // domain
  if (const auto d = root["domain"]) {
    rd.keys(d, "domain", {"kind", "lo", "hi", "x", "y", "r_in", "r_out", "radius", "hyperbolic_radius", "r_min"});
    std::string kind = "interval";
    rd.get(d, "domain", "kind", kind);
    if (kind == "interval") {
      c.domain.kind = DomainKind::interval;
      rd.get(d, "domain", "lo", c.domain.lo);
      rd.get(d, "domain", "hi", c.domain.hi);
      if (!(c.domain.hi > c.domain.lo)) rd.errors.push_back("domain.hi: must exceed domain.lo");
    } else if (kind == "rectangle") {
      c.domain.kind = DomainKind::rectangle;
      std::vector<double> x{0.0, 1.0}, y{0.0, 1.0};
      rd.get(d, "domain", "x", x);
      rd.get(d, "domain", "y", y);
      if (x.size() != 2 || !(x[1] > x[0])) rd.errors.push_back("domain.x: expected [x0, x1] with x1 > x0");
      if (y.size() != 2 || !(y[1] > y[0])) rd.errors.push_back("domain.y: expected [y0, y1] with y1 > y0");
      if (x.size() == 2 && y.size() == 2) {
        c.domain.x0 = x[0];
        c.domain.x1 = x[1];
        c.domain.y0 = y[0];
        c.domain.y1 = y[1];
      }
    } else if (kind == "annulus") {
      c.domain.kind = DomainKind::annulus;
      rd.get(d, "domain", "r_in", c.domain.r_in);
      rd.get(d, "domain", "r_out", c.domain.r_out);
      if (!(c.domain.r_in > 0.0 && c.domain.r_out > c.domain.r_in)) {
        rd.errors.push_back("domain.r_in: need 0 < r_in < r_out");
      }
    } else if (kind == "disk") {
      c.domain.kind = DomainKind::disk;
      rd.get(d, "domain", "radius", c.domain.radius);
      double R = 0.0;
      if (rd.get(d, "domain", "hyperbolic_radius", R)) c.domain.hyperbolic_radius = R;
      double rm = 0.0;
      if (rd.get(d, "domain", "r_min", rm)) c.domain.r_min = rm;
      if (!(disk_chart_radius(c) > 0.0)) rd.errors.push_back("domain.radius: must be positive");
    } else {
      rd.errors.push_back("domain.kind: unknown domain '" + kind + "'");
    }
  }

  // resolution
  if (const auto r = root["resolution"]) {
    std::vector<int> n;
    if (r.IsScalar()) {
      try {
        n = {r.as<int>()};
      } catch (const YAML::Exception&) {
        rd.errors.push_back("resolution: wrong type");
      }
    } else {
      rd.get(root, "", "resolution", n);
    }
    if (!n.empty()) {
      c.resolution.n1 = n[0];
      c.resolution.n2 = n.size() > 1 ? n[1] : n[0];
      if (n.size() > 2) rd.errors.push_back("resolution: at most two entries");
      const int lim = c.domain.kind == DomainKind::interval ? 20000 : 512;
      if (c.resolution.n1 < 8 || c.resolution.n2 < 8 || c.resolution.n1 > lim || c.resolution.n2 > lim) {
        rd.errors.push_back("resolution: cells per axis must lie in [8, " + std::to_string(lim) + "]");
      }
    }
  }

  // contact angle
  if (const auto p = root["contact_angle"]) {
    rd.keys(p, "contact_angle", {"kind", "value", "values", "cos", "sin", "slope_u", "bound"});
    std::string kind = "constant";
    rd.get(p, "contact_angle", "kind", kind);
    auto& s = c.phi;
    rd.get(p, "contact_angle", "value", s.value);
    if (!rd.get(p, "contact_angle", "bound", s.phi0)) {
      rd.errors.push_back("contact_angle.bound: required (declared Phi0 with |Phi| <= Phi0 < 1)");
    }
    if (kind == "constant") {
      s.kind = PhiKind::constant;
    } else if (kind == "segments") {
      s.kind = PhiKind::segments;
      std::map<std::string, double> vals;
      if (rd.get(p, "contact_angle", "values", vals)) {
        for (const auto& [k, v] : vals) {
          const auto seg = detail::parse_segment(k);
          if (!seg) {
            rd.errors.push_back("contact_angle.values." + k + ": unknown boundary segment");
          } else {
            s.segment_values[*seg] = v;
          }
        }
      } else {
        rd.errors.push_back("contact_angle.values: required for segments");
      }
    } else if (kind == "trig") {
      s.kind = PhiKind::trig;
      rd.get(p, "contact_angle", "cos", s.cos_coef);
      rd.get(p, "contact_angle", "sin", s.sin_coef);
    } else if (kind == "affine_u") {
      s.kind = PhiKind::affine_u;
      rd.get(p, "contact_angle", "slope_u", s.slope_u);
    } else {
      rd.errors.push_back("contact_angle.kind: unknown kind '" + kind + "'");
    }
    if (!(s.phi0 >= 0.0 && s.phi0 < 1.0)) {
      std::ostringstream os;
      os << "contact_angle.bound: Phi0 = " << s.phi0 << " violates |Phi| <= Phi0 < 1";
      rd.errors.push_back(os.str());
    }
  } else {
    rd.errors.push_back("contact_angle: required");
  }

  // initial data
  if (const auto u = root["initial"]) {
    rd.keys(u, "initial", {"kind", "value", "coef", "amplitude", "modes", "exact", "slope", "bump"});
    auto& i = c.initial;
    rd.get(u, "initial", "kind", i.kind);
    rd.get(u, "initial", "value", i.value);
    rd.get(u, "initial", "coef", i.coef);
    rd.get(u, "initial", "amplitude", i.amplitude);
    rd.get(u, "initial", "modes", i.modes);
    rd.get(u, "initial", "exact", i.exact);
    rd.get(u, "initial", "slope", i.slope);
    rd.get(u, "initial", "bump", i.bump);
    static const std::set<std::string> kinds{"zero", "constant", "affine", "bump", "compatible_bump",
                                             "random_smooth", "exact"};
    if (!kinds.count(i.kind)) rd.errors.push_back("initial.kind: unknown kind '" + i.kind + "'");
    if (i.coef.size() != 3) rd.errors.push_back("initial.coef: expected [c0, c1, c2]");
    if (i.exact != "grim_reaper" && i.exact != "tilted_minimal") {
      rd.errors.push_back("initial.exact: unknown exact solution '" + i.exact + "'");
    }
    if (i.kind == "exact" && c.domain.kind != DomainKind::interval) {
      rd.errors.push_back("initial.exact: exact solutions live on intervals");
    }
  }

  // flow
  if (const auto f = root["flow"]) {
    rd.keys(f, "flow", {"t_end", "c_safe", "cadence", "stop_tol", "stop_at_translator", "max_steps", "dt",
                        "w_refresh"});
    auto& p = c.flow;
    rd.get(f, "flow", "t_end", p.t_end);
    rd.get(f, "flow", "c_safe", p.c_safe);
    rd.get(f, "flow", "cadence", p.cadence);
    rd.get(f, "flow", "stop_tol", p.stop_tol);
    rd.get(f, "flow", "stop_at_translator", p.stop_at_translator);
    rd.get(f, "flow", "max_steps", p.max_steps);
    rd.get(f, "flow", "w_refresh", p.w_refresh);
    double dt = 0.0;
    if (rd.get(f, "flow", "dt", dt)) p.dt_fixed = dt;
    if (!(p.t_end > 0.0)) rd.errors.push_back("flow.t_end: must be positive");
    if (!(p.c_safe > 0.0 && p.c_safe <= 0.5)) rd.errors.push_back("flow.c_safe: must lie in (0, 0.5]");
    if (p.cadence < 1) rd.errors.push_back("flow.cadence: must be >= 1");
    if (p.w_refresh < 1) rd.errors.push_back("flow.w_refresh: must be >= 1");
    if (!(p.stop_tol > 0.0)) rd.errors.push_back("flow.stop_tol: must be positive");
    if (p.max_steps < 1) rd.errors.push_back("flow.max_steps: must be >= 1");
    if (p.dt_fixed && !(*p.dt_fixed > 0.0)) rd.errors.push_back("flow.dt: must be positive");
  }

  // translator
  if (const auto t = root["translator"]) {
    rd.keys(t, "translator", {"eps", "tol_newton", "tol_ell", "max_newton"});
    auto& o = c.translator;
    rd.get(t, "translator", "eps", o.eps_schedule);
    rd.get(t, "translator", "tol_newton", o.tol_newton);
    rd.get(t, "translator", "tol_ell", o.tol_ell);
    rd.get(t, "translator", "max_newton", o.max_newton);
    bool ok = o.eps_schedule.size() >= 2;
    for (std::size_t k = 0; k < o.eps_schedule.size(); ++k) {
      ok = ok && o.eps_schedule[k] > 0.0 && (k == 0 || o.eps_schedule[k] < o.eps_schedule[k - 1]);
    }
    if (!ok) rd.errors.push_back("translator.eps: need at least two positive, strictly decreasing values");
    if (!(o.tol_newton > 0.0)) rd.errors.push_back("translator.tol_newton: must be positive");
    if (!(o.tol_ell > 0.0)) rd.errors.push_back("translator.tol_ell: must be positive");
    if (o.max_newton < 1) rd.errors.push_back("translator.max_newton: must be >= 1");
  }

  // monitors
  if (const auto m = root["monitors"]) {
    rd.keys(m, "monitors", {"energy_constant", "ut_rel_tol"});
    rd.get(m, "monitors", "energy_constant", c.energy_constant);
    rd.get(m, "monitors", "ut_rel_tol", c.ut_rel_tol);
  }

  // verify
  if (const auto v = root["verify"]) {
    rd.keys(v, "verify", {"trajectory"});
    std::string path;
    if (rd.get(v, "verify", "trajectory", path)) c.trajectory = path;
  }

  // sweep
  if (const auto s = root["sweep"]) {
    rd.keys(s, "sweep", {"parameter", "values", "mode"});
    SweepConfig sw;
    rd.get(s, "sweep", "parameter", sw.parameter);
    rd.get(s, "sweep", "values", sw.values);
    rd.get(s, "sweep", "mode", sw.mode);
    static const std::set<std::string> params{"radius", "hyperbolic_radius", "phi", "resolution", "amplitude"};
    if (!params.count(sw.parameter)) rd.errors.push_back("sweep.parameter: unknown parameter '" + sw.parameter + "'");
    if (sw.values.empty()) rd.errors.push_back("sweep.values: at least one value required");
    if (sw.mode != "translator" && sw.mode != "flow") rd.errors.push_back("sweep.mode: translator or flow");
    c.sweep = sw;
  }

  // cheeger
  if (const auto ch = root["cheeger"]) {
    rd.keys(ch, "cheeger", {"radii", "hyperbolic"});
    rd.get(ch, "cheeger", "radii", c.cheeger_radii);
    rd.get(ch, "cheeger", "hyperbolic", c.cheeger_hyperbolic);
  }

  // Cross checks that need a grid: resolution limits, chart, |Phi| samples.
  if (rd.errors.empty()) {
    try {
      const auto g = make_grid(c);
      evaluate_contact_angle(c.phi, g, make_initial(c, g));
    } catch (const Error& e) {
      rd.errors.push_back(e.what());
    }
  }
  if (!rd.errors.empty()) throw ValidationError(rd.errors);
  return c;
}

inline ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({"cannot read config file " + path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

}  // namespace mcflab
