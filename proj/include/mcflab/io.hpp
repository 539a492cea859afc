#pragma once

// Output formatting: shortest round-trip decimal floats, CSV and JSON with a
// fixed key order, atomic file writes, and the trajectory CSV reader.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "mcflab/diagnostics.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/translator.hpp"

namespace mcflab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf" otherwise.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("malformed number '" + s + "'");
  }
  return v;
}

/// JSON number, or null for non-finite values.
inline Json jnum(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Trajectory CSV

inline constexpr const char* kTrajectoryHeader = "t,dt,mean_u,max_abs_ut,max_w,energy,bc_residual";

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (const auto& r : traj.series) {
    for (double v : {r.t, r.dt, r.mean_u, r.max_abs_ut, r.max_w, r.energy}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(r.bc_residual);
    out += '\n';
  }
  return out;
}

/// Reads a trajectory CSV. Columns not stored there (dissipation, u range)
/// come back as NaN.
inline std::vector<FlowScalars> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read trajectory file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw ConfigError("trajectory file " + path.string() + " lacks the header " + kTrajectoryHeader);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<FlowScalars> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_double(cell));
    if (v.size() != 7) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 7 columns");
    }
    FlowScalars r;
    r.t = v[0];
    r.dt = v[1];
    r.mean_u = v[2];
    r.max_abs_ut = v[3];
    r.max_w = v[4];
    r.energy = v[5];
    r.bc_residual = v[6];
    r.dissipation = nan;
    r.min_u = nan;
    r.max_u = nan;
    r.mean_ut = nan;
    r.spread_ut = nan;
    rows.push_back(r);
  }
  return rows;
}

/// Node coordinates, u and w of a translator profile.
inline std::string profile_csv(const DomainGrid& g, std::span<const double> u, std::span<const double> w) {
  std::string out = "i,j,q1,q2,u,w\n";
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const int p = g.node(i, j);
      out += std::to_string(i) + ',' + std::to_string(j) + ',' + format_double(g.q1[i]) + ',' +
             format_double(g.dim == 2 ? g.q2[j] : 0.0) + ',' + format_double(u[p]) + ',' + format_double(w[p]) +
             '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const Verdict& v) {
  Json j;
  j["monitor"] = v.monitor;
  j["status"] = to_string(v.status);
  j["margin"] = jnum(v.margin);
  j["located_t"] = v.located_t ? jnum(*v.located_t) : Json(nullptr);
  j["detail"] = v.detail;
  return j;
}

inline Json to_json(const RunReport& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["fingerprint"] = r.fingerprint;
  j["speed_estimate"] = jnum(r.speed_estimate);
  j["all_passed"] = r.all_passed();
  Json vs = Json::array();
  for (const auto& v : r.verdicts) vs.push_back(to_json(v));
  j["verdicts"] = vs;
  Json cols = Json::array({"t", "max_abs_ut", "max_w", "energy", "osc_u_minus_Ct", "bc_residual"});
  Json rows = Json::array();
  for (const auto& s : r.series) {
    rows.push_back(Json::array({jnum(s.t), jnum(s.max_abs_ut), jnum(s.max_w), jnum(s.energy),
                                jnum(s.osc_u_minus_Ct), jnum(s.bc_residual)}));
  }
  j["series"] = {{"columns", cols}, {"rows", rows}};
  return j;
}

inline Json to_json(const TranslatorSolution& s) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["C"] = jnum(s.C);
  j["C_richardson"] = jnum(s.C_richardson);
  j["pde_residual"] = jnum(s.pde_residual);
  j["bc_residual"] = jnum(s.bc_residual);
  j["low_confidence"] = s.low_confidence;
  j["polish_iterations"] = s.polish_iterations;
  Json h = Json::array();
  for (const auto& e : s.history) {
    Json r;
    r["eps"] = jnum(e.eps);
    r["eps_mean_u"] = jnum(e.eps_mean_u);
    r["iterations"] = e.iterations;
    r["residual"] = jnum(e.residual);
    r["roundoff_limited"] = e.roundoff_limited;
    h.push_back(r);
  }
  j["continuation"] = h;
  return j;
}

inline Json error_json(const std::string& kind, int exit_code, const std::string& message,
                       const std::vector<std::string>& violations = {}) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["status"] = "error";
  j["kind"] = kind;
  j["exit_code"] = exit_code;
  j["message"] = message;
  j["violations"] = violations;
  return j;
}

}  // namespace mcflab
