/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

///////////////////////////////////////////////////////////////////////////////
//
// JSON scenarios and strategy files. Requires nlohmann/json (json.hpp).
//
// Matrices are nested arrays, row-major. A bare number is a 1x1 matrix and a
// flat array is a single row. Wherever a per-step sequence is accepted, a
// three-level array (one matrix per t) is read as the sequence and anything
// shallower is broadcast over t.
//
// Errors are reported as Error(kConfig) whose field is the dotted path of the
// offending entry; syntax errors carry "line L, column C".
//
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include "dlqg/core.hpp"
#include "dlqg/infostructure.hpp"
#include "dlqg/coordination.hpp"
#include "dlqg/plant.hpp"
#include "dlqg/solver.hpp"
#include "dlqg/tune.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dlqg {

using json = nlohmann::ordered_json;

struct Scenario {
  json source;
  PlantModel plant;
  MemoryProtocol protocol;
  std::optional<LocalGains> gains;
  std::uint64_t sim_seed = 0;
  int sim_rollouts = 1000;
  TuneOptions tune;
};

namespace io_detail {

[[noreturn]] inline void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kConfig, msg, field);
}

inline int depth(const json& j) {
  if (!j.is_array()) return 0;
  if (j.empty()) return 1;
  return 1 + depth(j.front());
}

inline const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path.empty() ? key : path + "." + key, "missing entry");
  return *it;
}

inline int to_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

inline double to_double(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

inline std::vector<int> to_int_list(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(to_int(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace io_detail

/// Reads a matrix; when rows/cols are non-negative the shape is enforced and
/// an empty array is accepted for shapes with a zero extent.
inline Mat matrix_from_json(const json& j, const std::string& field, int rows = -1,
                            int cols = -1) {
  using io_detail::fail;
  Mat m;
  if (j.is_number()) {
    m = Mat::Constant(1, 1, j.get<double>());
  } else if (!j.is_array()) {
    fail(field, "expected a matrix");
  } else if (j.empty()) {
    m = Mat(rows > 0 && cols == 0 ? rows : 0, cols > 0 && rows == 0 ? cols : 0);
    if (rows > 0 && cols > 0) fail(field, "empty matrix");
  } else if (!j.front().is_array()) {
    m.resize(1, static_cast<Eigen::Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c)
      m(0, static_cast<Eigen::Index>(c)) = io_detail::to_double(j[c], field);
  } else {
    const std::size_t nc = j.front().size();
    m.resize(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(nc));
    for (std::size_t r = 0; r < j.size(); ++r) {
      if (!j[r].is_array() || j[r].size() != nc) fail(field, "ragged matrix rows");
      for (std::size_t c = 0; c < nc; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            io_detail::to_double(j[r][c], field);
    }
  }
  if ((rows >= 0 && m.rows() != rows) || (cols >= 0 && m.cols() != cols)) {
    if (m.size() == 0 && (rows == 0 || cols == 0)) return Mat::Zero(rows, cols);
    fail(field, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!all_finite(m)) fail(field, "non-finite entry");
  return m;
}

/// One matrix per step, or a single matrix broadcast over all steps.
inline std::vector<Mat> sequence_from_json(const json& j, const std::string& field, int steps,
                                           int rows = -1, int cols = -1) {
  if (io_detail::depth(j) == 3) {
    if (static_cast<int>(j.size()) != steps)
      io_detail::fail(field, "expected " + std::to_string(steps) + " per-step matrices");
    std::vector<Mat> out;
    for (int t = 0; t < steps; ++t)
      out.push_back(matrix_from_json(j[t], field + "[" + std::to_string(t) + "]", rows, cols));
    return out;
  }
  return std::vector<Mat>(steps, matrix_from_json(j, field, rows, cols));
}

inline json matrix_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline json sequence_to_json(const std::vector<Mat>& seq) {
  json out = json::array();
  for (const auto& m : seq) out.push_back(matrix_to_json(m));
  return out;
}

inline PlantModel plant_from_json(const json& cfg) {
  using io_detail::member;
  PlantModel p;
  p.horizon = io_detail::to_int(member(cfg, "horizon", ""), "horizon");
  if (p.horizon < 1) io_detail::fail("horizon", "must be >= 1");
  const json& dims = member(cfg, "dims", "");
  p.state_dim = io_detail::to_int(member(dims, "d_x", "dims"), "dims.d_x");
  p.action_dims = io_detail::to_int_list(member(dims, "d_u", "dims"), "dims.d_u");
  p.obs_dims = io_detail::to_int_list(member(dims, "d_y", "dims"), "dims.d_y");
  const int n = static_cast<int>(p.action_dims.size());
  if (n < 1) io_detail::fail("dims.d_u", "at least one controller required");
  if (static_cast<int>(p.obs_dims.size()) != n) io_detail::fail("dims.d_y", "one entry per controller");
  const int T = p.horizon, dx = p.state_dim, du = p.total_action_dim();

  const json& dyn = member(cfg, "dynamics", "");
  p.A = sequence_from_json(member(dyn, "A", "dynamics"), "dynamics.A", T, dx, dx);
  p.B = sequence_from_json(member(dyn, "B", "dynamics"), "dynamics.B", T, dx, du);

  const json& cj = member(member(cfg, "observations", ""), "C", "observations");
  if (!cj.is_array() || static_cast<int>(cj.size()) != n)
    io_detail::fail("observations.C", "one entry per controller");
  for (int i = 0; i < n; ++i)
    p.C.push_back(sequence_from_json(cj[i], "observations.C[" + std::to_string(i) + "]", T,
                                     p.obs_dims[i], dx));

  const json& cost = member(cfg, "cost", "");
  p.Q = matrix_from_json(member(cost, "Q", "cost"), "cost.Q", dx, dx);
  p.R = matrix_from_json(member(cost, "R", "cost"), "cost.R", du, du);

  const json& noise = member(cfg, "noise", "");
  p.sigma_x = matrix_from_json(member(noise, "sigma_x", "noise"), "noise.sigma_x", dx, dx);
  p.sigma_w0 = matrix_from_json(member(noise, "sigma_w0", "noise"), "noise.sigma_w0", dx, dx);
  const json& sw = member(noise, "sigma_w", "noise");
  if (!sw.is_array() || static_cast<int>(sw.size()) != n)
    io_detail::fail("noise.sigma_w", "one entry per controller");
  for (int i = 0; i < n; ++i)
    p.sigma_w.push_back(matrix_from_json(sw[i], "noise.sigma_w[" + std::to_string(i) + "]",
                                         p.obs_dims[i], p.obs_dims[i]));
  p.validate();
  return p;
}

inline DelayGraph delay_graph_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) io_detail::fail(field, "expected a square integer matrix");
  DelayGraph g;
  for (std::size_t i = 0; i < j.size(); ++i)
    g.k.push_back(io_detail::to_int_list(j[i], field + "[" + std::to_string(i) + "]"));
  return g;
}

/// info_structure: {"kind": ..., parameters either inline or under "params"}.
inline MemoryProtocol protocol_from_json(const json& cfg, const PlantModel& p) {
  using io_detail::member;
  const json& info = member(cfg, "info_structure", "");
  const std::string kind_field = "info_structure.kind";
  const json& kj = member(info, "kind", "info_structure");
  if (!kj.is_string()) io_detail::fail(kind_field, "expected a string");
  const std::string kind = kj.get<std::string>();
  const json& params = info.contains("params") ? info["params"] : info;
  const std::string pp = info.contains("params") ? "info_structure.params" : "info_structure";

  if (kind == "symmetric_delay")
    return build_symmetric_delay(p, io_detail::to_int(member(params, "k", pp), pp + ".k"));
  if (kind == "asymmetric_delay")
    return build_asymmetric_delay(p,
                                  delay_graph_from_json(member(params, "delays", pp), pp + ".delays"));
  if (kind == "control_sharing") return build_control_sharing(p);
  if (kind == "one_sided") return build_one_sided(p);
  if (kind != "explicit") io_detail::fail(kind_field, "unknown kind '" + kind + "'");

  const int T = p.horizon, n = p.controllers();
  MemoryProtocol mp;
  mp.kind = ProtocolKind::kExplicit;
  mp.obs_dims = p.obs_dims;
  mp.action_dims = p.action_dims;
  mp.memory_dims = io_detail::to_int_list(member(params, "memory_dims", pp), pp + ".memory_dims");
  if (static_cast<int>(mp.memory_dims.size()) != n)
    io_detail::fail(pp + ".memory_dims", "one entry per controller");
  mp.strict = params.contains("strict") && params["strict"].is_boolean() &&
              params["strict"].get<bool>();
  const json& sd = member(params, "shared_dims", pp);
  std::vector<std::vector<int>> shared(T);
  if (io_detail::depth(sd) == 2) {
    if (static_cast<int>(sd.size()) != T)
      io_detail::fail(pp + ".shared_dims", "expected one list per step");
    for (int t = 0; t < T; ++t)
      shared[t] = io_detail::to_int_list(sd[t], pp + ".shared_dims[" + std::to_string(t) + "]");
  } else {
    shared.assign(T, io_detail::to_int_list(sd, pp + ".shared_dims"));
  }
  const int dm = mp.total_memory_dim(), dy = p.total_obs_dim(), du = p.total_action_dim();
  auto seq = [&](const char* key, int rows, int cols, int t) -> Mat {
    const std::string field = pp + "." + key;
    if (!params.contains(key)) return Mat::Zero(rows, cols);
    const json& j = params[key];
    if (io_detail::depth(j) == 3) {
      if (static_cast<int>(j.size()) != T) io_detail::fail(field, "expected per-step matrices");
      return matrix_from_json(j[t], field + "[" + std::to_string(t) + "]", rows, cols);
    }
    return matrix_from_json(j, field, rows, cols);
  };
  for (int t = 0; t < T; ++t) {
    if (static_cast<int>(shared[t].size()) != n)
      io_detail::fail(pp + ".shared_dims", "one entry per controller");
    ProtocolStep s;
    s.shared_dims = shared[t];
    int dz = 0;
    for (int d : s.shared_dims) dz += d;
    s.mm = seq("mm", dm, dm, t);
    s.my = seq("my", dm, dy, t);
    s.mu = seq("mu", dm, du, t);
    s.zm = seq("zm", dz, dm, t);
    s.zy = seq("zy", dz, dy, t);
    s.zu = seq("zu", dz, du, t);
    mp.steps.push_back(std::move(s));
  }
  return mp;
}

/// Gains as stacked per-step matrices (or one broadcast matrix); entries
/// outside the controller blocks must be zero.
inline LocalGains gains_from_json(const json& j, const PlantModel& p, const MemoryProtocol& mp,
                                  const std::string& path = "gains") {
  using io_detail::member;
  const int T = p.horizon, n = p.controllers();
  const int dm = mp.total_memory_dim();
  const auto g = sequence_from_json(member(j, "G", path), path + ".G", T, p.total_action_dim(),
                                    p.total_obs_dim());
  std::vector<Mat> h;
  if (j.contains("H"))
    h = sequence_from_json(j["H"], path + ".H", T, p.total_action_dim(), dm);
  else
    h.assign(T, Mat::Zero(p.total_action_dim(), dm));
  LocalGains lg;
  for (int t = 0; t < T; ++t) {
    std::vector<Mat> gt, ht;
    Mat gres = g[t], hres = h[t];
    for (int i = 0; i < n; ++i) {
      const int ro = p.action_offset(i), du = p.action_dims[i];
      gt.push_back(g[t].block(ro, p.obs_offset(i), du, p.obs_dims[i]));
      ht.push_back(h[t].block(ro, mp.memory_offset(i), du, mp.memory_dims[i]));
      gres.block(ro, p.obs_offset(i), du, p.obs_dims[i]).setZero();
      hres.block(ro, mp.memory_offset(i), du, mp.memory_dims[i]).setZero();
    }
    if (gres.size() && gres.cwiseAbs().maxCoeff() != 0.0)
      io_detail::fail(path + ".G", "nonzero entry outside the controller blocks");
    if (hres.size() && hres.cwiseAbs().maxCoeff() != 0.0)
      io_detail::fail(path + ".H", "nonzero entry outside the controller blocks");
    lg.G.push_back(std::move(gt));
    lg.H.push_back(std::move(ht));
  }
  return lg;
}

inline json gains_to_json(const LocalGains& lg) {
  json out;
  std::vector<Mat> g, h;
  for (int t = 1; t <= lg.horizon(); ++t) {
    g.push_back(lg.G_at(t));
    h.push_back(lg.H_at(t));
  }
  out["G"] = sequence_to_json(g);
  out["H"] = sequence_to_json(h);
  return out;
}

inline Scenario scenario_from_json(const json& cfg) {
  Scenario sc;
  sc.source = cfg;
  if (!cfg.is_object()) io_detail::fail("", "configuration must be a JSON object");
  sc.plant = plant_from_json(cfg);
  sc.protocol = protocol_from_json(cfg, sc.plant);
  if (cfg.contains("gains") && !cfg["gains"].is_null())
    sc.gains = gains_from_json(cfg["gains"], sc.plant, sc.protocol);
  if (cfg.contains("sim")) {
    const json& s = cfg["sim"];
    if (s.contains("seed")) sc.sim_seed = static_cast<std::uint64_t>(io_detail::to_int(s["seed"], "sim.seed"));
    if (s.contains("rollouts")) sc.sim_rollouts = io_detail::to_int(s["rollouts"], "sim.rollouts");
    if (sc.sim_rollouts < 1) io_detail::fail("sim.rollouts", "must be >= 1");
  }
  if (cfg.contains("tune")) {
    const json& t = cfg["tune"];
    if (t.contains("budget")) sc.tune.budget = io_detail::to_int(t["budget"], "tune.budget");
    if (t.contains("restarts")) sc.tune.restarts = io_detail::to_int(t["restarts"], "tune.restarts");
    if (t.contains("seed")) sc.tune.seed = static_cast<std::uint64_t>(io_detail::to_int(t["seed"], "tune.seed"));
    if (sc.tune.budget < 1) io_detail::fail("tune.budget", "must be >= 1");
    if (sc.tune.restarts < 0) io_detail::fail("tune.restarts", "must be >= 0");
  }
  return sc;
}

/// Parses text, turning syntax errors into kConfig with a line/column field.
inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kConfig, "JSON syntax error",
                "line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open file", path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(parse_json_text(read_text_file(path)));
}

// ---------------------------------------------------------------------------
// Protocol and strategy export
// ---------------------------------------------------------------------------

inline json protocol_to_json(const MemoryProtocol& mp) {
  json out;
  out["kind"] = to_string(mp.kind);
  out["delay"] = mp.delay;
  out["strict"] = mp.strict;
  if (!mp.note.empty()) out["note"] = mp.note;
  out["memory_dims"] = mp.memory_dims;
  json steps = json::array();
  for (int t = 1; t <= mp.horizon(); ++t) {
    const auto& s = mp.step(t);
    json js;
    js["t"] = t;
    js["shared_dims"] = s.shared_dims;
    js["mm"] = matrix_to_json(s.mm);
    js["my"] = matrix_to_json(s.my);
    js["mu"] = matrix_to_json(s.mu);
    js["zm"] = matrix_to_json(s.zm);
    js["zy"] = matrix_to_json(s.zy);
    js["zu"] = matrix_to_json(s.zu);
    steps.push_back(std::move(js));
  }
  out["steps"] = std::move(steps);
  return out;
}

/// Strategy file: the scenario it was solved for plus every gain needed to
/// run the controller (G, H, K, L, filter gains) and the predicted cost.
inline json strategy_to_json(const Scenario& sc, const SolvedStrategy& ss) {
  json out;
  out["format"] = "dlqg-strategy";
  out["version"] = 1;
  json cfg = sc.source;
  cfg.erase("gains");
  out["config"] = std::move(cfg);
  out["J"] = ss.J;
  out["gains"] = gains_to_json(ss.gains);
  out["K"] = sequence_to_json(ss.K);
  out["L"] = sequence_to_json(ss.L);
  out["filter_gain"] = sequence_to_json(ss.filter_gain);
  return out;
}

struct LoadedStrategy {
  Scenario scenario;
  SolvedStrategy strategy;
};

/// Rebuilds the coordinated system from the embedded config and gains and
/// takes the coordinator and filter gains from the file; nothing is re-solved.
inline LoadedStrategy strategy_from_json(const json& j) {
  using io_detail::member;
  if (!j.is_object() || !j.contains("format") || j["format"] != "dlqg-strategy")
    io_detail::fail("format", "not a dlqg strategy file");
  LoadedStrategy out;
  out.scenario = scenario_from_json(member(j, "config", ""));
  const auto& p = out.scenario.plant;
  const auto& mp = out.scenario.protocol;
  auto& ss = out.strategy;
  ss.gains = gains_from_json(member(j, "gains", ""), p, mp);
  out.scenario.gains = ss.gains;
  ss.cs = build_coordinated(p, mp, ss.gains);
  const int T = p.horizon, n = ss.cs.state_dim, du = ss.cs.d_u;
  ss.J = io_detail::to_double(member(j, "J", ""), "J");
  const json& kj = member(j, "K", "");
  const json& fj = member(j, "filter_gain", "");
  if (!kj.is_array() || static_cast<int>(kj.size()) != T) io_detail::fail("K", "one gain per step");
  if (!fj.is_array() || static_cast<int>(fj.size()) != T)
    io_detail::fail("filter_gain", "one gain per step");
  for (int t = 0; t < T; ++t) {
    ss.K.push_back(matrix_from_json(kj[t], "K[" + std::to_string(t) + "]", du, n));
    ss.filter_gain.push_back(matrix_from_json(fj[t], "filter_gain[" + std::to_string(t) + "]",
                                              n, ss.cs.obs_dim(t + 2)));
  }
  ss.L = reduce_gains(ss.K, p, ss.cs.d_m);
  return out;
}

}  // namespace dlqg
