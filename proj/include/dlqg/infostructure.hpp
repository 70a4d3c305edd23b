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
// Memory protocols. After acting at time t, controller i forwards
//
//   Z^i_t     = P_zm M^i_t + P_zy Y^i_t + P_zu U^i_t      (to shared memory)
//   M^i_{t+1} = P_mm M^i_t + P_my Y^i_t + P_mu U^i_t      (kept locally)
//
// Blocks are stored stacked over controllers. Strict protocols are block
// diagonal with 0/1 blocks whose per-controller 2x3 arrangement is doubly
// stochastic; generalized protocols allow arbitrary stacked matrices.
//
// Local memory dimensions are constant in t; M_1 is the zero vector.
// Shared increments may change size from step to step.
//
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include "dlqg/core.hpp"
#include "dlqg/plant.hpp"

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dlqg {

enum class ProtocolKind {
  kSymmetricDelay,
  kAsymmetricDelay,
  kControlSharing,
  kOneSided,
  kExplicit,
};

inline const char* to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::kSymmetricDelay: return "symmetric_delay";
    case ProtocolKind::kAsymmetricDelay: return "asymmetric_delay";
    case ProtocolKind::kControlSharing: return "control_sharing";
    case ProtocolKind::kOneSided: return "one_sided";
    case ProtocolKind::kExplicit: return "explicit";
  }
  return "unknown";
}

/// Stacked update blocks for one time step.
struct ProtocolStep {
  Mat mm, my, mu;  // memory update
  Mat zm, zy, zu;  // shared increment
  std::vector<int> shared_dims;  // d_z^i at this step
};

struct MemoryProtocol {
  ProtocolKind kind = ProtocolKind::kExplicit;
  int delay = 0;  // k for symmetric delay, k* for asymmetric delay
  bool strict = false;
  std::string note;
  std::vector<int> obs_dims;
  std::vector<int> action_dims;
  std::vector<int> memory_dims;
  std::vector<ProtocolStep> steps;  // [t-1]

  int controllers() const { return static_cast<int>(memory_dims.size()); }
  int horizon() const { return static_cast<int>(steps.size()); }
  int total_memory_dim() const {
    return std::accumulate(memory_dims.begin(), memory_dims.end(), 0);
  }
  int total_obs_dim() const { return std::accumulate(obs_dims.begin(), obs_dims.end(), 0); }
  int total_action_dim() const {
    return std::accumulate(action_dims.begin(), action_dims.end(), 0);
  }
  int memory_offset(int i) const {
    return std::accumulate(memory_dims.begin(), memory_dims.begin() + i, 0);
  }
  int shared_dim(int t) const {
    const auto& d = step(t).shared_dims;
    return std::accumulate(d.begin(), d.end(), 0);
  }
  int shared_offset(int t, int i) const {
    const auto& d = step(t).shared_dims;
    return std::accumulate(d.begin(), d.begin() + i, 0);
  }
  const ProtocolStep& step(int t) const {
    if (t < 1 || t > horizon())
      throw Error(ErrorCode::kTimeOutOfRange, "protocol step " + std::to_string(t));
    return steps[t - 1];
  }
};

enum class Block { kMM, kMY, kMU, kZM, kZY, kZU };

inline const char* to_string(Block b) {
  switch (b) {
    case Block::kMM: return "P_mm";
    case Block::kMY: return "P_my";
    case Block::kMU: return "P_mu";
    case Block::kZM: return "P_zm";
    case Block::kZY: return "P_zy";
    case Block::kZU: return "P_zu";
  }
  return "?";
}

namespace detail {

inline const Mat& stacked_block(const ProtocolStep& s, Block b) {
  switch (b) {
    case Block::kMM: return s.mm;
    case Block::kMY: return s.my;
    case Block::kMU: return s.mu;
    case Block::kZM: return s.zm;
    case Block::kZY: return s.zy;
    case Block::kZU: return s.zu;
  }
  return s.mm;
}

inline std::vector<int> offsets(const std::vector<int>& dims) {
  std::vector<int> out(dims.size() + 1, 0);
  std::partial_sum(dims.begin(), dims.end(), out.begin() + 1);
  return out;
}

// Row and column partitions of a stacked block.
inline std::pair<std::vector<int>, std::vector<int>> partitions(const MemoryProtocol& mp, int t,
                                                                Block b) {
  const auto& s = mp.step(t);
  const bool z_row = b == Block::kZM || b == Block::kZY || b == Block::kZU;
  const std::vector<int>& rows = z_row ? s.shared_dims : mp.memory_dims;
  switch (b) {
    case Block::kMM:
    case Block::kZM: return {rows, mp.memory_dims};
    case Block::kMY:
    case Block::kZY: return {rows, mp.obs_dims};
    case Block::kMU:
    case Block::kZU: return {rows, mp.action_dims};
  }
  return {rows, rows};
}

}  // namespace detail

/// Diagonal block of controller i (0-based) at time t.
inline Mat controller_block(const MemoryProtocol& mp, int i, int t, Block b) {
  const auto [rows, cols] = detail::partitions(mp, t, b);
  const auto ro = detail::offsets(rows);
  const auto co = detail::offsets(cols);
  return detail::stacked_block(mp.step(t), b).block(ro[i], co[i], rows[i], cols[i]);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string rule;  // "dims", "block-diagonal", "A1", "A2-row", "A2-col"
  int controller = -1;
  int t = 0;
  std::string block;
  int row = -1;
  int col = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool checked_strict = false;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& rule_prefix) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) {
      return v.rule.rfind(rule_prefix, 0) == 0;
    });
  }
  /// "A1 OK, A2 OK" style summary.
  std::string summary() const {
    std::ostringstream os;
    os << "dims " << (has("dims") ? "FAIL" : "OK");
    if (checked_strict) {
      os << ", block-diagonal " << (has("block-diagonal") ? "FAIL" : "OK");
      os << ", A1 " << (has("A1") ? "FAIL" : "OK");
      os << ", A2 " << (has("A2") ? "FAIL" : "OK");
    } else {
      os << ", A1/A2 skipped (generalized protocol)";
    }
    return os.str();
  }
};

enum class CheckMode { kAsDeclared, kForceStrict };

/// Lists every violated invariant. Dimension checks always run; the 0/1,
/// block-diagonal and doubly-stochastic checks run for strict protocols or
/// when forced.
inline ValidationReport validate(const MemoryProtocol& mp,
                                 CheckMode mode = CheckMode::kAsDeclared) {
  ValidationReport report;
  report.checked_strict = mp.strict || mode == CheckMode::kForceStrict;
  const int n = mp.controllers();
  auto add = [&](std::string rule, int i, int t, std::string block, int r, int c,
                 std::string msg) {
    report.violations.push_back({std::move(rule), i, t, std::move(block), r, c, std::move(msg)});
  };
  if (static_cast<int>(mp.obs_dims.size()) != n || static_cast<int>(mp.action_dims.size()) != n) {
    add("dims", -1, 0, "", -1, -1, "controller count mismatch between dims");
    return report;
  }
  const int dm = mp.total_memory_dim();
  const int dy = mp.total_obs_dim();
  const int du = mp.total_action_dim();
  bool dims_ok = true;
  for (int t = 1; t <= mp.horizon(); ++t) {
    const auto& s = mp.step(t);
    if (static_cast<int>(s.shared_dims.size()) != n) {
      add("dims", -1, t, "shared_dims", -1, -1, "one shared dimension per controller");
      dims_ok = false;
      continue;
    }
    const int dz = mp.shared_dim(t);
    auto check = [&](const Mat& m, int r, int c, Block b) {
      if (m.rows() != r || m.cols() != c) {
        std::ostringstream os;
        os << "expected " << r << "x" << c << ", got " << m.rows() << "x" << m.cols();
        add("dims", -1, t, to_string(b), -1, -1, os.str());
        dims_ok = false;
      } else if (!all_finite(m)) {
        add("dims", -1, t, to_string(b), -1, -1, "non-finite entry");
        dims_ok = false;
      }
    };
    check(s.mm, dm, dm, Block::kMM);
    check(s.my, dm, dy, Block::kMY);
    check(s.mu, dm, du, Block::kMU);
    check(s.zm, dz, dm, Block::kZM);
    check(s.zy, dz, dy, Block::kZY);
    check(s.zu, dz, du, Block::kZU);
  }
  if (!dims_ok || !report.checked_strict) return report;

  constexpr Block kAll[] = {Block::kMM, Block::kMY, Block::kMU,
                            Block::kZM, Block::kZY, Block::kZU};
  for (int t = 1; t <= mp.horizon(); ++t) {
    const auto& s = mp.step(t);
    for (Block b : kAll) {
      const auto [rows, cols] = detail::partitions(mp, t, b);
      const auto ro = detail::offsets(rows);
      const auto co = detail::offsets(cols);
      const Mat& m = detail::stacked_block(s, b);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          for (int r = 0; r < rows[i]; ++r)
            for (int c = 0; c < cols[j]; ++c) {
              const double v = m(ro[i] + r, co[j] + c);
              if (i != j && v != 0.0)
                add("block-diagonal", i, t, to_string(b), ro[i] + r, co[j] + c,
                    "off-diagonal entry couples controllers " + std::to_string(i) + " and " +
                        std::to_string(j));
              if (i == j && v != 0.0 && v != 1.0)
                add("A1", i, t, to_string(b), r, c, "entry is neither 0 nor 1");
            }
        }
    }
    // A2: [[mm my mu];[zm zy zu]] per controller is doubly stochastic.
    for (int i = 0; i < n; ++i) {
      const Mat top = hstack({controller_block(mp, i, t, Block::kMM),
                              controller_block(mp, i, t, Block::kMY),
                              controller_block(mp, i, t, Block::kMU)});
      const Mat bottom = hstack({controller_block(mp, i, t, Block::kZM),
                                 controller_block(mp, i, t, Block::kZY),
                                 controller_block(mp, i, t, Block::kZU)});
      const Mat stacked = vstack({top, bottom});
      for (Eigen::Index r = 0; r < stacked.rows(); ++r) {
        const double sum = stacked.row(r).sum();
        if (sum != 1.0)
          add("A2-row", i, t, r < top.rows() ? "M-row" : "Z-row", static_cast<int>(r), -1,
              "row sum " + std::to_string(sum));
      }
      for (Eigen::Index c = 0; c < stacked.cols(); ++c) {
        const double sum = stacked.rows() ? stacked.col(c).sum() : 0.0;
        if (sum != 1.0) {
          const int dmi = mp.memory_dims[i];
          const int dyi = mp.obs_dims[i];
          const char* kind = c < dmi ? "M-col" : (c < dmi + dyi ? "Y-col" : "U-col");
          add("A2-col", i, t, kind, -1, static_cast<int>(c), "column sum " + std::to_string(sum));
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Symbolic token simulation
// ---------------------------------------------------------------------------

/// One scalar datum: component `component` of Y^controller_time or
/// U^controller_time, or a structural zero (empty pipeline slot).
struct Token {
  enum class Kind { kZero, kY, kU };
  Kind kind = Kind::kZero;
  int controller = -1;
  int time = 0;
  int component = -1;

  auto operator<=>(const Token&) const = default;
  bool is_zero() const { return kind == Kind::kZero; }

  std::string str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    os << (kind == Kind::kY ? "Y" : "U") << controller + 1 << "_" << time << "[" << component
       << "]";
    return os.str();
  }
};

struct TokenTrace {
  std::vector<std::vector<Token>> memory;  // [t-1] stacked M_t for t = 1..T+1
  std::vector<std::vector<Token>> shared;  // [t-1] stacked Z_t for t = 1..T

  std::vector<Token> memory_of(const MemoryProtocol& mp, int i, int t) const {
    const auto& m = memory[t - 1];
    const int off = mp.memory_offset(i);
    return {m.begin() + off, m.begin() + off + mp.memory_dims[i]};
  }
  std::vector<Token> shared_of(const MemoryProtocol& mp, int i, int t) const {
    const auto& z = shared[t - 1];
    const int off = mp.shared_offset(t, i);
    return {z.begin() + off, z.begin() + off + mp.step(t).shared_dims[i]};
  }
  /// Non-zero tokens of Z_1..Z_{t-1}, i.e. the shared memory available at t.
  std::set<Token> shared_memory_at(int t) const {
    std::set<Token> out;
    for (int s = 1; s < t && s <= static_cast<int>(shared.size()); ++s)
      for (const auto& tok : shared[s - 1])
        if (!tok.is_zero()) out.insert(tok);
    return out;
  }
};

/// Runs the update equations on symbols. Requires every row of [P_*m P_*y P_*u]
/// to hold at most one nonzero entry, equal to 1 (pure selection); otherwise
/// the protocol mixes data and kUnsupportedProtocol is thrown.
inline TokenTrace simulate_tokens(const MemoryProtocol& mp) {
  const int n = mp.controllers();
  std::vector<Token> ytok, utok;
  auto controller_of = [n](const std::vector<int>& dims, int idx) {
    int off = 0;
    for (int i = 0; i < n; ++i) {
      if (idx < off + dims[i]) return std::pair{i, idx - off};
      off += dims[i];
    }
    return std::pair{-1, -1};
  };
  auto pick = [&](const Mat& fm, const Mat& fy, const Mat& fu, Eigen::Index r,
                  const std::vector<Token>& mem, int t) {
    Token out;
    int hits = 0;
    auto scan = [&](const Mat& m, int which) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        if (v == 0.0) continue;
        if (v != 1.0)
          throw Error(ErrorCode::kUnsupportedProtocol,
                      "token simulation needs 0/1 selection rows (t=" + std::to_string(t) + ")");
        ++hits;
        if (which == 0) {
          out = mem[c];
        } else {
          const auto [i, comp] =
              controller_of(which == 1 ? mp.obs_dims : mp.action_dims, static_cast<int>(c));
          out = Token{which == 1 ? Token::Kind::kY : Token::Kind::kU, i, t, comp};
        }
      }
    };
    scan(fm, 0);
    scan(fy, 1);
    scan(fu, 2);
    if (hits > 1)
      throw Error(ErrorCode::kUnsupportedProtocol,
                  "token simulation: row mixes several data (t=" + std::to_string(t) + ")");
    return out;
  };

  TokenTrace trace;
  trace.memory.emplace_back(mp.total_memory_dim());  // M_1 = 0
  for (int t = 1; t <= mp.horizon(); ++t) {
    const auto& s = mp.step(t);
    const auto& mem = trace.memory.back();
    std::vector<Token> z(s.zm.rows());
    for (Eigen::Index r = 0; r < s.zm.rows(); ++r) z[r] = pick(s.zm, s.zy, s.zu, r, mem, t);
    std::vector<Token> next(s.mm.rows());
    for (Eigen::Index r = 0; r < s.mm.rows(); ++r) next[r] = pick(s.mm, s.my, s.mu, r, mem, t);
    trace.shared.push_back(std::move(z));
    trace.memory.push_back(std::move(next));
  }
  return trace;
}

/// Content overlap check: per controller and step, no datum may appear twice
/// among M^i_{t+1} and Z^i_t, and strict protocols may only route the
/// controller's own data. Returns human-readable issues (empty when clean).
inline std::vector<std::string> token_issues(const MemoryProtocol& mp, const TokenTrace& trace) {
  std::vector<std::string> issues;
  for (int t = 1; t <= mp.horizon(); ++t)
    for (int i = 0; i < mp.controllers(); ++i) {
      std::map<Token, int> seen;
      for (const auto& tok : trace.memory_of(mp, i, t + 1))
        if (!tok.is_zero()) ++seen[tok];
      for (const auto& tok : trace.shared_of(mp, i, t))
        if (!tok.is_zero()) ++seen[tok];
      for (const auto& [tok, count] : seen) {
        if (count > 1)
          issues.push_back("t=" + std::to_string(t) + " controller " + std::to_string(i + 1) +
                           ": " + tok.str() + " stored " + std::to_string(count) + " times");
        if (mp.strict && tok.controller != i)
          issues.push_back("t=" + std::to_string(t) + " controller " + std::to_string(i + 1) +
                           ": holds foreign datum " + tok.str());
      }
    }
  return issues;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {

struct ControllerBlocks {
  Mat mm, my, mu, zm, zy, zu;
};

// Shift register of (Y, U) pairs, newest first, holding `pairs` pairs; the
// oldest pair is emitted as the shared increment. pairs == 0 shares the
// current (Y, U) immediately.
inline ControllerBlocks pipeline_blocks(int dy, int du, int pairs) {
  const int p = dy + du;
  const int dm = pairs * p;
  ControllerBlocks b;
  b.mm = Mat::Zero(dm, dm);
  b.my = Mat::Zero(dm, dy);
  b.mu = Mat::Zero(dm, du);
  b.zm = Mat::Zero(p, dm);
  b.zy = Mat::Zero(p, dy);
  b.zu = Mat::Zero(p, du);
  if (pairs == 0) {
    b.zy.topRows(dy).setIdentity();
    b.zu.bottomRows(du).setIdentity();
    return b;
  }
  b.mm.block(p, 0, (pairs - 1) * p, (pairs - 1) * p).setIdentity();
  b.my.topRows(dy).setIdentity();
  b.mu.middleRows(dy, du).setIdentity();
  b.zm.rightCols(p).setIdentity();
  return b;
}

inline MemoryProtocol assemble(const PlantModel& p, const std::vector<ControllerBlocks>& blocks,
                               ProtocolKind kind, bool strict) {
  MemoryProtocol mp;
  mp.kind = kind;
  mp.strict = strict;
  mp.obs_dims = p.obs_dims;
  mp.action_dims = p.action_dims;
  std::vector<Mat> mm, my, mu, zm, zy, zu;
  std::vector<int> shared_dims;
  for (const auto& b : blocks) {
    mp.memory_dims.push_back(static_cast<int>(b.mm.rows()));
    shared_dims.push_back(static_cast<int>(b.zm.rows()));
    mm.push_back(b.mm);
    my.push_back(b.my);
    mu.push_back(b.mu);
    zm.push_back(b.zm);
    zy.push_back(b.zy);
    zu.push_back(b.zu);
  }
  const ProtocolStep step{blkdiag(mm), blkdiag(my), blkdiag(mu),
                          blkdiag(zm), blkdiag(zy), blkdiag(zu), shared_dims};
  mp.steps.assign(p.horizon, step);
  return mp;
}

}  // namespace detail

/// Every controller's (Y, U) becomes common knowledge after k steps; local
/// memory holds the k-1 most recent pairs, newest first.
inline MemoryProtocol build_symmetric_delay(const PlantModel& p, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidDelay, "delay must be >= 1");
  if (k > p.horizon) throw Error(ErrorCode::kInvalidDelay, "delay exceeds horizon");
  std::vector<detail::ControllerBlocks> blocks;
  for (int i = 0; i < p.controllers(); ++i)
    blocks.push_back(detail::pipeline_blocks(p.obs_dims[i], p.action_dims[i], k - 1));
  auto mp = detail::assemble(p, blocks, ProtocolKind::kSymmetricDelay, true);
  mp.delay = k;
  return mp;
}

/// k[i][j] is the delay from controller j to controller i; k[i][i] == 1.
struct DelayGraph {
  std::vector<std::vector<int>> k;

  int controllers() const { return static_cast<int>(k.size()); }
  /// k*_j = max_i k[i][j]: after this many steps j's data is common.
  int worst_delay(int j) const {
    int out = 1;
    for (const auto& row : k) out = std::max(out, row[j]);
    return out;
  }
  int max_delay() const {
    int out = 1;
    for (int j = 0; j < controllers(); ++j) out = std::max(out, worst_delay(j));
    return out;
  }
  void validate() const {
    const int n = controllers();
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(k[i].size()) != n)
        throw Error(ErrorCode::kInvalidDelay, "delay matrix must be square");
      for (int j = 0; j < n; ++j)
        if (k[i][j] < 1) throw Error(ErrorCode::kInvalidDelay, "delays must be >= 1");
      if (k[i][i] != 1) throw Error(ErrorCode::kInvalidDelay, "self delay must be 1");
    }
  }
  static DelayGraph uniform(int n, int delay) {
    DelayGraph g;
    g.k.assign(n, std::vector<int>(n, delay));
    for (int i = 0; i < n; ++i) g.k[i][i] = 1;
    return g;
  }
};

/// Matrices relating the asymmetric-delay carrier L_t (data not yet common,
/// per controller, newest pair first) to the local memories and the shared
/// increment.
struct AsymmetricLayout {
  std::vector<int> carrier_dims;  // d_l^i = (k*_i - 1)(d_y^i + d_u^i)
  std::vector<int> memory_dims;
  std::vector<int> shared_dims;
  Mat memory_from_carrier;  // stacked M_t = memory_from_carrier L_t
  Mat carrier_from_memory;  // L_t = carrier_from_memory M_t
  Mat carrier_shift, carrier_from_y, carrier_from_u;  // L_{t+1} update
  Mat shared_from_carrier, shared_from_y, shared_from_u;
};

inline AsymmetricLayout asymmetric_layout(const PlantModel& p, const DelayGraph& g) {
  g.validate();
  const int n = p.controllers();
  if (g.controllers() != n)
    throw Error(ErrorCode::kWrongControllerCount, "delay graph size differs from plant");
  if (g.max_delay() > p.horizon) throw Error(ErrorCode::kInvalidDelay, "delay exceeds horizon");

  AsymmetricLayout lay;
  std::vector<int> pair(n), kstar(n);
  std::vector<detail::ControllerBlocks> carrier;
  for (int j = 0; j < n; ++j) {
    pair[j] = p.obs_dims[j] + p.action_dims[j];
    kstar[j] = g.worst_delay(j);
    carrier.push_back(detail::pipeline_blocks(p.obs_dims[j], p.action_dims[j], kstar[j] - 1));
    lay.carrier_dims.push_back((kstar[j] - 1) * pair[j]);
    lay.shared_dims.push_back(pair[j]);
  }
  const auto carrier_off = detail::offsets(lay.carrier_dims);
  const int dl = carrier_off.back();

  // M^i = [J_i1 L^1; ...; J_in L^n] with J_ij keeping pairs k_ij-1 .. k*_j-2.
  std::vector<Mat> memory_rows;
  std::vector<int> carrier_within(n, 0);  // where L^i starts inside M^i
  for (int i = 0; i < n; ++i) {
    std::vector<Mat> parts;
    int within = 0;
    for (int j = 0; j < n; ++j) {
      const int keep = (kstar[j] - g.k[i][j]) * pair[j];
      Mat sel = Mat::Zero(keep, dl);
      sel.block(0, carrier_off[j] + (g.k[i][j] - 1) * pair[j], keep, keep).setIdentity();
      parts.push_back(sel);
      if (j == i) carrier_within[i] = within;
      within += keep;
    }
    const Mat mi = vstack(parts);
    lay.memory_dims.push_back(static_cast<int>(mi.rows()));
    memory_rows.push_back(mi);
  }
  lay.memory_from_carrier = vstack(memory_rows);
  const auto memory_off = detail::offsets(lay.memory_dims);
  const int dm = memory_off.back();
  lay.carrier_from_memory = Mat::Zero(dl, dm);
  for (int i = 0; i < n; ++i)
    lay.carrier_from_memory
        .block(carrier_off[i], memory_off[i] + carrier_within[i], lay.carrier_dims[i],
               lay.carrier_dims[i])
        .setIdentity();

  std::vector<Mat> ls, ly, lu, zl, zy, zu;
  for (int j = 0; j < n; ++j) {
    ls.push_back(carrier[j].mm);
    ly.push_back(carrier[j].my);
    lu.push_back(carrier[j].mu);
    zl.push_back(carrier[j].zm);
    zy.push_back(carrier[j].zy);
    zu.push_back(carrier[j].zu);
  }
  lay.carrier_shift = blkdiag(ls);
  lay.carrier_from_y = blkdiag(ly);
  lay.carrier_from_u = blkdiag(lu);
  lay.shared_from_carrier = blkdiag(zl);
  lay.shared_from_y = blkdiag(zy);
  lay.shared_from_u = blkdiag(zu);
  return lay;
}

/// Generalized protocol for delays along a strongly connected graph. The
/// memory update is composed through the carrier L_t, so the stacked blocks
/// couple controllers (M^i reads other controllers' carrier entries).
inline MemoryProtocol build_asymmetric_delay(const PlantModel& p, const DelayGraph& g) {
  const AsymmetricLayout lay = asymmetric_layout(p, g);
  MemoryProtocol mp;
  mp.kind = ProtocolKind::kAsymmetricDelay;
  mp.delay = g.max_delay();
  mp.strict = false;
  mp.note = "generalized: memory update couples controllers through the carrier";
  mp.obs_dims = p.obs_dims;
  mp.action_dims = p.action_dims;
  mp.memory_dims = lay.memory_dims;
  ProtocolStep step;
  step.mm = lay.memory_from_carrier * lay.carrier_shift * lay.carrier_from_memory;
  step.my = lay.memory_from_carrier * lay.carrier_from_y;
  step.mu = lay.memory_from_carrier * lay.carrier_from_u;
  step.zm = lay.shared_from_carrier * lay.carrier_from_memory;
  step.zy = lay.shared_from_y;
  step.zu = lay.shared_from_u;
  step.shared_dims = lay.shared_dims;
  mp.steps.assign(p.horizon, step);
  return mp;
}

/// Coupled subsystems with one-step control sharing: no local memory, the
/// shared increment is U_t. Observations are discarded after use, which the
/// doubly-stochastic property does not allow, so the protocol is generalized.
inline MemoryProtocol build_control_sharing(const PlantModel& p) {
  std::vector<detail::ControllerBlocks> blocks;
  for (int i = 0; i < p.controllers(); ++i) {
    const int dy = p.obs_dims[i];
    const int du = p.action_dims[i];
    detail::ControllerBlocks b;
    b.mm = Mat::Zero(0, 0);
    b.my = Mat::Zero(0, dy);
    b.mu = Mat::Zero(0, du);
    b.zm = Mat::Zero(du, 0);
    b.zy = Mat::Zero(du, dy);
    b.zu = Mat::Identity(du, du);
    blocks.push_back(b);
  }
  auto mp = detail::assemble(p, blocks, ProtocolKind::kControlSharing, false);
  mp.note = "0/1 and block diagonal, but observations are dropped (Y columns sum to 0)";
  return mp;
}

/// Two coupled subsystems; controller 2's (Y, U) is shared with one step of
/// delay, controller 1 shares nothing.
inline MemoryProtocol build_one_sided(const PlantModel& p) {
  if (p.controllers() != 2)
    throw Error(ErrorCode::kWrongControllerCount, "one-sided sharing needs exactly 2 controllers");
  std::vector<detail::ControllerBlocks> blocks(2);
  const int dy1 = p.obs_dims[0], du1 = p.action_dims[0];
  blocks[0].mm = Mat::Zero(0, 0);
  blocks[0].my = Mat::Zero(0, dy1);
  blocks[0].mu = Mat::Zero(0, du1);
  blocks[0].zm = Mat::Zero(0, 0);
  blocks[0].zy = Mat::Zero(0, dy1);
  blocks[0].zu = Mat::Zero(0, du1);
  blocks[1] = detail::pipeline_blocks(p.obs_dims[1], p.action_dims[1], 0);
  auto mp = detail::assemble(p, blocks, ProtocolKind::kOneSided, false);
  mp.note = "0/1 and block diagonal, but controller 1's data is never shared";
  return mp;
}

/// True when `mp` is exactly the symmetric k-delay protocol for `p`.
inline bool is_symmetric_delay(const MemoryProtocol& mp, const PlantModel& p, int k) {
  if (k < 1 || k > p.horizon || mp.horizon() != p.horizon) return false;
  const MemoryProtocol ref = build_symmetric_delay(p, k);
  if (mp.memory_dims != ref.memory_dims || mp.obs_dims != ref.obs_dims ||
      mp.action_dims != ref.action_dims)
    return false;
  for (int t = 1; t <= p.horizon; ++t) {
    const auto& a = mp.step(t);
    const auto& b = ref.step(t);
    if (a.shared_dims != b.shared_dims || a.mm != b.mm || a.my != b.my || a.mu != b.mu ||
        a.zm != b.zm || a.zy != b.zy || a.zu != b.zu)
      return false;
  }
  return true;
}

}  // namespace dlqg
