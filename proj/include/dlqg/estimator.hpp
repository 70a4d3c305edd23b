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
// Online statistics.
//
//  * Xb_t   full coordinator estimate of (X_t, Y_t, M_t) given shared data.
//  * Sb_t   reduced estimate of (X_t, M_t); Xb_t = lift_t Sb_t.
//  * S_t    delayed-sharing statistic built from a strategy-independent plant
//           predictor and the windows of not-yet-absorbed data:
//             S_t = (Xhat_{t-k+1|t-k}, Ut_{t-k+1:t-1}, Y_{t-2k+2:t-k}, U_{t-2k+2:t-k})
//           with each window stored oldest first and zero-padded before t = 1.
//
// appendix_map(t) is the matrix with Sb_t = appendix_map(t) S_t for the
// symmetric k-delay protocol.
//
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include "dlqg/coordination.hpp"
#include "dlqg/core.hpp"
#include "dlqg/infostructure.hpp"
#include "dlqg/plant.hpp"
#include "dlqg/solver.hpp"

#include <string>
#include <vector>

namespace dlqg {

struct EstimatorState {
  int t = 1;
  Vec breve_S;  // (Xhat_t, Mhat_t)
};

inline EstimatorState initial_estimator(const SolvedStrategy& ss) {
  return EstimatorState{1, Vec::Zero(ss.reduced_dim())};
}

/// One step of the full filter: Xb_t -> Xb_{t+1} after observing
/// Yt_{t+1} = z_new with coordinator action u_tilde at time t.
inline Vec step_full(const SolvedStrategy& ss, int t, const Vec& x_breve, const Vec& z_new,
                     const Vec& u_tilde) {
  const auto& cs = ss.cs;
  require_dims(t >= 1 && t <= cs.horizon(), "step_full: time");
  require_dims(x_breve.size() == cs.state_dim, "step_full: estimate dimension");
  require_dims(z_new.size() == cs.obs_dim(t + 1), "step_full: shared increment dimension");
  require_dims(u_tilde.size() == cs.d_u, "step_full: action dimension");
  const auto& s = cs.at(t);
  const Vec innovation = z_new - cs.obs(t + 1) * x_breve - cs.obs_action(t + 1) * u_tilde;
  return s.A * x_breve + s.B * u_tilde + ss.filter_gain[t - 1] * innovation;
}

/// Reduced update: Sb_{t+1} = proj [A lift Sb + B Ut + gain (z - C lift Sb - D Ut)].
inline EstimatorState step_breve(const EstimatorState& st, const PlantModel& p,
                                 const SolvedStrategy& ss, const Vec& z_new,
                                 const Vec& u_tilde_prev) {
  require_dims(st.t < ss.horizon() + 1, "step_breve: past the horizon");
  require_dims(st.breve_S.size() == ss.reduced_dim(), "step_breve: statistic dimension");
  const int dm = ss.cs.d_m;
  const Vec lifted = lift_map(p, dm, st.t) * st.breve_S;
  const Vec next = step_full(ss, st.t, lifted, z_new, u_tilde_prev);
  return EstimatorState{st.t + 1, proj_map(p, dm) * next};
}

/// Coordinator action L_t Sb_t.
inline Vec coordinator_action(const EstimatorState& st, const SolvedStrategy& ss) {
  return ss.L.at(st.t - 1) * st.breve_S;
}

/// U^i_t = L^i_t Sb_t + G^i_t Y^i_t + H^i_t M^i_t, one vector per controller.
inline std::vector<Vec> act(const EstimatorState& st, const PlantModel& p,
                            const SolvedStrategy& ss, const std::vector<Vec>& y_local,
                            const std::vector<Vec>& m_local) {
  const int n = p.controllers();
  require_dims(static_cast<int>(y_local.size()) == n && static_cast<int>(m_local.size()) == n,
               "act: one vector per controller");
  const Vec u_tilde = coordinator_action(st, ss);
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    const Mat& g = ss.gains.G.at(st.t - 1)[i];
    const Mat& h = ss.gains.H.at(st.t - 1)[i];
    require_dims(y_local[i].size() == g.cols() && m_local[i].size() == h.cols(),
                 "act: local data dimension");
    out.push_back(u_tilde.segment(p.action_offset(i), p.action_dims[i]) + g * y_local[i] +
                  h * m_local[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strategy-independent plant predictor
// ---------------------------------------------------------------------------

/// Xhat_{t+1|t} = A Xhat + B U + gain_t (Y - C Xhat) with Xhat_{1|0} = 0 and
/// P_1 = sigma_x. Reads only the plant.
struct PlantKalman {
  std::vector<Mat> P;     // [t-1], t = 1..T+1
  std::vector<Mat> gain;  // [t-1], t = 1..T
};

inline PlantKalman plant_kalman(const PlantModel& p, double rtol = kDefaultRtol) {
  PlantKalman out;
  Mat cov = p.sigma_x;
  const Mat sw = obs_noise_cov(p);
  out.P.push_back(cov);
  for (int t = 1; t <= p.horizon; ++t) {
    const Mat c = stacked_C(p, t);
    const Mat& a = p.A[t - 1];
    const Mat apc = a * cov * c.transpose();
    const Mat gain = apc * pinv(symmetrize(c * cov * c.transpose() + sw), rtol);
    cov = symmetrize(a * cov * a.transpose() + p.sigma_w0 - gain * apc.transpose());
    out.gain.push_back(gain);
    out.P.push_back(cov);
  }
  return out;
}

struct PlantPredictor {
  int t = 1;  // xhat = Xhat_{t|t-1}
  Vec xhat;
};

inline PlantPredictor plant_kalman_step(const PlantModel& p, const PlantKalman& pk,
                                        const PlantPredictor& st, const Vec& y, const Vec& u) {
  require_dims(st.t >= 1 && st.t <= p.horizon, "plant_kalman_step: time");
  require_dims(y.size() == p.total_obs_dim() && u.size() == p.total_action_dim(),
               "plant_kalman_step: data dimension");
  const int t = st.t;
  const Vec innovation = y - stacked_C(p, t) * st.xhat;
  return PlantPredictor{t + 1, p.A[t - 1] * st.xhat + p.B[t - 1] * u + pk.gain[t - 1] * innovation};
}

// ---------------------------------------------------------------------------
// Delayed-sharing statistic
// ---------------------------------------------------------------------------

struct ReducedDelayStat {
  int k = 1;
  int t = 1;
  Vec xhat;                   // Xhat_{t-k+1|t-k}
  std::vector<Vec> u_tilde;   // Ut_{t-k+1..t-1}
  std::vector<Vec> y_window;  // Y_{t-2k+2..t-k}
  std::vector<Vec> u_window;  // U_{t-2k+2..t-k}

  Vec stacked() const {
    std::vector<Vec> parts{xhat};
    parts.insert(parts.end(), u_tilde.begin(), u_tilde.end());
    parts.insert(parts.end(), y_window.begin(), y_window.end());
    parts.insert(parts.end(), u_window.begin(), u_window.end());
    return concat(parts);
  }
};

inline int delay_stat_dim(const PlantModel& p, int k) {
  return p.state_dim + (k - 1) * (2 * p.total_action_dim() + p.total_obs_dim());
}

/// Maintains S_t along a rollout. After record() has been called for steps
/// 1..t-1, stat() returns S_t.
class DelayStatTracker {
 public:
  DelayStatTracker(const PlantModel& p, int k, double rtol = kDefaultRtol)
      : p_(&p), k_(k), kalman_(plant_kalman(p, rtol)) {
    if (k < 1 || k > p.horizon)
      throw Error(ErrorCode::kInvalidDelay, "delay must satisfy 1 <= k <= T");
    pred_.xhat = Vec::Zero(p.state_dim);
  }

  int time() const { return static_cast<int>(y_.size()) + 1; }
  const PlantKalman& kalman() const { return kalman_; }

  void record(const Vec& y, const Vec& u, const Vec& u_tilde) {
    require_dims(y.size() == p_->total_obs_dim() && u.size() == p_->total_action_dim() &&
                     u_tilde.size() == p_->total_action_dim(),
                 "DelayStatTracker::record: data dimension");
    y_.push_back(y);
    u_.push_back(u);
    ut_.push_back(u_tilde);
    // Absorb data up to index time() - k into the predictor.
    while (pred_.t <= time() - k_) {
      const int s = pred_.t;
      pred_ = plant_kalman_step(*p_, kalman_, pred_, y_[s - 1], u_[s - 1]);
    }
  }

  ReducedDelayStat stat() const {
    const int t = time();
    ReducedDelayStat out;
    out.k = k_;
    out.t = t;
    out.xhat = pred_.xhat;
    const int du = p_->total_action_dim(), dy = p_->total_obs_dim();
    auto fetch = [](const std::vector<Vec>& h, int s, int dim) -> Vec {
      if (s < 1 || s > static_cast<int>(h.size())) return Vec::Zero(dim);
      return h[s - 1];
    };
    for (int s = t - k_ + 1; s <= t - 1; ++s) out.u_tilde.push_back(fetch(ut_, s, du));
    for (int s = t - 2 * k_ + 2; s <= t - k_; ++s) {
      out.y_window.push_back(fetch(y_, s, dy));
      out.u_window.push_back(fetch(u_, s, du));
    }
    return out;
  }

 private:
  const PlantModel* p_;
  int k_;
  PlantKalman kalman_;
  PlantPredictor pred_;
  std::vector<Vec> y_, u_, ut_;
};

/// Matrix with Sb_t = appendix_map(t) S_t for the symmetric k-delay protocol.
/// Starts from E[Xt_{t-k+1} | shared data] = (Xhat, C Xhat, M read off the
/// windows) and propagates the coordinated dynamics with zero-mean noise
/// through the known coordinator actions.
inline Mat appendix_map(const SolvedStrategy& ss, const PlantModel& p, const MemoryProtocol& mp,
                        int k, int t) {
  if (!is_symmetric_delay(mp, p, k))
    throw Error(ErrorCode::kUnsupportedProtocol,
                "appendix_map requires the symmetric k-delay protocol");
  p.check_time(t);
  const auto& cs = ss.cs;
  const int dx = cs.d_x, dy = cs.d_y, dm = cs.d_m, du = cs.d_u;
  const int dim_s = delay_stat_dim(p, k);
  const int off_ut = dx;
  const int off_y = off_ut + (k - 1) * du;
  const int off_u = off_y + (k - 1) * dy;
  const int first_window = t - 2 * k + 2;

  const int s0 = t - k + 1;
  Mat state = Mat::Zero(cs.state_dim, dim_s);  // E[Xt_s] as a map of S_t
  int start = 1;
  if (s0 >= 1) {
    start = s0;
    state.block(0, 0, dx, dx).setIdentity();
    state.block(dx, 0, dy, dx) = stacked_C(p, s0);
    const TokenTrace trace = simulate_tokens(mp);
    const auto& mem = trace.memory[s0 - 1];
    for (int r = 0; r < dm; ++r) {
      const Token& tok = mem[r];
      if (tok.is_zero()) continue;
      const int pos = tok.time - first_window;
      if (pos < 0 || pos >= k - 1)
        throw Error(ErrorCode::kUnsupportedProtocol, "memory holds data outside the window");
      const int col = tok.kind == Token::Kind::kY
                          ? off_y + pos * dy + p.obs_offset(tok.controller) + tok.component
                          : off_u + pos * du + p.action_offset(tok.controller) + tok.component;
      state(dx + dy + r, col) = 1.0;
    }
  }
  for (int s = start; s < t; ++s) {
    const auto& st = cs.at(s);
    Mat input = Mat::Zero(du, dim_s);
    input.middleCols(off_ut + (s - s0) * du, du).setIdentity();
    state = st.A * state + st.B * input;
  }
  return proj_map(p, dm) * state;
}

}  // namespace dlqg
