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
// The coordinator's centralized system. Once the local gains (G, H) are
// fixed, a fictitious coordinator that sees only the shared memory chooses
// Ut_t and every controller plays U^i_t = Ut^i_t + G^i_t Y^i_t + H^i_t M^i_t.
// With state Xt_t = (X_t, Y_t, M_t) and observation Yt_t = Z_{t-1}:
//
//   Xt_{t+1} = At_t Xt_t + Bt_t Ut_t + Ft_t (W0_t, W_{t+1})
//   Yt_{t+1} = Ct_{t+1} Xt_t + Dt_{t+1} Ut_t,        Yt_1 empty
//   cost_t   = Xt' Qt Xt + 2 Xt' Nt Ut + Ut' Rt Ut
//
// The Y-row of Xt_{t+1} is Y_{t+1} = C_{t+1} X_{t+1} + W_{t+1}, so At_t and
// Bt_t use the next step's observation map and the noise map carries
// C_{t+1} W0_t into that row. The observation pair (Ct_t, Dt_t) is built from
// the protocol blocks of step t-1.
//
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include "dlqg/core.hpp"
#include "dlqg/infostructure.hpp"
#include "dlqg/plant.hpp"

#include <string>
#include <vector>

namespace dlqg {

/// Local gains, stored per controller so the stacked G_t and H_t are block
/// diagonal by construction.
struct LocalGains {
  std::vector<std::vector<Mat>> G;  // [t-1][i], d_u^i x d_y^i
  std::vector<std::vector<Mat>> H;  // [t-1][i], d_u^i x d_m^i

  int horizon() const { return static_cast<int>(G.size()); }
  Mat G_at(int t) const { return blkdiag(G.at(t - 1)); }
  Mat H_at(int t) const { return blkdiag(H.at(t - 1)); }

  static LocalGains zeros(const PlantModel& p, const MemoryProtocol& mp) {
    LocalGains lg;
    for (int t = 0; t < p.horizon; ++t) {
      std::vector<Mat> g, h;
      for (int i = 0; i < p.controllers(); ++i) {
        g.push_back(Mat::Zero(p.action_dims[i], p.obs_dims[i]));
        h.push_back(Mat::Zero(p.action_dims[i], mp.memory_dims[i]));
      }
      lg.G.push_back(std::move(g));
      lg.H.push_back(std::move(h));
    }
    return lg;
  }

  void check(const PlantModel& p, const MemoryProtocol& mp) const {
    require_dims(horizon() == p.horizon && static_cast<int>(H.size()) == p.horizon,
                 "LocalGains: one entry per step");
    for (int t = 0; t < p.horizon; ++t) {
      require_dims(static_cast<int>(G[t].size()) == p.controllers() &&
                       static_cast<int>(H[t].size()) == p.controllers(),
                   "LocalGains: one block per controller");
      for (int i = 0; i < p.controllers(); ++i) {
        require_dims(G[t][i].rows() == p.action_dims[i] && G[t][i].cols() == p.obs_dims[i],
                     "LocalGains: G block " + std::to_string(i) + " at t=" +
                         std::to_string(t + 1));
        require_dims(H[t][i].rows() == p.action_dims[i] && H[t][i].cols() == mp.memory_dims[i],
                     "LocalGains: H block " + std::to_string(i) + " at t=" +
                         std::to_string(t + 1));
      }
    }
  }
};

struct CoordinatedStep {
  Mat A;        // state x state
  Mat B;        // state x sum(d_u)
  Mat F;        // state x (d_x + sum(d_y)), noise input map
  Mat sigma_w;  // F * noise_cov * F'
  Mat Q, N, R;
};

struct CoordinatedSystem {
  int state_dim = 0;
  int d_x = 0, d_y = 0, d_m = 0, d_u = 0;
  std::vector<CoordinatedStep> steps;  // [t-1], t = 1..T
  std::vector<Mat> C;                  // [t-1], t = 1..T+1; C[0] has no rows
  std::vector<Mat> D;                  // [t-1], t = 1..T+1
  Mat initial_cov;                     // Cov(Xt_1)
  Mat noise_cov;                       // blkdiag(sigma_w0, sigma_w1..n)

  int horizon() const { return static_cast<int>(steps.size()); }
  const CoordinatedStep& at(int t) const { return steps.at(t - 1); }
  const Mat& obs(int t) const { return C.at(t - 1); }
  const Mat& obs_action(int t) const { return D.at(t - 1); }
  int obs_dim(int t) const { return static_cast<int>(C.at(t - 1).rows()); }
};

/// Cov(Xt_1): X_1 ~ N(0, sigma_x), Y_1 = C_1 X_1 + W_1 and M_1 = 0.
inline Mat coordinated_initial_cov(const PlantModel& p, int d_m) {
  const Mat c1 = stacked_C(p, 1);
  const int dx = p.state_dim, dy = p.total_obs_dim();
  Mat cov = Mat::Zero(dx + dy + d_m, dx + dy + d_m);
  cov.topLeftCorner(dx, dx) = p.sigma_x;
  cov.block(dx, 0, dy, dx) = c1 * p.sigma_x;
  cov.block(0, dx, dx, dy) = p.sigma_x * c1.transpose();
  cov.block(dx, dx, dy, dy) = c1 * p.sigma_x * c1.transpose() + obs_noise_cov(p);
  return symmetrize(cov);
}

inline void check_compatible(const PlantModel& p, const MemoryProtocol& mp) {
  require_dims(mp.horizon() == p.horizon, "protocol horizon differs from plant");
  require_dims(mp.obs_dims == p.obs_dims && mp.action_dims == p.action_dims,
               "protocol dims differ from plant");
  const auto report = validate(mp);
  if (report.has("dims"))
    throw Error(ErrorCode::kDimMismatch, "protocol blocks have inconsistent dimensions");
}

inline CoordinatedSystem build_coordinated(const PlantModel& p, const MemoryProtocol& mp,
                                           const LocalGains& lg) {
  check_compatible(p, mp);
  lg.check(p, mp);
  CoordinatedSystem cs;
  cs.d_x = p.state_dim;
  cs.d_y = p.total_obs_dim();
  cs.d_m = mp.total_memory_dim();
  cs.d_u = p.total_action_dim();
  cs.state_dim = cs.d_x + cs.d_y + cs.d_m;
  cs.noise_cov = blkdiag({p.sigma_w0, obs_noise_cov(p)});
  cs.initial_cov = coordinated_initial_cov(p, cs.d_m);
  const int dx = cs.d_x, dy = cs.d_y, dm = cs.d_m;

  cs.C.push_back(Mat::Zero(0, cs.state_dim));
  cs.D.push_back(Mat::Zero(0, cs.d_u));
  for (int t = 1; t <= p.horizon; ++t) {
    const auto& ps = mp.step(t);
    const Mat& a = p.A[t - 1];
    const Mat& b = p.B[t - 1];
    const Mat c_next = next_stacked_C(p, t);
    const Mat g = lg.G_at(t);
    const Mat h = lg.H_at(t);

    CoordinatedStep s;
    s.A = Mat::Zero(cs.state_dim, cs.state_dim);
    s.A.block(0, 0, dx, dx) = a;
    s.A.block(0, dx, dx, dy) = b * g;
    s.A.block(0, dx + dy, dx, dm) = b * h;
    s.A.block(dx, 0, dy, dx) = c_next * a;
    s.A.block(dx, dx, dy, dy) = c_next * b * g;
    s.A.block(dx, dx + dy, dy, dm) = c_next * b * h;
    s.A.block(dx + dy, dx, dm, dy) = ps.my + ps.mu * g;
    s.A.block(dx + dy, dx + dy, dm, dm) = ps.mm + ps.mu * h;

    s.B = vstack({b, c_next * b, ps.mu});

    s.F = Mat::Zero(cs.state_dim, dx + dy);
    s.F.block(0, 0, dx, dx).setIdentity();
    s.F.block(dx, 0, dy, dx) = c_next;
    s.F.block(dx, dx, dy, dy).setIdentity();
    s.sigma_w = symmetrize(s.F * cs.noise_cov * s.F.transpose());

    const Mat gh = hstack({g, h});
    s.Q = blkdiag({p.Q, gh.transpose() * p.R * gh});
    s.N = vstack({Mat::Zero(dx, cs.d_u), gh.transpose() * p.R});
    s.R = p.R;
    cs.steps.push_back(std::move(s));

    // Yt_{t+1} = Z_t
    Mat c_obs = Mat::Zero(mp.shared_dim(t), cs.state_dim);
    c_obs.block(0, dx, c_obs.rows(), dy) = ps.zy + ps.zu * g;
    c_obs.block(0, dx + dy, c_obs.rows(), dm) = ps.zm + ps.zu * h;
    cs.C.push_back(std::move(c_obs));
    cs.D.push_back(ps.zu);
  }
  return cs;
}

/// Exact expected total cost of the closed loop Ut_t = K_t Xb_t, where Xb_t is
/// produced by the recursive estimator with the given gains
///   Xb_{t+1} = At Xb + Bt Ut + filter_gain_t (Yt_{t+1} - Ct_{t+1} Xb - Dt_{t+1} Ut).
/// Propagates the joint second moment of (Xt_t, Xb_t); no sampling.
inline double closed_loop_cost_exact(const CoordinatedSystem& cs, const std::vector<Mat>& gains,
                                     const std::vector<Mat>& filter_gains) {
  const int T = cs.horizon();
  const int n = cs.state_dim;
  require_dims(static_cast<int>(gains.size()) == T, "closed_loop_cost_exact: one gain per step");
  require_dims(static_cast<int>(filter_gains.size()) >= T - 1,
               "closed_loop_cost_exact: filter gains");
  Mat cov = Mat::Zero(2 * n, 2 * n);
  cov.topLeftCorner(n, n) = cs.initial_cov;
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    const auto& s = cs.at(t);
    const Mat& k = gains[t - 1];
    require_dims(k.rows() == cs.d_u && k.cols() == n, "closed_loop_cost_exact: gain shape");
    const Mat xx = cov.topLeftCorner(n, n);
    const Mat bx = cov.bottomLeftCorner(n, n);  // E[Xb Xt']
    const Mat bb = cov.bottomRightCorner(n, n);
    total += (s.Q * xx).trace() + 2.0 * (s.N * k * bx).trace() +
             (k.transpose() * s.R * k * bb).trace();
    if (t == T) break;
    const Mat& lf = filter_gains[t - 1];
    const Mat& c = cs.obs(t + 1);
    // The action enters Yt_{t+1} and the prediction alike, so it cancels in
    // the innovation, which is Ct (Xt - Xb).
    Mat phi(2 * n, 2 * n);
    phi << s.A, s.B * k, lf * c, s.A + s.B * k - lf * c;
    Mat next = phi * cov * phi.transpose();
    next.topLeftCorner(n, n) += s.sigma_w;
    cov = symmetrize(next);
  }
  return total;
}

}  // namespace dlqg
