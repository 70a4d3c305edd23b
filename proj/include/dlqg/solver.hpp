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

#pragma once

#include "dlqg/coordination.hpp"
#include "dlqg/core.hpp"
#include "dlqg/infostructure.hpp"
#include "dlqg/plant.hpp"

#include <string>
#include <vector>

namespace dlqg {

struct ForwardPass {
  std::vector<Mat> P;             // [t-1], t = 1..T+1
  std::vector<Mat> filter_gains;  // [t-1], t = 1..T; multiplies the innovation of Yt_{t+1}
};

struct BackwardPass {
  std::vector<Mat> S;       // [t-1], t = 1..T+1 with S_{T+1} = 0
  std::vector<Mat> Lambda;  // [t-1], t = 1..T
  std::vector<Mat> K;       // [t-1], t = 1..T
};

namespace detail {
inline void require_psd(const Mat& m, const std::string& what, int t) {
  if (!all_finite(m))
    throw Error(ErrorCode::kNumericalBreakdown, what + " became non-finite", {}, t);
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
  const double hi = eig.eigenvalues().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, hi))
    throw Error(ErrorCode::kNumericalBreakdown, what + " lost positive semi-definiteness", {},
                t);
}
}  // namespace detail

/// Filter covariance recursion with P_1 = Cov(Xt_1) and
///   gain_t  = At P Ct' [Ct P Ct']^+
///   P_{t+1} = At P At' + SigmaW - gain_t Ct P At'
/// where Ct = Ct_{t+1}, the map producing the observation that arrives next.
inline ForwardPass forward_riccati(const CoordinatedSystem& cs, double rtol = kDefaultRtol) {
  ForwardPass out;
  Mat p = cs.initial_cov;
  out.P.push_back(p);
  for (int t = 1; t <= cs.horizon(); ++t) {
    const auto& s = cs.at(t);
    const Mat& c = cs.obs(t + 1);
    const Mat apc = s.A * p * c.transpose();
    const Mat gain = apc * pinv(symmetrize(c * p * c.transpose()), rtol);
    p = symmetrize(s.A * p * s.A.transpose() + s.sigma_w - gain * apc.transpose());
    detail::require_psd(p, "filter covariance", t + 1);
    out.filter_gains.push_back(gain);
    out.P.push_back(p);
  }
  return out;
}

/// Value recursion with S_{T+1} = 0:
///   Lambda_t = Nt' + Bt' S_{t+1} At
///   K_t      = -(Rt + Bt' S_{t+1} Bt)^{-1} Lambda_t
///   S_t      = At' S_{t+1} At + Qt - Lambda_t' (Rt + Bt' S_{t+1} Bt)^{-1} Lambda_t
inline BackwardPass backward_riccati(const CoordinatedSystem& cs) {
  const int T = cs.horizon();
  BackwardPass out;
  out.S.assign(T + 1, Mat());
  out.Lambda.assign(T, Mat());
  out.K.assign(T, Mat());
  Mat s_next = Mat::Zero(cs.state_dim, cs.state_dim);
  out.S[T] = s_next;
  for (int t = T; t >= 1; --t) {
    const auto& st = cs.at(t);
    const Mat lambda = st.N.transpose() + st.B.transpose() * s_next * st.A;
    const Mat bracket = symmetrize(st.R + st.B.transpose() * s_next * st.B);
    Eigen::LLT<Mat> llt(bracket);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::kNumericalBreakdown, "control bracket not positive definite", {},
                  t);
    const Mat k = -llt.solve(lambda);
    Mat s = symmetrize(st.A.transpose() * s_next * st.A + st.Q + lambda.transpose() * k);
    detail::require_psd(s, "value matrix", t);
    out.Lambda[t - 1] = lambda;
    out.K[t - 1] = k;
    out.S[t - 1] = s;
    s_next = s;
  }
  return out;
}

/// J = sum_{t=1..T} tr[P_t Q_t + (SigmaW + A_t P_t A_t' - P_{t+1}) S_{t+1}].
inline double performance(const CoordinatedSystem& cs, const std::vector<Mat>& P,
                          const std::vector<Mat>& S) {
  const int T = cs.horizon();
  require_dims(static_cast<int>(P.size()) == T + 1 && static_cast<int>(S.size()) == T + 1,
               "performance: sequences must cover t = 1..T+1");
  double j = 0.0;
  for (int t = 1; t <= T; ++t) {
    const auto& s = cs.at(t);
    const Mat& p = P[t - 1];
    j += (p * s.Q).trace() +
         ((s.sigma_w + s.A * p * s.A.transpose() - P[t]) * S[t]).trace();
  }
  return j;
}

/// [[I, 0], [C_t, 0], [0, I]]: (X, M) -> (X, C_t X, M).
inline Mat lift_map(const PlantModel& p, int d_m, int t) {
  const int dx = p.state_dim, dy = p.total_obs_dim();
  Mat out = Mat::Zero(dx + dy + d_m, dx + d_m);
  out.topLeftCorner(dx, dx).setIdentity();
  out.block(dx, 0, dy, dx) = stacked_C(p, t);
  out.bottomRightCorner(d_m, d_m).setIdentity();
  return out;
}

/// [[I, 0, 0], [0, 0, I]]: (X, Y, M) -> (X, M).
inline Mat proj_map(const PlantModel& p, int d_m) {
  const int dx = p.state_dim, dy = p.total_obs_dim();
  Mat out = Mat::Zero(dx + d_m, dx + dy + d_m);
  out.topLeftCorner(dx, dx).setIdentity();
  out.bottomRightCorner(d_m, d_m).setIdentity();
  return out;
}

/// L_t = K_t * lift_t, acting on the reduced statistic (Xhat, Mhat).
inline std::vector<Mat> reduce_gains(const std::vector<Mat>& K, const PlantModel& p, int d_m) {
  std::vector<Mat> out;
  for (int t = 1; t <= static_cast<int>(K.size()); ++t) {
    require_dims(K[t - 1].cols() == p.state_dim + p.total_obs_dim() + d_m,
                 "reduce_gains: gain width");
    out.push_back(K[t - 1] * lift_map(p, d_m, t));
  }
  return out;
}

struct SolvedStrategy {
  LocalGains gains;
  CoordinatedSystem cs;
  std::vector<Mat> P;            // [t-1], t = 1..T+1
  std::vector<Mat> S;            // [t-1], t = 1..T+1
  std::vector<Mat> Lambda;       // [t-1]
  std::vector<Mat> K;            // [t-1], coordinator gain on Xb_t
  std::vector<Mat> L;            // [t-1], coordinator gain on the reduced statistic
  std::vector<Mat> filter_gain;  // [t-1]
  double J = 0.0;

  int horizon() const { return cs.horizon(); }
  int reduced_dim() const { return cs.d_x + cs.d_m; }
};

inline SolvedStrategy solve(const PlantModel& p, const MemoryProtocol& mp, const LocalGains& lg,
                            double rtol = kDefaultRtol) {
  SolvedStrategy ss;
  ss.gains = lg;
  ss.cs = build_coordinated(p, mp, lg);
  auto fwd = forward_riccati(ss.cs, rtol);
  auto bwd = backward_riccati(ss.cs);
  ss.J = performance(ss.cs, fwd.P, bwd.S);
  ss.P = std::move(fwd.P);
  ss.filter_gain = std::move(fwd.filter_gains);
  ss.S = std::move(bwd.S);
  ss.Lambda = std::move(bwd.Lambda);
  ss.K = std::move(bwd.K);
  ss.L = reduce_gains(ss.K, p, ss.cs.d_m);
  return ss;
}

/// Copy of `ss` whose coordinator gains are replaced by `K` (the filter is
/// unchanged); J is left as the solved value and no longer describes the copy.
inline SolvedStrategy with_coordinator_gains(const SolvedStrategy& ss, const PlantModel& p,
                                             std::vector<Mat> K) {
  require_dims(K.size() == ss.K.size(), "with_coordinator_gains: one gain per step");
  for (std::size_t t = 0; t < K.size(); ++t)
    require_dims(K[t].rows() == ss.K[t].rows() && K[t].cols() == ss.K[t].cols(),
                 "with_coordinator_gains: gain shape");
  SolvedStrategy out = ss;
  out.K = std::move(K);
  out.L = reduce_gains(out.K, p, ss.cs.d_m);
  return out;
}

}  // namespace dlqg
