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

#include "dlqg/core.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace dlqg {

/// Decentralized linear plant with n controllers over a finite horizon T:
///
///   X_{t+1} = A_t X_t + B_t U_t + W0_t,    X_1 ~ N(0, sigma_x)
///   Y^i_t   = C^i_t X_t + W^i_t,           W^i_t ~ N(0, sigma_w[i])
///   cost    = sum_{t=1..T} X_t' Q X_t + U_t' R U_t
///
/// Time-indexed sequences are stored 0-based: A[t-1] holds A_t.
struct PlantModel {
  int horizon = 0;
  int state_dim = 0;
  std::vector<int> action_dims;
  std::vector<int> obs_dims;

  std::vector<Mat> A;               // [t-1], d_x x d_x
  std::vector<Mat> B;               // [t-1], d_x x sum(d_u)
  std::vector<std::vector<Mat>> C;  // [i][t-1], d_y[i] x d_x
  Mat Q;
  Mat R;
  Mat sigma_x;
  Mat sigma_w0;
  std::vector<Mat> sigma_w;  // [i]

  int controllers() const { return static_cast<int>(action_dims.size()); }
  int total_action_dim() const {
    return std::accumulate(action_dims.begin(), action_dims.end(), 0);
  }
  int total_obs_dim() const {
    return std::accumulate(obs_dims.begin(), obs_dims.end(), 0);
  }
  int action_offset(int i) const {
    return std::accumulate(action_dims.begin(), action_dims.begin() + i, 0);
  }
  int obs_offset(int i) const {
    return std::accumulate(obs_dims.begin(), obs_dims.begin() + i, 0);
  }

  void check_time(int t) const {
    if (t < 1 || t > horizon)
      throw Error(ErrorCode::kTimeOutOfRange,
                  "t=" + std::to_string(t) + " outside 1.." + std::to_string(horizon));
  }

  /// Throws kInvalidModel naming the offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
      throw Error(ErrorCode::kInvalidModel, msg, field);
    };
    if (horizon < 1) fail("horizon", "must be >= 1");
    if (state_dim < 1) fail("dims.d_x", "must be >= 1");
    const int n = controllers();
    if (n < 1) fail("dims.d_u", "at least one controller required");
    if (static_cast<int>(obs_dims.size()) != n) fail("dims.d_y", "one entry per controller");
    for (int i = 0; i < n; ++i) {
      if (action_dims[i] < 0) fail("dims.d_u", "negative dimension");
      if (obs_dims[i] < 0) fail("dims.d_y", "negative dimension");
    }
    const int du = total_action_dim();
    if (static_cast<int>(A.size()) != horizon) fail("dynamics.A", "need one matrix per step");
    if (static_cast<int>(B.size()) != horizon) fail("dynamics.B", "need one matrix per step");
    for (int t = 0; t < horizon; ++t) {
      if (A[t].rows() != state_dim || A[t].cols() != state_dim || !all_finite(A[t]))
        fail("dynamics.A", "step " + std::to_string(t + 1) + " must be finite d_x x d_x");
      if (B[t].rows() != state_dim || B[t].cols() != du || !all_finite(B[t]))
        fail("dynamics.B", "step " + std::to_string(t + 1) + " must be finite d_x x sum(d_u)");
    }
    if (static_cast<int>(C.size()) != n) fail("observations.C", "one entry per controller");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(C[i].size()) != horizon)
        fail("observations.C", "controller " + std::to_string(i) + " needs one matrix per step");
      for (int t = 0; t < horizon; ++t)
        if (C[i][t].rows() != obs_dims[i] || C[i][t].cols() != state_dim || !all_finite(C[i][t]))
          fail("observations.C", "controller " + std::to_string(i) + " step " +
                                     std::to_string(t + 1) + " must be finite d_y[i] x d_x");
    }
    if (Q.rows() != state_dim || Q.cols() != state_dim) fail("cost.Q", "must be d_x x d_x");
    check_covariance(Q, "cost.Q");  // same symmetric-PSD test
    if (R.rows() != du || R.cols() != du) fail("cost.R", "must be sum(d_u) x sum(d_u)");
    if (!all_finite(R) || (du > 0 && (R - R.transpose()).cwiseAbs().maxCoeff() >
                                          1e-12 * R.cwiseAbs().maxCoeff()))
      fail("cost.R", "must be finite and symmetric");
    if (du > 0) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(R, Eigen::EigenvaluesOnly);
      if (!(eig.eigenvalues().minCoeff() > 0.0)) fail("cost.R", "must be positive definite");
    }
    if (sigma_x.rows() != state_dim) fail("noise.sigma_x", "must be d_x x d_x");
    check_covariance(sigma_x, "noise.sigma_x");
    if (sigma_w0.rows() != state_dim) fail("noise.sigma_w0", "must be d_x x d_x");
    check_covariance(sigma_w0, "noise.sigma_w0");
    if (static_cast<int>(sigma_w.size()) != n) fail("noise.sigma_w", "one entry per controller");
    for (int i = 0; i < n; ++i) {
      if (sigma_w[i].rows() != obs_dims[i])
        fail("noise.sigma_w", "controller " + std::to_string(i) + " must be d_y[i] x d_y[i]");
      check_covariance(sigma_w[i], "noise.sigma_w");
    }
  }

  /// Convenience constructor for time-invariant plants; C holds one matrix per
  /// controller.
  static PlantModel time_invariant(int horizon, const Mat& a, const Mat& b,
                                   const std::vector<Mat>& c,
                                   const std::vector<int>& action_dims, const Mat& q,
                                   const Mat& r, const Mat& sigma_x, const Mat& sigma_w0,
                                   const std::vector<Mat>& sigma_w) {
    PlantModel p;
    p.horizon = horizon;
    p.state_dim = static_cast<int>(a.rows());
    p.action_dims = action_dims;
    for (const auto& ci : c) p.obs_dims.push_back(static_cast<int>(ci.rows()));
    p.A.assign(horizon, a);
    p.B.assign(horizon, b);
    for (const auto& ci : c) p.C.emplace_back(horizon, ci);
    p.Q = q;
    p.R = r;
    p.sigma_x = sigma_x;
    p.sigma_w0 = sigma_w0;
    p.sigma_w = sigma_w;
    p.validate();
    return p;
  }
};

/// C_t: vertical stack of the per-controller observation maps.
inline Mat stacked_C(const PlantModel& p, int t) {
  p.check_time(t);
  std::vector<Mat> rows;
  rows.reserve(p.C.size());
  for (const auto& ci : p.C) rows.push_back(ci[t - 1]);
  return vstack(rows);
}

/// C_{t+1} with the last step's map reused beyond the horizon; the extra step
/// only feeds quantities that are multiplied by a zero value matrix.
inline Mat next_stacked_C(const PlantModel& p, int t) {
  return stacked_C(p, std::min(t + 1, p.horizon));
}

/// blkdiag(sigma_w[1..n]).
inline Mat obs_noise_cov(const PlantModel& p) { return blkdiag(p.sigma_w); }

inline double step_cost(const PlantModel& p, const Vec& x, const Vec& u) {
  require_dims(x.size() == p.state_dim, "step_cost: state dimension");
  require_dims(u.size() == p.total_action_dim(), "step_cost: action dimension");
  return x.dot(p.Q * x) + u.dot(p.R * u);
}

}  // namespace dlqg
