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

// Random desk-scale instances and independent reference computations shared
// by the unit tests and the acceptance binary.

#pragma once

#include "dlqg/dlqg.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace dlqg::testsupport {

inline Mat random_psd(RandomStream& rs, int d, double floor) {
  const Mat m = rs.normal_matrix(d, d);
  return symmetrize(m * m.transpose() / std::max(d, 1) + floor * Mat::Identity(d, d));
}

struct InstanceShape {
  int dx = 2;
  std::vector<int> du{1, 1};
  std::vector<int> dy{1, 1};
  int horizon = 5;
  bool time_varying = true;
};

/// Random plant with moderately scaled dynamics and full-rank covariances.
inline PlantModel random_plant(std::uint64_t seed, const InstanceShape& s) {
  RandomStream rs = seeded_stream(seed, 1000);
  PlantModel p;
  p.horizon = s.horizon;
  p.state_dim = s.dx;
  p.action_dims = s.du;
  p.obs_dims = s.dy;
  const int du = p.total_action_dim();
  const int steps = s.time_varying ? s.horizon : 1;
  for (int t = 0; t < steps; ++t) {
    p.A.push_back(rs.normal_matrix(s.dx, s.dx) * (0.7 / std::sqrt(s.dx)) +
                  0.5 * Mat::Identity(s.dx, s.dx));
    p.B.push_back(rs.normal_matrix(s.dx, du) * 0.7);
  }
  p.C.resize(s.du.size());
  for (std::size_t i = 0; i < s.du.size(); ++i)
    for (int t = 0; t < steps; ++t) p.C[i].push_back(rs.normal_matrix(s.dy[i], s.dx));
  if (!s.time_varying) {
    p.A.assign(s.horizon, p.A.front());
    p.B.assign(s.horizon, p.B.front());
    for (auto& c : p.C) c.assign(s.horizon, c.front());
  }
  p.Q = random_psd(rs, s.dx, 0.1);
  p.R = random_psd(rs, du, 0.5);
  p.sigma_x = random_psd(rs, s.dx, 0.2);
  p.sigma_w0 = random_psd(rs, s.dx, 0.1);
  for (int d : s.dy) p.sigma_w.push_back(random_psd(rs, d, 0.1));
  p.validate();
  return p;
}

inline LocalGains random_gains(const PlantModel& p, const MemoryProtocol& mp, RandomStream& rs,
                               double scale) {
  LocalGains lg = LocalGains::zeros(p, mp);
  for (auto& gt : lg.G)
    for (auto& b : gt) b = rs.normal_matrix(b.rows(), b.cols()) * scale;
  for (auto& ht : lg.H)
    for (auto& b : ht) b = rs.normal_matrix(b.rows(), b.cols()) * scale;
  return lg;
}

inline std::vector<Mat> random_coordinator_gains(const SolvedStrategy& ss, RandomStream& rs,
                                                 double scale) {
  std::vector<Mat> out;
  for (const auto& k : ss.K) out.push_back(rs.normal_matrix(k.rows(), k.cols()) * scale);
  return out;
}

/// Scalar plant x' = a x + b u + w0, y = c x + w shared by one controller.
inline PlantModel scalar_plant(int horizon, double a, double b, double c, double q, double r,
                               double sx, double sw0, double sw) {
  auto s = [](double v) { return Mat::Constant(1, 1, v); };
  return PlantModel::time_invariant(horizon, s(a), s(b), {s(c)}, {1}, s(q), s(r), s(sx), s(sw0),
                                    {s(sw)});
}

/// Shares every controller's observation twice, with no memory, so the
/// innovation covariance is exactly singular.
inline MemoryProtocol duplicate_share_protocol(const PlantModel& p) {
  MemoryProtocol mp;
  mp.kind = ProtocolKind::kExplicit;
  mp.obs_dims = p.obs_dims;
  mp.action_dims = p.action_dims;
  mp.memory_dims.assign(p.controllers(), 0);
  ProtocolStep s;
  std::vector<Mat> zy;
  for (int i = 0; i < p.controllers(); ++i) {
    const int d = p.obs_dims[i];
    zy.push_back(vstack({Mat::Identity(d, d), Mat::Identity(d, d)}));
    s.shared_dims.push_back(2 * d);
  }
  s.zy = blkdiag(zy);
  const int dz = static_cast<int>(s.zy.rows());
  s.mm = Mat::Zero(0, 0);
  s.my = Mat::Zero(0, p.total_obs_dim());
  s.mu = Mat::Zero(0, p.total_action_dim());
  s.zm = Mat::Zero(dz, 0);
  s.zu = Mat::Zero(dz, p.total_action_dim());
  mp.steps.assign(p.horizon, s);
  return mp;
}

/// Centralized partially observed LQG, computed directly on the plant:
/// u_t = Kc_t E[x_t | y_1..t, u_1..t-1].
struct ClassicalLqg {
  std::vector<Mat> Kc;       // control gains
  std::vector<Mat> Lf;       // measurement-update gains P C'(C P C' + Sw)^{-1}
  std::vector<Mat> P_prior;  // Cov(x_t - E[x_t | y_1..t-1])
  std::vector<Mat> P_post;   // Cov(x_t - E[x_t | y_1..t])
  double cost = 0.0;
};

inline ClassicalLqg classical_lqg(const PlantModel& p) {
  const int T = p.horizon;
  ClassicalLqg out;
  out.Kc.assign(T, Mat());
  std::vector<Mat> sc(T + 1);
  sc[T] = Mat::Zero(p.state_dim, p.state_dim);
  for (int t = T; t >= 1; --t) {
    const Mat& a = p.A[t - 1];
    const Mat& b = p.B[t - 1];
    const Mat gram = p.R + b.transpose() * sc[t] * b;
    out.Kc[t - 1] = -gram.inverse() * b.transpose() * sc[t] * a;
    sc[t - 1] = p.Q + a.transpose() * sc[t] * a + a.transpose() * sc[t] * b * out.Kc[t - 1];
    sc[t - 1] = symmetrize(sc[t - 1]);
  }
  Mat prior = p.sigma_x;
  const Mat sw = obs_noise_cov(p);
  for (int t = 1; t <= T; ++t) {
    const Mat c = stacked_C(p, t);
    const Mat lf = prior * c.transpose() * (c * prior * c.transpose() + sw).inverse();
    const Mat post = symmetrize(prior - lf * c * prior);
    out.Lf.push_back(lf);
    out.P_prior.push_back(prior);
    out.P_post.push_back(post);
    prior = symmetrize(p.A[t - 1] * post * p.A[t - 1].transpose() + p.sigma_w0);
  }
  double j = (sc[0] * p.sigma_x).trace();
  for (int t = 1; t < T; ++t) j += (sc[t] * p.sigma_w0).trace();
  for (int t = 1; t <= T; ++t) {
    const Mat& b = p.B[t - 1];
    const Mat& k = out.Kc[t - 1];
    j += (k.transpose() * (p.R + b.transpose() * sc[t] * b) * k * out.P_post[t - 1]).trace();
  }
  out.cost = j;
  return out;
}

/// Local gains realizing the classical controller's dependence on the fresh
/// observation: G_t = Kc_t Lf_t.
inline LocalGains classical_local_gains(const PlantModel& p, const MemoryProtocol& mp,
                                        const ClassicalLqg& c) {
  LocalGains lg = LocalGains::zeros(p, mp);
  for (int t = 0; t < p.horizon; ++t) lg.G[t][0] = c.Kc[t] * c.Lf[t];
  return lg;
}


/// Rollout data written as linear maps of a standard normal vector xi: the
/// primitive noise is (root_x xi_0, root_w xi_1, root_w0 xi_2, ...), drawn in
/// the same order as draw_noise. Column j is the rollout driven by e_j.
struct BasisRollouts {
  int dim = 0;
  std::vector<Rollout> columns;
  double expected_cost = 0.0;  // E[cost] = sum_j cost(e_j) for a quadratic form
};

inline PrimitiveNoise basis_noise(const PlantModel& p, const NoiseRoots& roots, const Vec& xi) {
  const int dx = p.state_dim, dy = p.total_obs_dim();
  PrimitiveNoise n;
  int off = 0;
  n.x1 = roots.x * xi.segment(off, dx);
  off += dx;
  for (int t = 1; t <= p.horizon + 1; ++t) {
    n.w.push_back(roots.w * xi.segment(off, dy));
    off += dy;
    n.w0.push_back(roots.w0 * xi.segment(off, dx));
    off += dx;
  }
  return n;
}

inline BasisRollouts basis_rollouts(const PlantModel& p, const MemoryProtocol& mp,
                                    const SolvedStrategy& ss) {
  BasisRollouts out;
  out.dim = p.state_dim + (p.horizon + 1) * (p.total_obs_dim() + p.state_dim);
  const NoiseRoots roots(p);
  for (int j = 0; j < out.dim; ++j) {
    const Vec e = Vec::Unit(out.dim, j);
    out.columns.push_back(rollout_original(p, mp, ss, basis_noise(p, roots, e)));
    out.expected_cost += out.columns.back().cost;
  }
  return out;
}

/// Stacks one per-step vector from every basis rollout into a matrix.
template <class Get>
Mat basis_map(const BasisRollouts& b, Get get) {
  const Eigen::Index rows = get(b.columns.front()).size();
  Mat m(rows, b.dim);
  for (int j = 0; j < b.dim; ++j) m.col(j) = get(b.columns[j]);
  return m;
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace dlqg::testsupport
