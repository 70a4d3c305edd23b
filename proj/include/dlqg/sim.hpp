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
// Ground truth for everything else: closed-loop rollouts of the original
// decentralized equations and of the coordinated recursion driven by the same
// primitive noise, an exact second-moment cost, Monte Carlo with fixed-order
// reduction, and a brute-force Gaussian conditioning oracle.
//
// Primitive draws for rollout r come from seeded_stream(seed, r) in the order
// X_1, then for t = 1..T+1: W_t (all controllers stacked), W0_t. Each block
// is a standard normal vector coloured by the covariance square root.
//
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include "dlqg/coordination.hpp"
#include "dlqg/core.hpp"
#include "dlqg/estimator.hpp"
#include "dlqg/infostructure.hpp"
#include "dlqg/plant.hpp"
#include "dlqg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace dlqg {

struct PrimitiveNoise {
  Vec x1;
  std::vector<Vec> w;   // [t-1], t = 1..T+1, stacked observation noise
  std::vector<Vec> w0;  // [t-1], t = 1..T+1, process noise (the last one is unused)
};

struct NoiseRoots {
  Mat x, w, w0;
  explicit NoiseRoots(const PlantModel& p)
      : x(psd_sqrt(p.sigma_x)), w(psd_sqrt(obs_noise_cov(p))), w0(psd_sqrt(p.sigma_w0)) {}
};

inline PrimitiveNoise draw_noise(const PlantModel& p, const NoiseRoots& roots, std::uint64_t seed,
                                 std::uint64_t rollout) {
  RandomStream rs = seeded_stream(seed, rollout);
  PrimitiveNoise n;
  n.x1 = roots.x * rs.normal_vector(p.state_dim);
  for (int t = 1; t <= p.horizon + 1; ++t) {
    n.w.push_back(roots.w * rs.normal_vector(p.total_obs_dim()));
    n.w0.push_back(roots.w0 * rs.normal_vector(p.state_dim));
  }
  return n;
}

inline PrimitiveNoise draw_noise(const PlantModel& p, std::uint64_t seed, std::uint64_t rollout) {
  return draw_noise(p, NoiseRoots(p), seed, rollout);
}

/// Trajectory of the original equations under the reduced-statistic strategy.
/// Per-step vectors are indexed [t-1]; x_breve is the full filter run
/// alongside so both coordinator actions can be compared.
struct Rollout {
  std::vector<Vec> x, y, m, z, u, u_tilde, breve_S, x_breve, u_tilde_full;
  std::vector<double> step_cost;
  double cost = 0.0;
};

inline Rollout rollout_original(const PlantModel& p, const MemoryProtocol& mp,
                                const SolvedStrategy& ss, const PrimitiveNoise& noise) {
  const int T = p.horizon;
  Rollout r;
  Vec x = noise.x1;
  Vec m = Vec::Zero(mp.total_memory_dim());
  EstimatorState est = initial_estimator(ss);
  Vec xb = Vec::Zero(ss.cs.state_dim);
  for (int t = 1; t <= T; ++t) {
    const auto& ps = mp.step(t);
    const Vec y = stacked_C(p, t) * x + noise.w[t - 1];
    const Vec ut = coordinator_action(est, ss);
    const Vec u = ut + ss.gains.G_at(t) * y + ss.gains.H_at(t) * m;
    const Vec z = ps.zm * m + ps.zy * y + ps.zu * u;
    const double c = step_cost(p, x, u);
    r.x.push_back(x);
    r.y.push_back(y);
    r.m.push_back(m);
    r.z.push_back(z);
    r.u.push_back(u);
    r.u_tilde.push_back(ut);
    r.breve_S.push_back(est.breve_S);
    r.x_breve.push_back(xb);
    r.u_tilde_full.push_back(ss.K[t - 1] * xb);
    r.step_cost.push_back(c);
    r.cost += c;
    if (t == T) break;
    const Vec m_next = ps.mm * m + ps.my * y + ps.mu * u;
    x = p.A[t - 1] * x + p.B[t - 1] * u + noise.w0[t - 1];
    m = m_next;
    xb = step_full(ss, t, xb, z, ut);
    est = step_breve(est, p, ss, z, ut);
  }
  return r;
}

/// Trajectory of the coordinated recursion Xt_{t+1} = At Xt + Bt Ut + Ft W
/// with Ut = K Xb. states[t-1] = Xt_t, obs[t-1] = Yt_t, actions[t-1] = U_t
/// recovered as Ut + G Y + H M.
struct CoordinatedRollout {
  std::vector<Vec> states, obs, u_tilde, u, x_breve;
  double cost = 0.0;
};

inline CoordinatedRollout rollout_coordinated(const PlantModel& p, const SolvedStrategy& ss,
                                              const PrimitiveNoise& noise) {
  const auto& cs = ss.cs;
  const int T = cs.horizon();
  const int dx = cs.d_x, dy = cs.d_y, dm = cs.d_m;
  CoordinatedRollout r;
  Vec xt = Vec::Zero(cs.state_dim);
  xt.head(dx) = noise.x1;
  xt.segment(dx, dy) = stacked_C(p, 1) * noise.x1 + noise.w[0];
  Vec xb = Vec::Zero(cs.state_dim);
  r.obs.push_back(Vec::Zero(0));
  for (int t = 1; t <= T; ++t) {
    const auto& s = cs.at(t);
    const Vec ut = ss.K[t - 1] * xb;
    const Vec u = ut + ss.gains.G_at(t) * xt.segment(dx, dy) + ss.gains.H_at(t) * xt.tail(dm);
    r.states.push_back(xt);
    r.u_tilde.push_back(ut);
    r.u.push_back(u);
    r.x_breve.push_back(xb);
    r.cost += xt.dot(s.Q * xt) + 2.0 * xt.dot(s.N * ut) + ut.dot(s.R * ut);
    if (t == T) break;
    const Vec y_next = cs.obs(t + 1) * xt + cs.obs_action(t + 1) * ut;
    const Vec w = concat({noise.w0[t - 1], noise.w[t]});
    const Vec xt_next = s.A * xt + s.B * ut + s.F * w;
    xb = step_full(ss, t, xb, y_next, ut);
    xt = xt_next;
    r.obs.push_back(y_next);
  }
  return r;
}

struct PairedComparison {
  double state = 0.0;   // max |(X, Y, M)_original - Xt|
  double shared = 0.0;  // max |Z_{t-1} - Yt_t|
  double action = 0.0;  // max |U_original - U_coordinated|
  double reduced = 0.0; // max |L Sb - K Xb| on the original rollout
  double cost = 0.0;    // |cost_original - cost_coordinated| / max(1, |cost_original|)
  double max() const { return std::max({state, shared, action, reduced, cost}); }
};

inline PairedComparison compare_paired(const PlantModel& p, const MemoryProtocol& mp,
                                       const SolvedStrategy& ss, const PrimitiveNoise& noise) {
  const Rollout a = rollout_original(p, mp, ss, noise);
  const CoordinatedRollout b = rollout_coordinated(p, ss, noise);
  PairedComparison out;
  auto amax = [](const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); };
  for (int t = 1; t <= p.horizon; ++t) {
    const Vec orig = concat({a.x[t - 1], a.y[t - 1], a.m[t - 1]});
    out.state = std::max(out.state, amax(orig - b.states[t - 1]));
    if (t > 1) out.shared = std::max(out.shared, amax(a.z[t - 2] - b.obs[t - 1]));
    out.action = std::max(out.action, amax(a.u[t - 1] - b.u[t - 1]));
    out.reduced = std::max(out.reduced, amax(a.u_tilde[t - 1] - a.u_tilde_full[t - 1]));
  }
  out.cost = std::abs(a.cost - b.cost) / std::max(1.0, std::abs(a.cost));
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct MonteCarloResult {
  std::vector<double> costs;  // indexed by rollout
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<Rollout> samples;  // the first `keep` rollouts
};

/// Rollouts are split into contiguous index ranges across threads; costs are
/// reduced in index order so the result does not depend on `threads`.
inline MonteCarloResult monte_carlo(const PlantModel& p, const MemoryProtocol& mp,
                                    const SolvedStrategy& ss, std::uint64_t seed, int count,
                                    int threads = 1, int keep = 0) {
  require_dims(count >= 1, "monte_carlo: count must be positive");
  MonteCarloResult out;
  out.costs.assign(count, 0.0);
  const NoiseRoots roots(p);
  const int workers = std::clamp(threads, 1, count);
  auto run = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r)
      out.costs[r] = rollout_original(p, mp, ss, draw_noise(p, roots, seed, r)).cost;
  };
  if (workers == 1) {
    run(0, count);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const int lo = static_cast<int>(static_cast<long long>(count) * w / workers);
      const int hi = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
      pool.emplace_back(run, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  double sum = 0.0;
  for (double c : out.costs) sum += c;
  out.mean = sum / count;
  double sq = 0.0;
  for (double c : out.costs) sq += (c - out.mean) * (c - out.mean);
  out.stderr_ = count > 1 ? std::sqrt(sq / (count - 1) / count) : 0.0;
  for (int r = 0; r < std::min(keep, count); ++r)
    out.samples.push_back(rollout_original(p, mp, ss, draw_noise(p, roots, seed, r)));
  return out;
}

// ---------------------------------------------------------------------------
// Exact cost on the plant form
// ---------------------------------------------------------------------------

/// Expected total cost of the original closed loop, from the second moment of
/// xi_t = (X_t, M_t, Sb_t). Only plant and protocol equations are used for X
/// and M; the coordinated system enters only through the estimator update.
inline double exact_cost(const PlantModel& p, const MemoryProtocol& mp, const SolvedStrategy& ss) {
  const auto& cs = ss.cs;
  const int T = p.horizon;
  const int dx = p.state_dim, dm = mp.total_memory_dim(), ds = ss.reduced_dim();
  const int dxi = dx + dm + ds;
  const Mat sw = obs_noise_cov(p);
  const Mat proj = proj_map(p, dm);
  Mat cov = Mat::Zero(dxi, dxi);
  cov.topLeftCorner(dx, dx) = p.sigma_x;
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Mat c = stacked_C(p, t);
    const Mat g = ss.gains.G_at(t), h = ss.gains.H_at(t);
    const Mat& l = ss.L[t - 1];
    // y = Y_xi xi + w, u = U_xi xi + G w
    Mat y_xi = Mat::Zero(c.rows(), dxi);
    y_xi.leftCols(dx) = c;
    const Mat u_xi = hstack({g * c, h, l});
    Mat ut_xi = Mat::Zero(l.rows(), dxi);
    ut_xi.rightCols(ds) = l;
    const Mat xx = cov.topLeftCorner(dx, dx);
    total += (p.Q * xx).trace() +
             (p.R * (u_xi * cov * u_xi.transpose() + g * sw * g.transpose())).trace();
    if (t == T) break;
    const auto& ps = mp.step(t);
    const Mat z_xi = ps.zm * hstack({Mat::Zero(dm, dx), Mat::Identity(dm, dm), Mat::Zero(dm, ds)}) +
                     ps.zy * y_xi + ps.zu * u_xi;
    const Mat z_w = ps.zy + ps.zu * g;
    const auto& s = cs.at(t);
    const Mat lift = lift_map(p, dm, t);
    const Mat& gain = ss.filter_gain[t - 1];
    Mat s_sel = Mat::Zero(ds, dxi);
    s_sel.rightCols(ds).setIdentity();
    const Mat pred = s.A * lift * s_sel + s.B * ut_xi;
    const Mat innov = z_xi - cs.obs(t + 1) * lift * s_sel - cs.obs_action(t + 1) * ut_xi;
    Mat phi(dxi, dxi), gam_w(dxi, sw.rows()), gam_0 = Mat::Zero(dxi, dx);
    phi << p.A[t - 1] * Mat::Identity(dx, dxi) + p.B[t - 1] * u_xi,
        ps.mm * hstack({Mat::Zero(dm, dx), Mat::Identity(dm, dm), Mat::Zero(dm, ds)}) +
            ps.my * y_xi + ps.mu * u_xi,
        proj * (pred + gain * innov);
    gam_w << p.B[t - 1] * g, ps.my + ps.mu * g, proj * gain * z_w;
    gam_0.topRows(dx).setIdentity();
    cov = symmetrize(phi * cov * phi.transpose() + gam_w * sw * gam_w.transpose() +
                     gam_0 * p.sigma_w0 * gam_0.transpose());
  }
  return total;
}

// ---------------------------------------------------------------------------
// Brute-force conditioning
// ---------------------------------------------------------------------------

/// Everything at time t written as a linear map of the primitive vector
/// pi = (X_1, W_1, W0_1, W_2, W0_2, ..., W_t), whose covariance is block
/// diagonal.
struct ConditioningResult {
  Mat state_map;    // Xt_t as a map of pi
  Mat filter_map;   // recursive Xb_t as a map of pi
  Mat obs_map;      // stacked Yt_1..Yt_t as a map of pi
  Mat oracle_map;   // E[Xt_t | Yt_1..t] as a map of pi
  Mat prim_cov;
  Mat oracle_cov;   // Cov(Xt_t - E[Xt_t | ...])
  double mean_error = 0.0;  // max |(oracle_map - filter_map) prim_cov^{1/2}|
  double cov_error = 0.0;   // max |oracle_cov - P_t|, 0 when P is unavailable
};

inline ConditioningResult gaussian_conditioning(const PlantModel& p, const SolvedStrategy& ss,
                                                int t, double rtol = kDefaultRtol) {
  p.check_time(t);
  const auto& cs = ss.cs;
  const int dx = cs.d_x, dy = cs.d_y, n = cs.state_dim;
  std::vector<Mat> blocks{p.sigma_x, obs_noise_cov(p)};
  for (int s = 1; s < t; ++s) {
    blocks.push_back(p.sigma_w0);
    blocks.push_back(obs_noise_cov(p));
  }
  ConditioningResult out;
  out.prim_cov = blkdiag(blocks);
  const int np = static_cast<int>(out.prim_cov.rows());
  Mat xt = Mat::Zero(n, np);
  xt.block(0, 0, dx, dx).setIdentity();
  xt.block(dx, 0, dy, dx) = stacked_C(p, 1);
  xt.block(dx, dx, dy, dy).setIdentity();
  Mat xb = Mat::Zero(n, np);
  std::vector<Mat> obs;
  int col = dx + dy;
  for (int s = 1; s < t; ++s) {
    const auto& st = cs.at(s);
    const Mat ut = ss.K[s - 1] * xb;
    const Mat y = cs.obs(s + 1) * xt + cs.obs_action(s + 1) * ut;
    Mat w = Mat::Zero(dx + dy, np);
    w.middleCols(col, dx + dy).setIdentity();
    col += dx + dy;
    const Mat xt_next = st.A * xt + st.B * ut + st.F * w;
    xb = st.A * xb + st.B * ut +
         ss.filter_gain[s - 1] * (y - cs.obs(s + 1) * xb - cs.obs_action(s + 1) * ut);
    xt = xt_next;
    obs.push_back(y);
  }
  out.state_map = xt;
  out.filter_map = xb;
  out.obs_map = obs.empty() ? Mat::Zero(0, np) : vstack(obs);
  const Mat cov_xy = xt * out.prim_cov * out.obs_map.transpose();
  const Mat cov_yy = symmetrize(out.obs_map * out.prim_cov * out.obs_map.transpose());
  out.oracle_map = cov_xy * pinv(cov_yy, rtol) * out.obs_map;
  const Mat err = xt - out.oracle_map;
  out.oracle_cov = symmetrize(err * out.prim_cov * err.transpose());
  const Mat diff = (out.oracle_map - out.filter_map) * psd_sqrt(out.prim_cov);
  out.mean_error = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
  if (static_cast<int>(ss.P.size()) >= t)  // strategies read from file carry no P
    out.cov_error = (out.oracle_cov - ss.P[t - 1]).cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory export
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_trajectory_csv(std::ostream& os, const Rollout& r) {
  auto header = [&](const char* name, Eigen::Index dim) {
    for (Eigen::Index i = 0; i < dim; ++i) os << ',' << name << '_' << i;
  };
  os << 't';
  header("x", r.x.front().size());
  header("y", r.y.front().size());
  header("u", r.u.front().size());
  Eigen::Index dz = 0;  // shared increments may change size over t
  for (const auto& z : r.z) dz = std::max(dz, z.size());
  header("z", dz);
  os << ",cost_step\n";
  for (std::size_t t = 0; t < r.x.size(); ++t) {
    os << t + 1;
    for (const Vec* v : {&r.x[t], &r.y[t], &r.u[t], &r.z[t]})
      for (Eigen::Index i = 0; i < v->size(); ++i) os << ',' << format_double((*v)(i));
    for (Eigen::Index i = r.z[t].size(); i < dz; ++i) os << ',';
    os << ',' << format_double(r.step_cost[t]) << '\n';
  }
}

}  // namespace dlqg
