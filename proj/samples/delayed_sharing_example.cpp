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

// Two controllers sharing everything with a two-step delay. Solves the
// coordinator problem at G = H = 0, then runs one closed-loop episode where
// each controller computes its own action from (Sb_t, Y^i_t, M^i_t), and
// checks the delayed-sharing statistic against the reduced estimate.

#include "dlqg/dlqg.hpp"

#include <cstdio>

int main() {
  using namespace dlqg;
  Mat a(2, 2), b = Mat::Identity(2, 2);
  a << 1.0, 0.2, 0.0, 0.9;
  Mat c1(1, 2), c2(1, 2);
  c1 << 1.0, 0.0;
  c2 << 0.0, 1.0;
  const int horizon = 6, k = 2;
  const PlantModel p = PlantModel::time_invariant(
      horizon, a, b, {c1, c2}, {1, 1}, Mat::Identity(2, 2), Mat::Identity(2, 2),
      Mat::Identity(2, 2), 0.5 * Mat::Identity(2, 2), {0.5 * Mat::Identity(1, 1),
                                                       0.5 * Mat::Identity(1, 1)});
  const MemoryProtocol mp = build_symmetric_delay(p, k);
  std::printf("protocol check: %s\n", validate(mp).summary().c_str());

  const SolvedStrategy ss = solve(p, mp, LocalGains::zeros(p, mp));
  std::printf("predicted cost J = %.10f\n", ss.J);
  std::printf("exact closed-loop cost = %.10f\n", exact_cost(p, mp, ss));

  const PrimitiveNoise noise = draw_noise(p, /*seed=*/42, /*rollout=*/0);
  DelayStatTracker tracker(p, k);
  EstimatorState est = initial_estimator(ss);
  Vec x = noise.x1;
  Vec m = Vec::Zero(mp.total_memory_dim());
  double cost = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    const Vec y = stacked_C(p, t) * x + noise.w[t - 1];
    std::vector<Vec> y_local, m_local;
    for (int i = 0; i < p.controllers(); ++i) {
      y_local.push_back(y.segment(p.obs_offset(i), p.obs_dims[i]));
      m_local.push_back(m.segment(mp.memory_offset(i), mp.memory_dims[i]));
    }
    const std::vector<Vec> u_parts = act(est, p, ss, y_local, m_local);
    const Vec u = concat(u_parts);
    const Vec u_tilde = coordinator_action(est, ss);

    const Vec s_delay = tracker.stat().stacked();
    const Vec s_breve = appendix_map(ss, p, mp, k, t) * s_delay;
    std::printf("t=%d  u=(% .4f, % .4f)  |Sb - map*S| = %.2e\n", t, u(0), u(1),
                (s_breve - est.breve_S).cwiseAbs().maxCoeff());

    cost += step_cost(p, x, u);
    tracker.record(y, u, u_tilde);
    if (t == horizon) break;
    const auto& ps = mp.step(t);
    const Vec z = ps.zm * m + ps.zy * y + ps.zu * u;
    m = ps.mm * m + ps.my * y + ps.mu * u;
    x = p.A[t - 1] * x + p.B[t - 1] * u + noise.w0[t - 1];
    est = step_breve(est, p, ss, z, u_tilde);
  }
  std::printf("realized cost of this episode = %.6f\n", cost);
  return 0;
}
