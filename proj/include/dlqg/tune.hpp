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
#include "dlqg/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>
#include <vector>

namespace dlqg {

struct TuneOptions {
  int budget = 1000;  // total solver evaluations over all starts
  int restarts = 0;   // random starts in addition to the all-zero start
  std::uint64_t seed = 0;
  int threads = 1;
  double initial_step = 0.5;
  double min_step = 1e-6;
  double rtol = kDefaultRtol;
};

struct TuneLogEntry {
  int restart = 0;
  int eval = 0;  // 1-based evaluation index within the restart
  double J_incumbent = 0.0;
};

struct TuneResult {
  LocalGains gains;
  SolvedStrategy strategy;
  double J = std::numeric_limits<double>::infinity();
  int best_restart = 0;
  int evaluations = 0;
  std::vector<TuneLogEntry> log;  // restart-major order
};

namespace detail {

/// Flat view of every block entry of (G, H); off-diagonal blocks have no slot.
inline std::vector<double> flatten_gains(const LocalGains& lg) {
  std::vector<double> out;
  for (int t = 0; t < lg.horizon(); ++t)
    for (const auto* seq : {&lg.G[t], &lg.H[t]})
      for (const Mat& b : *seq)
        for (Eigen::Index r = 0; r < b.rows(); ++r)
          for (Eigen::Index c = 0; c < b.cols(); ++c) out.push_back(b(r, c));
  return out;
}

inline LocalGains unflatten_gains(const LocalGains& shape, const std::vector<double>& v) {
  LocalGains out = shape;
  std::size_t k = 0;
  for (int t = 0; t < out.horizon(); ++t)
    for (auto* seq : {&out.G[t], &out.H[t]})
      for (Mat& b : *seq)
        for (Eigen::Index r = 0; r < b.rows(); ++r)
          for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = v[k++];
  return out;
}

struct StartOutcome {
  std::vector<double> best;
  double J = std::numeric_limits<double>::infinity();
  int evals = 0;
  std::vector<TuneLogEntry> log;
};

/// Compass search from one start: first-improvement on each coordinate
/// (+step then -step), step halved after a sweep without improvement.
inline StartOutcome compass_search(const PlantModel& p, const MemoryProtocol& mp,
                                   const LocalGains& shape, std::vector<double> x, int budget,
                                   int restart, const TuneOptions& opt) {
  StartOutcome out;
  auto evaluate = [&](const std::vector<double>& v) {
    double j;
    try {
      j = solve(p, mp, unflatten_gains(shape, v), opt.rtol).J;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumericalBreakdown) throw;
      j = std::numeric_limits<double>::infinity();
    }
    ++out.evals;
    return j;
  };
  if (budget < 1) return out;
  out.J = evaluate(x);
  out.best = x;
  out.log.push_back({restart, out.evals, out.J});
  double step = opt.initial_step;
  while (out.evals < budget && step >= opt.min_step && !x.empty()) {
    bool improved = false;
    for (std::size_t i = 0; i < x.size() && out.evals < budget; ++i) {
      for (double sign : {1.0, -1.0}) {
        if (out.evals >= budget) break;
        std::vector<double> cand = x;
        cand[i] += sign * step;
        const double j = evaluate(cand);
        const bool accepted = j < out.J;
        if (accepted) {
          out.J = j;
          x = std::move(cand);
          out.best = x;
          improved = true;
        }
        out.log.push_back({restart, out.evals, out.J});
        if (accepted) break;
      }
    }
    if (!improved) step *= 0.5;
  }
  return out;
}

}  // namespace detail

/// Pattern search over the local gains. Start 0 is all-zero; start r >= 1
/// draws every block entry from N(0, 1) using seeded_stream(seed, r). The
/// budget is split evenly across starts, the remainder going to the earliest.
/// Starts run in parallel when threads > 1; the outcome does not depend on it.
inline TuneResult tune(const PlantModel& p, const MemoryProtocol& mp, const TuneOptions& opt) {
  require_dims(opt.budget >= 1, "tune: budget must be at least 1");
  const LocalGains shape = LocalGains::zeros(p, mp);
  const int starts = opt.restarts + 1;
  std::vector<int> budgets(starts, opt.budget / starts);
  for (int r = 0; r < opt.budget % starts; ++r) ++budgets[r];

  std::vector<std::vector<double>> inits(starts);
  const std::size_t nparam = detail::flatten_gains(shape).size();
  for (int r = 0; r < starts; ++r) {
    inits[r].assign(nparam, 0.0);
    if (r == 0) continue;
    RandomStream rs = seeded_stream(opt.seed, static_cast<std::uint64_t>(r));
    for (auto& v : inits[r]) v = rs.normal();
  }

  std::vector<detail::StartOutcome> outcomes(starts);
  auto run = [&](int r) {
    outcomes[r] = detail::compass_search(p, mp, shape, inits[r], budgets[r], r, opt);
  };
  const int workers = std::clamp(opt.threads, 1, starts);
  if (workers == 1) {
    for (int r = 0; r < starts; ++r) run(r);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int r = w; r < starts; r += workers) run(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  TuneResult res;
  for (int r = 0; r < starts; ++r) {
    const auto& o = outcomes[r];
    res.evaluations += o.evals;
    res.log.insert(res.log.end(), o.log.begin(), o.log.end());
    if (o.evals > 0 && (o.J < res.J || (res.J == std::numeric_limits<double>::infinity() &&
                                        res.gains.horizon() == 0))) {
      res.J = o.J;
      res.best_restart = r;
      res.gains = detail::unflatten_gains(shape, o.best);
    }
  }
  res.strategy = solve(p, mp, res.gains, opt.rtol);
  return res;
}

inline void write_tune_log_csv(std::ostream& os, const std::vector<TuneLogEntry>& log) {
  os << "restart,eval,J_incumbent\n";
  os.precision(17);
  for (const auto& e : log) os << e.restart << ',' << e.eval << ',' << e.J_incumbent << '\n';
}

}  // namespace dlqg
