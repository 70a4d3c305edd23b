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

#include "dlqg/infostructure.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace dlqg {
namespace {

using testsupport::InstanceShape;
using testsupport::random_plant;

PlantModel plant_with(std::vector<int> du, std::vector<int> dy, int horizon = 6) {
  InstanceShape s;
  s.dx = 2;
  s.du = std::move(du);
  s.dy = std::move(dy);
  s.horizon = horizon;
  return random_plant(17, s);
}

Mat mat(int r, int c, std::initializer_list<double> v) {
  Mat m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

TEST(SymmetricDelay, TwoStepBlocksMatchTheDisplayedUpdate) {
  // M^i_{t+1} = 0 M + [I;0] Y + [0;I] U,  Z^i_t = I M + 0 Y + 0 U.
  const PlantModel p = plant_with({1, 1}, {1, 1});
  const MemoryProtocol mp = build_symmetric_delay(p, 2);
  for (int i = 0; i < 2; ++i)
    for (int t = 1; t <= p.horizon; ++t) {
      EXPECT_EQ(controller_block(mp, i, t, Block::kMM), Mat::Zero(2, 2));
      EXPECT_EQ(controller_block(mp, i, t, Block::kMY), mat(2, 1, {1, 0}));
      EXPECT_EQ(controller_block(mp, i, t, Block::kMU), mat(2, 1, {0, 1}));
      EXPECT_EQ(controller_block(mp, i, t, Block::kZM), Mat::Identity(2, 2));
      EXPECT_EQ(controller_block(mp, i, t, Block::kZY), Mat::Zero(2, 1));
      EXPECT_EQ(controller_block(mp, i, t, Block::kZU), Mat::Zero(2, 1));
    }
  EXPECT_EQ(mp.delay, 2);
  EXPECT_TRUE(mp.strict);
}

TEST(SymmetricDelay, OneStepSharesTheCurrentPair) {
  const PlantModel p = plant_with({1, 2}, {2, 1});
  const MemoryProtocol mp = build_symmetric_delay(p, 1);
  EXPECT_EQ(mp.total_memory_dim(), 0);
  EXPECT_EQ(mp.shared_dim(1), 6);
  const Mat zy = controller_block(mp, 0, 1, Block::kZY);
  EXPECT_EQ(zy, vstack({Mat::Identity(2, 2), Mat::Zero(1, 2)}));
  EXPECT_EQ(controller_block(mp, 1, 3, Block::kZU), vstack({Mat::Zero(1, 2), Mat::Identity(2, 2)}));
}

TEST(SymmetricDelay, ThreeStepShiftRegister) {
  const PlantModel p = plant_with({1}, {1});
  const MemoryProtocol mp = build_symmetric_delay(p, 3);
  Mat shift = Mat::Zero(4, 4);
  shift.block(2, 0, 2, 2).setIdentity();
  EXPECT_EQ(controller_block(mp, 0, 1, Block::kMM), shift);
  Mat zm = Mat::Zero(2, 4);
  zm.block(0, 2, 2, 2).setIdentity();
  EXPECT_EQ(controller_block(mp, 0, 1, Block::kZM), zm);
}

TEST(SymmetricDelay, RejectsBadDelays) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 4);
  for (int k : {0, -1, 5}) {
    try {
      build_symmetric_delay(p, k);
      FAIL() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidDelay);
    }
  }
}

TEST(Validator, StrictBuildersPassAndEverySingleFlipIsCaught) {
  for (const auto& dims : {std::pair{std::vector<int>{1, 1}, std::vector<int>{1, 1}},
                           std::pair{std::vector<int>{2, 1}, std::vector<int>{1, 2}}}) {
    const PlantModel p = plant_with(dims.first, dims.second, 4);
    for (int k = 1; k <= 3; ++k) {
      const MemoryProtocol mp = build_symmetric_delay(p, k);
      const auto rep = validate(mp);
      ASSERT_TRUE(rep.ok()) << rep.summary();
      EXPECT_EQ(rep.summary(), "dims OK, block-diagonal OK, A1 OK, A2 OK");
      const auto& s = mp.step(2);
      for (Mat ProtocolStep::*blk : {&ProtocolStep::mm, &ProtocolStep::my, &ProtocolStep::mu,
                                     &ProtocolStep::zm, &ProtocolStep::zy, &ProtocolStep::zu}) {
        const Mat& m = s.*blk;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (m(r, c) != 1.0) continue;
            MemoryProtocol mutant = mp;
            (mutant.steps[1].*blk)(r, c) = 0.0;
            EXPECT_TRUE(validate(mutant).has("A2")) << "k=" << k << " r=" << r << " c=" << c;
          }
      }
    }
  }
}

TEST(Validator, ReportsOffDiagonalAndNonBinaryEntries) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 3);
  MemoryProtocol mp = build_symmetric_delay(p, 2);
  mp.steps[0].my(0, 1) = 1.0;  // controller 1 memory reads controller 2's Y
  EXPECT_TRUE(validate(mp).has("block-diagonal"));
  mp = build_symmetric_delay(p, 2);
  mp.steps[0].mu(1, 0) = 0.5;
  const auto rep = validate(mp);
  EXPECT_TRUE(rep.has("A1"));
  mp = build_symmetric_delay(p, 2);
  mp.steps[0].zm = Mat::Zero(3, 4);
  EXPECT_TRUE(validate(mp).has("dims"));
}

TEST(Validator, GeneralizedProtocolsSkipStrictChecksUnlessForced) {
  const PlantModel p = plant_with({1, 1}, {1, 1});
  const MemoryProtocol cs = build_control_sharing(p);
  EXPECT_FALSE(cs.strict);
  EXPECT_TRUE(validate(cs).ok());
  const auto forced = validate(cs, CheckMode::kForceStrict);
  EXPECT_TRUE(forced.has("A2-col"));
  EXPECT_FALSE(forced.has("A1"));
  EXPECT_FALSE(forced.has("block-diagonal"));

  const MemoryProtocol os = build_one_sided(p);
  EXPECT_TRUE(validate(os).ok());
  EXPECT_TRUE(validate(os, CheckMode::kForceStrict).has("A2"));
}

// ---------------------------------------------------------------------------
// Asymmetric delays
// ---------------------------------------------------------------------------

DelayGraph three_node_graph() { return DelayGraph{{{1, 1, 2}, {1, 1, 1}, {2, 1, 1}}}; }

TEST(AsymmetricDelay, ThreeControllerGraphBlocks) {
  const PlantModel p = plant_with({1, 1, 1}, {1, 1, 1}, 5);
  const MemoryProtocol mp = build_asymmetric_delay(p, three_node_graph());
  ASSERT_EQ(mp.memory_dims, (std::vector<int>{2, 4, 2}));
  EXPECT_EQ(mp.delay, 2);
  const Mat my = mat(8, 3, {1, 0, 0,  0, 0, 0,                             //
                            1, 0, 0,  0, 0, 0,  0, 0, 1,  0, 0, 0,         //
                            0, 0, 1,  0, 0, 0});
  const Mat mu = mat(8, 3, {0, 0, 0,  1, 0, 0,                             //
                            0, 0, 0,  1, 0, 0,  0, 0, 0,  0, 0, 1,         //
                            0, 0, 0,  0, 0, 1});
  const Mat zm = mat(6, 8, {1, 0,  0, 0, 0, 0,  0, 0,  //
                            0, 1,  0, 0, 0, 0,  0, 0,  //
                            0, 0,  0, 0, 0, 0,  0, 0,  //
                            0, 0,  0, 0, 0, 0,  0, 0,  //
                            0, 0,  0, 0, 0, 0,  1, 0,  //
                            0, 0,  0, 0, 0, 0,  0, 1});
  const Mat zy = mat(6, 3, {0, 0, 0,  0, 0, 0,  0, 1, 0,  0, 0, 0,  0, 0, 0,  0, 0, 0});
  const Mat zu = mat(6, 3, {0, 0, 0,  0, 0, 0,  0, 0, 0,  0, 1, 0,  0, 0, 0,  0, 0, 0});
  for (int t = 1; t <= p.horizon; ++t) {
    const auto& s = mp.step(t);
    EXPECT_EQ(s.mm, Mat::Zero(8, 8));
    EXPECT_EQ(s.my, my);
    EXPECT_EQ(s.mu, mu);
    EXPECT_EQ(s.zm, zm);
    EXPECT_EQ(s.zy, zy);
    EXPECT_EQ(s.zu, zu);
  }
}

std::set<Token> nonzero(const std::vector<Token>& v) {
  std::set<Token> out;
  for (const auto& t : v)
    if (!t.is_zero()) out.insert(t);
  return out;
}

std::set<Token> data_tokens(const PlantModel& p, int j, int from, int to) {
  std::set<Token> out;
  for (int s = std::max(from, 1); s <= to; ++s) {
    for (int c = 0; c < p.obs_dims[j]; ++c) out.insert(Token{Token::Kind::kY, j, s, c});
    for (int c = 0; c < p.action_dims[j]; ++c) out.insert(Token{Token::Kind::kU, j, s, c});
  }
  return out;
}

/// Controller i at time t must know exactly (Y^j, U^j)_{1:t-k_ij} through
/// M^i_t and Z_{1:t-1}; the shared part must be (Y^j, U^j)_{1:t-k*_j}.
void expect_information_sets(const PlantModel& p, const MemoryProtocol& mp, const DelayGraph& g) {
  const TokenTrace trace = simulate_tokens(mp);
  const int n = p.controllers();
  for (int t = 1; t <= p.horizon + 1; ++t) {
    std::set<Token> shared_expected;
    for (int j = 0; j < n; ++j) {
      const auto d = data_tokens(p, j, 1, t - g.worst_delay(j));
      shared_expected.insert(d.begin(), d.end());
    }
    EXPECT_EQ(trace.shared_memory_at(t), shared_expected) << "t=" << t;
    for (int i = 0; i < n; ++i) {
      std::set<Token> known = trace.shared_memory_at(t);
      const auto mem = nonzero(trace.memory_of(mp, i, t));
      known.insert(mem.begin(), mem.end());
      std::set<Token> expected;
      for (int j = 0; j < n; ++j) {
        const auto d = data_tokens(p, j, 1, t - g.k[i][j]);
        expected.insert(d.begin(), d.end());
      }
      EXPECT_EQ(known, expected) << "controller " << i << " t=" << t;
    }
  }
  EXPECT_TRUE(token_issues(mp, trace).empty());
}

TEST(AsymmetricDelay, InformationSetsMatchTheDelayGraph) {
  const PlantModel p3 = plant_with({1, 1, 1}, {1, 1, 1}, 6);
  expect_information_sets(p3, build_asymmetric_delay(p3, three_node_graph()), three_node_graph());
  const DelayGraph cycle{{{1, 2, 1}, {1, 1, 2}, {2, 1, 1}}};
  expect_information_sets(p3, build_asymmetric_delay(p3, cycle), cycle);
  const PlantModel p2 = plant_with({2, 1}, {1, 2}, 6);
  const DelayGraph lopsided{{{1, 3}, {2, 1}}};
  expect_information_sets(p2, build_asymmetric_delay(p2, lopsided), lopsided);
}

TEST(SymmetricDelay, InformationSetsMatchTheDelay) {
  const PlantModel p = plant_with({1, 2}, {2, 1}, 6);
  for (int k = 1; k <= 3; ++k)
    expect_information_sets(p, build_symmetric_delay(p, k), DelayGraph::uniform(2, k));
}

TEST(AsymmetricDelay, UniformGraphReproducesSymmetricInformation) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 5);
  const MemoryProtocol a = build_asymmetric_delay(p, DelayGraph::uniform(2, 2));
  const MemoryProtocol s = build_symmetric_delay(p, 2);
  const TokenTrace ta = simulate_tokens(a), ts = simulate_tokens(s);
  for (int t = 1; t <= p.horizon + 1; ++t) {
    EXPECT_EQ(ta.shared_memory_at(t), ts.shared_memory_at(t));
    for (int i = 0; i < 2; ++i)
      EXPECT_EQ(nonzero(ta.memory_of(a, i, t)), nonzero(ts.memory_of(s, i, t)));
  }
}

TEST(AsymmetricDelay, RejectsInvalidGraphs) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 4);
  EXPECT_THROW(build_asymmetric_delay(p, DelayGraph{{{2, 1}, {1, 1}}}), Error);
  EXPECT_THROW(build_asymmetric_delay(p, DelayGraph{{{1, 0}, {1, 1}}}), Error);
  EXPECT_THROW(build_asymmetric_delay(p, DelayGraph{{{1, 5}, {1, 1}}}), Error);
  try {
    build_asymmetric_delay(p, three_node_graph());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongControllerCount);
  }
}

TEST(OtherProtocols, TokenFlow) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 4);
  const MemoryProtocol cs = build_control_sharing(p);
  const TokenTrace tc = simulate_tokens(cs);
  for (int t = 1; t <= 5; ++t) {
    std::set<Token> expected;
    for (int j = 0; j < 2; ++j)
      for (int s = 1; s < t; ++s) expected.insert(Token{Token::Kind::kU, j, s, 0});
    EXPECT_EQ(tc.shared_memory_at(t), expected);
  }
  const MemoryProtocol os = build_one_sided(p);
  EXPECT_EQ(os.step(1).shared_dims, (std::vector<int>{0, 2}));
  const TokenTrace to = simulate_tokens(os);
  EXPECT_EQ(to.shared_memory_at(4), data_tokens(p, 1, 1, 3));

  const PlantModel p3 = plant_with({1, 1, 1}, {1, 1, 1}, 4);
  try {
    build_one_sided(p3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongControllerCount);
  }
}

TEST(TokenSimulation, RejectsMixingRows) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 3);
  MemoryProtocol mp = build_symmetric_delay(p, 2);
  mp.steps[1].my(0, 0) = 2.0;
  EXPECT_THROW(simulate_tokens(mp), Error);
  mp = build_symmetric_delay(p, 2);
  mp.steps[1].mu(0, 0) = 1.0;  // row 0 now takes Y and U
  try {
    simulate_tokens(mp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedProtocol);
  }
}

TEST(SymmetricDelay, Recognizer) {
  const PlantModel p = plant_with({1, 1}, {1, 1}, 4);
  EXPECT_TRUE(is_symmetric_delay(build_symmetric_delay(p, 2), p, 2));
  EXPECT_FALSE(is_symmetric_delay(build_symmetric_delay(p, 2), p, 3));
  EXPECT_FALSE(is_symmetric_delay(build_asymmetric_delay(p, DelayGraph{{{1, 2}, {1, 1}}}), p, 2));
  EXPECT_TRUE(is_symmetric_delay(build_symmetric_delay(p, 1), p, 1));
}

}  // namespace
}  // namespace dlqg
