// Copyright 2026 The async-admm Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "async_admm/scheduler.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "async_admm/edge_consensus.h"
#include "async_admm/errors.h"
#include "oracles.h"
#include "test_util.h"

namespace async_admm {
namespace {

using testing_util::Gen;

Graph Star(int leaves) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
  return MakeGraph(leaves + 1, edges);
}

TEST(BuildPartition, EdgeBlocksOwnTheirEndpoints) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(3), {1, 2, 3});
  ASSERT_EQ(r.partition.num_blocks(), 2);
  EXPECT_EQ(r.partition.components[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(r.partition.components[1], (std::vector<int>{1, 2}));
}

TEST(BuildPartition, SingleBlockCoversAllComponents) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(4), {1, 2, 3, 4});
  const ProperPartition p = SingleBlockPartition(r.problem.z_set, r.problem.constraints);
  EXPECT_EQ(p.components[0], (std::vector<int>{0, 1, 2, 3}));
}

TEST(BuildPartition, SplittingACoupledPairIsImproper) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(2), {1, 2});
  try {
    BuildPartition(r.problem.z_set, r.problem.constraints, {{0}, {1}});
    FAIL();
  } catch (const AdmmError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kImproperPartition);
  }
}

TEST(BuildPartition, CoverageErrors) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(3), {1, 2, 3});
  const auto code = [&](std::vector<std::vector<int>> blocks) {
    try {
      BuildPartition(r.problem.z_set, r.problem.constraints, std::move(blocks));
    } catch (const AdmmError& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code({{0, 1}}), ErrorCode::kNonCovering);
  EXPECT_EQ(code({{0, 1}, {1, 2, 3}}), ErrorCode::kNonCovering);
  EXPECT_EQ(code({{0, 1}, {2, 3, 9}}), ErrorCode::kNonCovering);
}

TEST(DeriveProbabilities, DisjointComponentSets) {
  const ConstraintSystem cs(2, 2, 1, {{0, 0, 0, 1.0}, {1, 1, 0, 1.0}},
                            Eigen::VectorXd::Constant(2, -1.0));
  const ProperPartition p = BuildPartition(FeasibleSet::Free(2), cs, {{0}, {1}});
  const ActivationDistribution d =
      DeriveProbabilities(p, (Eigen::VectorXd(2) << 0.5, 0.5).finished(), 2);
  EXPECT_DOUBLE_EQ(d.alpha[0], 0.5);
  EXPECT_DOUBLE_EQ(d.alpha[1], 0.5);
}

TEST(DeriveProbabilities, SharedEndpointAccumulates) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(4), {1, 2, 3, 4});
  const ProperPartition p =
      BuildPartition(r.problem.z_set, r.problem.constraints, {{0, 1}, {2, 3, 4, 5}});
  const ActivationDistribution d =
      DeriveProbabilities(p, (Eigen::VectorXd(2) << 0.25, 0.75).finished(), 4);
  EXPECT_DOUBLE_EQ(d.alpha[0], 0.25);
  EXPECT_DOUBLE_EQ(d.alpha[1], 1.0);
  EXPECT_DOUBLE_EQ(d.alpha[3], 0.75);
  EXPECT_DOUBLE_EQ(d.lambda[0], 0.25);
  EXPECT_DOUBLE_EQ(d.lambda[5], 0.75);
}

TEST(DeriveProbabilities, SingleBlockIsFullActivation) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(3), {1, 2, 3});
  const ProperPartition p = SingleBlockPartition(r.problem.z_set, r.problem.constraints);
  const ActivationDistribution d = DeriveProbabilities(p, Eigen::VectorXd::Ones(1), 3);
  EXPECT_TRUE(d.lambda.isOnes());
  EXPECT_TRUE(d.alpha.isOnes());
  EXPECT_TRUE(d.weight_diag.isOnes());
}

TEST(DeriveProbabilities, StarCenterAlwaysActive) {
  const int leaves = 5;
  const EdgeReformulation r =
      testing_util::QuadraticConsensus(Star(leaves), std::vector<double>(leaves + 1, 0.0));
  const ActivationDistribution d = UniformDistribution(r.partition, leaves + 1);
  EXPECT_NEAR(d.alpha[0], 1.0, 1e-15);
  for (int v = 1; v <= leaves; ++v) EXPECT_DOUBLE_EQ(d.alpha[v], 1.0 / leaves);
}

TEST(DeriveProbabilities, Errors) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(3), {1, 2, 3});
  const auto code = [&](Eigen::VectorXd probs) {
    try {
      DeriveProbabilities(r.partition, probs, 3);
    } catch (const AdmmError& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code((Eigen::VectorXd(2) << 1.0, 0.0).finished()), ErrorCode::kZeroProbabilityBlock);
  EXPECT_EQ(code((Eigen::VectorXd(2) << 0.6, 0.6).finished()), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code((Eigen::VectorXd(2) << 1.5, -0.5).finished()), ErrorCode::kInvalidArgument);
}

TEST(DeriveProbabilities, PropertyWeightTimesLambdaIsOne) {
  Gen gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int nodes = gen.Int(2, 7);
    const EdgeReformulation r =
        testing_util::QuadraticConsensus(PathGraph(nodes), std::vector<double>(nodes, 0.0));
    Eigen::VectorXd probs = gen.Vector(r.partition.num_blocks(), 0.01, 1.0);
    probs /= probs.sum();
    probs[probs.size() - 1] = 1.0 - probs.head(probs.size() - 1).sum();
    const ActivationDistribution d = DeriveProbabilities(r.partition, probs, nodes);
    for (Eigen::Index l = 0; l < d.lambda.size(); ++l) {
      EXPECT_NEAR(d.weight_diag[l] * d.lambda[l], 1.0, 1e-15);
      EXPECT_GE(d.weight_diag[l], 1.0);
    }
  }
}

TEST(RngStream, MatchesIndependentSplitMix) {
  RngStream rng(42);
  for (std::uint64_t c = 1; c <= 5; ++c) {
    EXPECT_EQ(rng.NextU64(), oracle::SplitMix64(42 + c * 0x9e3779b97f4a7c15ULL));
  }
}

TEST(RngStream, FrozenFirstDraws) {
  // Values computed with oracle::SplitMix64 at seed 0, counters 1 and 2.
  RngStream rng(0);
  EXPECT_EQ(rng.NextU64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.NextU64(), 0x6e789e6aa1b965f4ULL);
}

TEST(SampleBlock, DegenerateAndDeterministic) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(3), {1, 2, 3});
  const ProperPartition one = SingleBlockPartition(r.problem.z_set, r.problem.constraints);
  const ActivationDistribution d1 = DeriveProbabilities(one, Eigen::VectorXd::Ones(1), 3);
  RngStream rng(5);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(SampleBlock(d1, rng), 0);

  const ActivationDistribution du = UniformDistribution(r.partition, 3);
  RngStream a(17), b(17);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(SampleBlock(du, a), SampleBlock(du, b));
}

TEST(SampleBlock, FrequenciesWithinThreeSigma) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(4), {1, 2, 3, 4});
  const ActivationDistribution d =
      DeriveProbabilities(r.partition, (Eigen::VectorXd(3) << 0.5, 0.3, 0.2).finished(), 4);
  RngStream rng(99);
  const int draws = 100000;
  std::vector<int> counts(3, 0);
  for (int k = 0; k < draws; ++k) ++counts[SampleBlock(d, rng)];
  for (int b = 0; b < 3; ++b) {
    const double p = d.block_probs[b];
    const double sigma = std::sqrt(p * (1 - p) / draws);
    EXPECT_LE(std::abs(counts[b] / double(draws) - p), 3 * sigma) << "block " << b;
  }
}

}  // namespace
}  // namespace async_admm
