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

// Random activation of constraint blocks.
//
// A proper partition splits the constraint rows into blocks such that rows
// whose z-coordinates are coupled by Z share a block. Each iteration draws one
// block i.i.d. from `block_probs`; the components touched by that block's rows
// are the active components.

#ifndef ASYNC_ADMM_SCHEDULER_H_
#define ASYNC_ADMM_SCHEDULER_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "async_admm/problem.h"

namespace async_admm {

struct ProperPartition {
  std::vector<std::vector<int>> blocks;
  // components[b]: sorted component indices owning a row of blocks[b].
  std::vector<std::vector<int>> components;
  std::vector<int> block_of_row;
  // Z restricted to each block's rows.
  std::vector<FeasibleSet> block_sets;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
};

// Throws kNonCovering when rows are missing, repeated or out of range, and
// kImproperPartition when a coupled pair of z-coordinates is split.
ProperPartition BuildPartition(const FeasibleSet& z_set, const ConstraintSystem& cs,
                               std::vector<std::vector<int>> blocks);

// The partition with every row in one block.
ProperPartition SingleBlockPartition(const FeasibleSet& z_set, const ConstraintSystem& cs);

struct ActivationDistribution {
  Eigen::VectorXd block_probs;
  // P(row l active).
  Eigen::VectorXd lambda;
  // P(component i active).
  Eigen::VectorXd alpha;
  // 1 / lambda_l.
  Eigen::VectorXd weight_diag;
  // Running sums of block_probs for inverse-CDF sampling.
  std::vector<double> cumulative;
};

inline constexpr double kProbabilitySumTolerance = 1e-12;

// Throws kInvalidArgument for malformed probabilities and
// kZeroProbabilityBlock when a block could never be drawn.
ActivationDistribution DeriveProbabilities(const ProperPartition& partition,
                                           const Eigen::VectorXd& block_probs,
                                           int num_components);

ActivationDistribution UniformDistribution(const ProperPartition& partition,
                                           int num_components);

// SplitMix64 evaluated at seed + counter * golden-gamma. The draw sequence
// depends only on (seed, counter), so runs replay bit-for-bit everywhere.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double NextUniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

int SampleBlock(const ActivationDistribution& dist, RngStream& rng);

}  // namespace async_admm

#endif  // ASYNC_ADMM_SCHEDULER_H_
