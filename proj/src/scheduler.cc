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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "async_admm/errors.h"

namespace async_admm {

ProperPartition BuildPartition(const FeasibleSet& z_set, const ConstraintSystem& cs,
                               std::vector<std::vector<int>> blocks) {
  const int w = cs.num_rows();
  if (z_set.dim != w) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "z set dimension differs from W");
  }
  ProperPartition part;
  part.block_of_row.assign(w, -1);
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    if (blocks[b].empty()) {
      throw AdmmError(ErrorCode::kNonCovering, "block " + std::to_string(b) + " is empty");
    }
    for (int row : blocks[b]) {
      if (row < 0 || row >= w) {
        throw AdmmError(ErrorCode::kNonCovering, "row " + std::to_string(row) + " out of range");
      }
      if (part.block_of_row[row] >= 0) {
        throw AdmmError(ErrorCode::kNonCovering,
                        "row " + std::to_string(row) + " appears in two blocks");
      }
      part.block_of_row[row] = b;
    }
  }
  for (int row = 0; row < w; ++row) {
    if (part.block_of_row[row] < 0) {
      throw AdmmError(ErrorCode::kNonCovering, "row " + std::to_string(row) + " not covered");
    }
  }
  for (const auto& [a, b] : z_set.pairs) {
    if (part.block_of_row[a] != part.block_of_row[b]) {
      throw AdmmError(ErrorCode::kImproperPartition,
                      "coupled rows " + std::to_string(a) + " and " + std::to_string(b) +
                          " lie in different blocks");
    }
  }
  part.components.resize(blocks.size());
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    std::vector<int>& comps = part.components[b];
    for (int row : blocks[b]) {
      for (int id : cs.EntriesOfRow(row)) comps.push_back(cs.entries()[id].component);
    }
    std::sort(comps.begin(), comps.end());
    comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
    std::sort(blocks[b].begin(), blocks[b].end());
  }
  part.blocks = std::move(blocks);
  part.block_sets.reserve(part.blocks.size());
  for (const auto& rows : part.blocks) part.block_sets.push_back(z_set.Restrict(rows));
  return part;
}

ProperPartition SingleBlockPartition(const FeasibleSet& z_set, const ConstraintSystem& cs) {
  std::vector<int> all(cs.num_rows());
  std::iota(all.begin(), all.end(), 0);
  return BuildPartition(z_set, cs, {std::move(all)});
}

ActivationDistribution DeriveProbabilities(const ProperPartition& partition,
                                           const Eigen::VectorXd& block_probs,
                                           int num_components) {
  const int nb = partition.num_blocks();
  if (block_probs.size() != nb) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "one probability per block required");
  }
  double total = 0.0;
  for (int b = 0; b < nb; ++b) {
    if (!std::isfinite(block_probs[b]) || block_probs[b] < 0.0) {
      throw AdmmError(ErrorCode::kInvalidArgument, "block probabilities must be in [0, 1]");
    }
    total += block_probs[b];
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
    throw AdmmError(ErrorCode::kInvalidArgument, "block probabilities must sum to 1");
  }
  for (int b = 0; b < nb; ++b) {
    if (block_probs[b] == 0.0) {
      throw AdmmError(ErrorCode::kZeroProbabilityBlock,
                      "block " + std::to_string(b) + " is never activated");
    }
  }
  ActivationDistribution dist;
  dist.block_probs = block_probs;
  const int w = static_cast<int>(partition.block_of_row.size());
  dist.lambda.resize(w);
  for (int row = 0; row < w; ++row) dist.lambda[row] = block_probs[partition.block_of_row[row]];
  dist.weight_diag = dist.lambda.cwiseInverse();
  dist.alpha = Eigen::VectorXd::Zero(num_components);
  for (int b = 0; b < nb; ++b) {
    for (int i : partition.components[b]) {
      if (i >= num_components) {
        throw AdmmError(ErrorCode::kDimensionMismatch, "component index out of range");
      }
      dist.alpha[i] += block_probs[b];
    }
  }
  for (int i = 0; i < num_components; ++i) {
    if (!(dist.alpha[i] > 0.0)) {
      throw AdmmError(ErrorCode::kZeroProbabilityBlock,
                      "component " + std::to_string(i) + " is never activated");
    }
  }
  dist.cumulative.resize(nb);
  double run = 0.0;
  for (int b = 0; b < nb; ++b) {
    run += block_probs[b];
    dist.cumulative[b] = run;
  }
  return dist;
}

ActivationDistribution UniformDistribution(const ProperPartition& partition,
                                           int num_components) {
  const int nb = partition.num_blocks();
  return DeriveProbabilities(partition, Eigen::VectorXd::Constant(nb, 1.0 / nb),
                             num_components);
}

std::uint64_t RngStream::NextU64() {
  constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = seed_ + (++counter_) * kGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double RngStream::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

int SampleBlock(const ActivationDistribution& dist, RngStream& rng) {
  const double u = rng.NextUniform();
  const auto& cum = dist.cumulative;
  // The last block absorbs rounding in the running sum.
  const auto it = std::upper_bound(cum.begin(), cum.end() - 1, u);
  return static_cast<int>(it - cum.begin());
}

}  // namespace async_admm
