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

// Asynchronous ADMM iteration.
//
// One step draws a block psi of constraint rows, lets phi be the components
// those rows touch, and then
//
//   x_i <- argmin f_i(u) - (p - beta H z)' D_i u + beta/2 ||D_i u||^2,  i in phi
//   z_psi <- argmin -(p - beta D x)' H_psi z + beta/2 ||H_psi z||^2
//   p_l <- p_l - beta (D x + H z)_l,                                  l in psi
//
// leaving every other coordinate untouched. The shadow iterates are the same
// three updates applied with every row active.

#ifndef ASYNC_ADMM_ENGINE_H_
#define ASYNC_ADMM_ENGINE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "async_admm/diagnostics.h"
#include "async_admm/problem.h"
#include "async_admm/scheduler.h"

namespace async_admm {

struct ShadowIterates {
  Eigen::VectorXd y;
  Eigen::VectorXd v;
  Eigen::VectorXd mu;
  Eigen::VectorXd r;
};

struct StepRecord {
  int block = -1;
  PrimalDualState before;
  PrimalDualState after;
  std::optional<ShadowIterates> shadow;
};

// x0 = 0 clamped into X, z0 = argmin_{z in Z} ||D x0 + H z||, p0 = 0.
PrimalDualState InitialState(const SeparableProblem& prob);

Eigen::VectorXd XUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                        const std::vector<int>& active_components);

Eigen::VectorXd ZUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                        const Eigen::VectorXd& x_new, const std::vector<int>& active_rows);

// Same as above with the restriction of Z to `active_rows` precomputed.
Eigen::VectorXd ZUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                        const Eigen::VectorXd& x_new, const std::vector<int>& active_rows,
                        const FeasibleSet& block_set);

Eigen::VectorXd DualUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                           const Eigen::VectorXd& x_new, const Eigen::VectorXd& z_new,
                           const std::vector<int>& active_rows);

// Applies the x, z and dual updates of `block` in that order and advances k.
void ApplyBlock(const SeparableProblem& prob, const ProperPartition& partition, int block,
                PrimalDualState& state);

StepRecord Step(const SeparableProblem& prob, const ProperPartition& partition,
                const ActivationDistribution& dist, RngStream& rng, const PrimalDualState& state,
                bool with_shadow);

ShadowIterates ShadowStep(const SeparableProblem& prob, const PrimalDualState& state);

// Standard two-block ADMM problem
//   minimize F(x) + G(z)  subject to  D x + H z = c
// with F, X, Z, D, H and beta taken from `base`. G is a sum of scalar terms
// over the coordinates of z (empty means G = 0) and requires Z without pairs.
struct StandardProblem {
  SeparableProblem base;
  std::vector<ConvexTerm> z_terms;
  Eigen::VectorXd rhs;
};

StandardProblem ToStandard(const SeparableProblem& prob);

// Sequential x-minimization, z-minimization and dual ascent with step beta.
PrimalDualState SyncAdmmStep(const StandardProblem& prob, const PrimalDualState& state);

inline constexpr double kDivergenceNorm = 1e12;

struct RunOptions {
  std::uint64_t seed = 0;
  std::int64_t iterations = 1;
  std::int64_t stride = 1;
  bool shadow_probe = false;
  bool lyapunov_probe = false;
  bool ergodic_probe = false;
  // Keep the ergodic residual vector of each record (for multi-seed means).
  bool keep_ergodic_residual = false;
  std::optional<ReferenceSolution> reference;
  std::optional<PrimalDualState> initial;
};

struct MetricRecord {
  std::int64_t iter = 0;
  double objective = 0.0;
  double objective_error = 0.0;
  double feasibility_violation = 0.0;
  double ergodic_objective = 0.0;
  double ergodic_objective_error = 0.0;
  double ergodic_feasibility = 0.0;
  double lyapunov = 0.0;
  int active_block = -1;
  Eigen::VectorXd ergodic_residual;
};

struct InvariantCounters {
  std::int64_t probed_steps = 0;
  std::int64_t shadow_failures = 0;
  std::int64_t freeze_failures = 0;
};

inline constexpr double kShadowTolerance = 1e-9;

struct RunMetrics {
  std::vector<MetricRecord> records;
  PrimalDualState final_state;
  InvariantCounters counters;
};

// Executes options.iterations steps and records metrics every `stride`
// iterations. Errors without a reference are NaN. Throws kDivergence when
// the state becomes non-finite or exceeds kDivergenceNorm.
RunMetrics Run(const SeparableProblem& prob, const ProperPartition& partition,
               const ActivationDistribution& dist, const RunOptions& options);

// Shadow identities and coordinate freeze for one step; true when all hold.
bool CheckShadowIdentities(const SeparableProblem& prob, const ProperPartition& partition,
                           const StepRecord& record, double tol = kShadowTolerance);
bool CheckFrozenCoordinates(const SeparableProblem& prob, const ProperPartition& partition,
                            const StepRecord& record);

}  // namespace async_admm

#endif  // ASYNC_ADMM_ENGINE_H_
