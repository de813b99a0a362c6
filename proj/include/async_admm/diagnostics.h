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

// Convergence diagnostics for the asynchronous iteration: probability
// weighted norms and Lagrangian, the Lyapunov function
//
//   V = 1/(2 beta) ||p - p*||^2_W + beta/2 ||H (z - z*)||^2_W,  W = diag(1/lambda)
//
// ergodic averages, log-log rate fits and the constants that enter the
// O(1/T) bounds on the ergodic averages.

#ifndef ASYNC_ADMM_DIAGNOSTICS_H_
#define ASYNC_ADMM_DIAGNOSTICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "async_admm/problem.h"
#include "async_admm/scheduler.h"

namespace async_admm {

struct ReferenceSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  double objective = 0.0;
  // "analytic", "long-run" or "external".
  std::string source;
  // Largest of |D x + H z| and the last changes in z and p (max norms) when
  // source is "long-run"; zero otherwise.
  double achieved_tolerance = 0.0;
};

// v' diag(weights) v.
double WeightedNormSq(const Eigen::VectorXd& v, const Eigen::VectorXd& weights);

// sum_i f_i(x_i)/alpha_i - mu' (sum_i D_i x / alpha_i + sum_l H_l z / lambda_l).
double WeightedLagrangian(const SeparableProblem& prob, const ActivationDistribution& dist,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                          const Eigen::VectorXd& mu);

double Lyapunov(const SeparableProblem& prob, const Eigen::VectorXd& weight_diag,
                const PrimalDualState& state, const ReferenceSolution& ref);

// E[V(next state) | state], by enumerating every block of the partition.
double ExpectedLyapunovAfterStep(const SeparableProblem& prob, const ProperPartition& partition,
                                 const ActivationDistribution& dist,
                                 const PrimalDualState& state, const ReferenceSolution& ref);

// The same expectation written through the shadow iterates (mu, v):
//   1/(2b)||mu - p*||^2 + b/2||H(v - z*)||^2 + V - 1/(2b)||p - p*||^2 - b/2||H(z - z*)||^2.
double ExpectedLyapunovFromShadow(const SeparableProblem& prob,
                                  const ActivationDistribution& dist,
                                  const PrimalDualState& state, const ReferenceSolution& ref);

// Running time averages of x^1..x^T and z^1..z^T.
class ErgodicAverages {
 public:
  ErgodicAverages() = default;
  ErgodicAverages(Eigen::Index x_size, Eigen::Index z_size)
      : x_sum_(Eigen::VectorXd::Zero(x_size)), z_sum_(Eigen::VectorXd::Zero(z_size)) {}

  void Add(const PrimalDualState& state);

  std::int64_t count() const { return count_; }
  Eigen::VectorXd MeanX() const { return x_sum_ / static_cast<double>(count_); }
  Eigen::VectorXd MeanZ() const { return z_sum_ / static_cast<double>(count_); }

 private:
  Eigen::VectorXd x_sum_;
  Eigen::VectorXd z_sum_;
  std::int64_t count_ = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// Least squares fit of log(value) against log(iter) over iter in
// [iter_min, iter_max]. Throws kNonPositiveSeries when a value in the window
// is not positive, kInvalidArgument with fewer than two points.
RateFit FitLogLog(std::span<const double> iters, std::span<const double> values,
                  double iter_min, double iter_max);

// FitLogLog over the tail half, iter >= last_iter / 2.
RateFit EstimateRate(std::span<const double> iters, std::span<const double> values);

struct RateConstantOptions {
  int grid_resolution = 401;
  int sampled_directions = 256;
  int ascent_iterations = 30;
  std::uint64_t seed = 0;
  // Largest number of grid points allowed for one non-separable piece.
  std::int64_t max_grid_points = 2'000'000;
};

// All values are approximations obtained by grid maximization and sampling
// over the unit ball; `grid_gap` bounds how far any grid maximum can sit
// below the true maximum.
struct RateConstants {
  double q_bar = 0.0;
  Eigen::VectorXd theta_bar;
  // ||p0 - theta_bar||^2_W.
  double theta_distance_sq = 0.0;
  double l_tilde0 = 0.0;
  double q_at_pstar = 0.0;
  double l_tilde_at_pstar = 0.0;
  double grid_gap = 0.0;
  int directions_sampled = 0;
};

// Q(mu) = max over X x Z of -WeightedLagrangian(x, z, mu). The maximization
// splits into one piece per component coordinate and one per free z
// coordinate or sum-zero pair; each piece is maximized on a grid.
// `gap` (optional) receives the grid-gap bound for this evaluation.
double QOfMu(const SeparableProblem& prob, const ActivationDistribution& dist,
             const Eigen::VectorXd& mu, const RateConstantOptions& options,
             double* gap = nullptr);

// Throws kNonCompactSets unless every X_i and Z are bounded, kGridTooLarge
// when a non-separable piece needs more than max_grid_points.
RateConstants ComputeRateConstants(const SeparableProblem& prob,
                                   const ActivationDistribution& dist,
                                   const ReferenceSolution& ref, const PrimalDualState& initial,
                                   const RateConstantOptions& options = {});

// Right-hand side (times T) of the bound on ||E(D xbar(T) + H zbar(T))||.
double FeasibilityBoundConstant(const SeparableProblem& prob, const ActivationDistribution& dist,
                                const RateConstants& constants, const ReferenceSolution& ref,
                                const PrimalDualState& initial);

// Right-hand side (times T) of the bound on |E F(xbar(T)) - F(x*)|.
double ObjectiveBoundConstant(const SeparableProblem& prob, const ActivationDistribution& dist,
                              const RateConstants& constants, const ReferenceSolution& ref,
                              const PrimalDualState& initial);

// Saddle point estimate from the synchronous iteration, stopped once both the
// residual and the change in p fall below `tolerance` or after
// `max_iterations`. Check `achieved_tolerance` on the result.
ReferenceSolution SolveReference(const SeparableProblem& prob, double tolerance = 1e-10,
                                 std::int64_t max_iterations = 2'000'000);

}  // namespace async_admm

#endif  // ASYNC_ADMM_DIAGNOSTICS_H_
