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

// Minimizers for the per-component and per-block subproblems an ADMM step
// reduces to. Every supported term is a sum of scalar functions, so both
// solvers work coordinate by coordinate.

#ifndef ASYNC_ADMM_PROX_H_
#define ASYNC_ADMM_PROX_H_

#include <Eigen/Core>

#include "async_admm/problem.h"

namespace async_admm {

// minimize f(u) + 1/2 u' diag(quad_diag) u - linear' u  over u in set.
struct LocalSubproblem {
  const ConvexTerm& term;
  Eigen::VectorXd quad_diag;
  Eigen::VectorXd linear;
  const FeasibleSet& set;
};

// minimize ||diag(weights) z - target||^2  over z in set.
struct ZBlockSubproblem {
  Eigen::VectorXd weights;
  Eigen::VectorXd target;
  const FeasibleSet& set;
};

// Closed forms for Quadratic, L1 and AbsDev terms; bisection on the
// subgradient for scalar-convex Custom terms (and for degenerate zero
// curvature). Box sets are handled by clamping, which is exact in 1-D.
//
// When the minimizer set is an interval the soft-threshold point is returned.
// Throws kUnsupportedTerm, kUnsupportedSet, kNonfiniteInput, or
// kUnboundedSubproblem when no finite minimizer exists.
Eigen::VectorXd SolveLocal(const LocalSubproblem& sub);

// Scalar kernel of SolveLocal for coordinate `coord`:
// minimize g(u) + q/2 u^2 - l u over [lo, hi].
double SolveScalar(const ConvexTerm& term, int coord, double q, double l, double lo,
                   double hi);

// Free coordinates get target/weight; each sum-zero pair is a 1-D least
// squares fit clamped to the pair's bounds. Sum-zero holds exactly.
Eigen::VectorXd SolveZBlock(const ZBlockSubproblem& sub);

// Bracket expansion and bisection settings for the fallback solver.
inline constexpr int kBisectionMaxIterations = 200;
inline constexpr double kBisectionTolerance = 1e-10;
inline constexpr double kBracketLimit = 1e12;

}  // namespace async_admm

#endif  // ASYNC_ADMM_PROX_H_
