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

#include "async_admm/prox.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "async_admm/errors.h"

namespace async_admm {
namespace {

double SoftThreshold(double v, double kappa) {
  if (v > kappa) return v - kappa;
  if (v < -kappa) return v + kappa;
  return 0.0;
}

double Clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Smallest-ish root of the nondecreasing map u -> g'(u) + q u - l, found by
// expanding a bracket from the point of [lo, hi] closest to 0.
double BisectScalar(const ConvexTerm& term, int coord, double q, double l, double lo,
                    double hi) {
  auto slope = [&](double u) { return term.ScalarSubgradient(coord, u) + q * u - l; };
  if (std::isfinite(lo) && slope(lo) >= 0.0) return lo;
  if (std::isfinite(hi) && slope(hi) < 0.0) return hi;

  double left = Clamp(0.0, lo, hi);
  double right = left;
  if (slope(left) >= 0.0) {
    double step = 1.0;
    do {
      right = left;
      left = std::max(left - step, lo);
      step *= 2.0;
      if (left < -kBracketLimit) {
        throw AdmmError(ErrorCode::kUnboundedSubproblem,
                        "local minimizer unbounded below on coordinate " + std::to_string(coord));
      }
    } while (slope(left) >= 0.0);
  } else {
    double step = 1.0;
    do {
      left = right;
      right = std::min(right + step, hi);
      step *= 2.0;
      if (right > kBracketLimit) {
        throw AdmmError(ErrorCode::kUnboundedSubproblem,
                        "local minimizer unbounded above on coordinate " + std::to_string(coord));
      }
    } while (slope(right) < 0.0);
  }
  // slope(left) < 0 <= slope(right).
  for (int it = 0; it < kBisectionMaxIterations; ++it) {
    const double mid = 0.5 * (left + right);
    if (right - left <= kBisectionTolerance * std::max(1.0, std::abs(mid))) break;
    if (slope(mid) >= 0.0) {
      right = mid;
    } else {
      left = mid;
    }
  }
  return 0.5 * (left + right);
}

}  // namespace

double SolveScalar(const ConvexTerm& term, int coord, double q, double l, double lo,
                   double hi) {
  if (!std::isfinite(q) || !std::isfinite(l)) {
    throw AdmmError(ErrorCode::kNonfiniteInput, "subproblem data is not finite");
  }
  if (q < 0.0) throw AdmmError(ErrorCode::kInvalidArgument, "negative curvature");
  switch (term.kind) {
    case TermKind::kQuadratic: {
      const double w = term.weight;
      return Clamp((2.0 * w * term.center[coord] + l) / (2.0 * w + q), lo, hi);
    }
    case TermKind::kL1:
      if (q > 0.0) return Clamp(SoftThreshold(l, term.weight) / q, lo, hi);
      break;
    case TermKind::kAbsDev:
      if (q > 0.0) {
        // Shift u = a + s: |s| + q/2 s^2 - (l - q a) s.
        const double a = term.center[coord];
        return Clamp(a + SoftThreshold(l - q * a, 1.0) / q, lo, hi);
      }
      break;
    case TermKind::kCustom:
      if (!term.IsScalarSeparable()) {
        throw AdmmError(ErrorCode::kUnsupportedTerm,
                        "custom term without scalar convexity has no local solver");
      }
      break;
  }
  return BisectScalar(term, coord, q, l, lo, hi);
}

Eigen::VectorXd SolveLocal(const LocalSubproblem& sub) {
  const int n = sub.term.dim;
  if (sub.quad_diag.size() != n || sub.linear.size() != n || sub.set.dim != n) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "local subproblem dimensions disagree");
  }
  if (sub.set.kind == SetKind::kSumZeroPairs && !sub.set.pairs.empty()) {
    throw AdmmError(ErrorCode::kUnsupportedSet, "coupled sets are not supported for x");
  }
  if (!sub.term.IsScalarSeparable()) {
    throw AdmmError(ErrorCode::kUnsupportedTerm,
                    "custom term without scalar convexity has no local solver");
  }
  if (!sub.quad_diag.allFinite() || !sub.linear.allFinite()) {
    throw AdmmError(ErrorCode::kNonfiniteInput, "subproblem data is not finite");
  }
  Eigen::VectorXd u(n);
  for (int c = 0; c < n; ++c) {
    u[c] = SolveScalar(sub.term, c, sub.quad_diag[c], sub.linear[c], sub.set.lower[c],
                       sub.set.upper[c]);
  }
  return u;
}

Eigen::VectorXd SolveZBlock(const ZBlockSubproblem& sub) {
  const FeasibleSet& set = sub.set;
  const Eigen::Index m = sub.weights.size();
  if (sub.target.size() != m || set.dim != m) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "z block dimensions disagree");
  }
  if (!sub.target.allFinite() || !sub.weights.allFinite()) {
    throw AdmmError(ErrorCode::kNonfiniteInput, "z block data is not finite");
  }
  if ((sub.weights.array() == 0.0).any()) {
    throw AdmmError(ErrorCode::kInvalidArgument, "z block weights must be nonzero");
  }
  Eigen::VectorXd z(m);
  const std::vector<int> partner = set.PairPartners();
  for (Eigen::Index c = 0; c < m; ++c) {
    if (partner[c] < 0) z[c] = Clamp(sub.target[c] / sub.weights[c], set.lower[c], set.upper[c]);
  }
  for (const auto& [a, b] : set.pairs) {
    // z_b = -z_a; minimize (w_a t - t_a)^2 + (w_b t + t_b)^2 over t.
    const double wa = sub.weights[a];
    const double wb = sub.weights[b];
    const double t = (wa * sub.target[a] - wb * sub.target[b]) / (wa * wa + wb * wb);
    const double lo = std::max(set.lower[a], -set.upper[b]);
    const double hi = std::min(set.upper[a], -set.lower[b]);
    z[a] = Clamp(t, lo, hi);
    z[b] = -z[a];
  }
  return z;
}

}  // namespace async_admm
