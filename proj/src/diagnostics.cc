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


#include "async_admm/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "async_admm/engine.h"
#include "async_admm/errors.h"

namespace async_admm {
namespace {

// (1/alpha_owner(l)) d_l x_owner(l) + (1/lambda_l) h_l z_l for every row l.
Eigen::VectorXd WeightedConstraint(const SeparableProblem& prob,
                                   const ActivationDistribution& dist, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& z) {
  const ConstraintSystem& cs = prob.constraints;
  const int n = cs.dim();
  Eigen::VectorXd g(cs.num_rows());
  for (int row = 0; row < cs.num_rows(); ++row) {
    const DEntry& d = cs.RowEntry(row);
    g[row] = d.coeff * x[d.component * n + d.coord] / dist.alpha[d.component] +
             cs.h_diag()[row] * z[row] * dist.weight_diag[row];
  }
  return g;
}

double SquaredHDistance(const SeparableProblem& prob, const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& z, const Eigen::VectorXd& z_ref) {
  return WeightedNormSq(prob.constraints.h_diag().cwiseProduct(z - z_ref), weights);
}

// Grid maximum of a concave 1-D function on [lo, hi] with both endpoints on
// the grid. For concave f the derivative inside any cell is bracketed by the
// neighbouring secant slopes, so the true maximum exceeds the grid maximum by
// at most h * max |secant slope|.
template <typename F>
double MaximizeOnGrid(F&& f, double lo, double hi, int resolution, double* argmax,
                      double* gap) {
  if (lo == hi) {
    *argmax = lo;
    *gap = 0.0;
    return f(lo);
  }
  const double h = (hi - lo) / (resolution - 1);
  double best = -std::numeric_limits<double>::infinity();
  double prev = 0.0;
  double steepest = 0.0;
  for (int k = 0; k < resolution; ++k) {
    const double u = k + 1 == resolution ? hi : lo + k * h;
    const double val = f(u);
    if (k > 0) steepest = std::max(steepest, std::abs(val - prev) / h);
    if (val > best) {
      best = val;
      *argmax = u;
    }
    prev = val;
  }
  *gap = steepest * h;
  return best;
}

struct QEvaluation {
  double value = 0.0;
  double gap = 0.0;
  // dQ/dmu at the grid maximizer.
  Eigen::VectorXd gradient;
};

void RequireCompact(const SeparableProblem& prob) {
  for (int i = 0; i < prob.num_components(); ++i) {
    if (!prob.x_sets[i].IsBounded()) {
      throw AdmmError(ErrorCode::kNonCompactSets,
                      "X_" + std::to_string(i) + " is unbounded");
    }
  }
  if (!prob.z_set.IsBounded()) throw AdmmError(ErrorCode::kNonCompactSets, "Z is unbounded");
}

// Maximizes -(1/a) f_i(u) + s' u over the box X_i for a term that is not
// coordinate separable, by enumerating the full lattice.
double MaximizeJointPiece(const ConvexTerm& term, const FeasibleSet& set, double inv_alpha,
                          const Eigen::VectorXd& s, const RateConstantOptions& options,
                          Eigen::VectorXd* argmax, double* gap) {
  const int n = term.dim;
  const int r = options.grid_resolution;
  double points = 1.0;
  for (int c = 0; c < n; ++c) points *= r;
  if (points > static_cast<double>(options.max_grid_points)) {
    throw AdmmError(ErrorCode::kGridTooLarge,
                    "joint grid needs " + std::to_string(points) + " points");
  }
  const Eigen::VectorXd step = (set.upper - set.lower) / (r - 1);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd u = set.lower;
  double best = -std::numeric_limits<double>::infinity();
  double steepest = 0.0;
  const auto eval = [&](const Eigen::VectorXd& v) {
    return -inv_alpha * term.Value(v) + s.dot(v);
  };
  while (true) {
    const double val = eval(u);
    if (val > best) {
      best = val;
      *argmax = u;
    }
    for (int c = 0; c < n; ++c) {
      if (idx[c] + 1 < r && step[c] > 0.0) {
        Eigen::VectorXd w = u;
        w[c] += step[c];
        steepest = std::max(steepest, std::abs(eval(w) - val) / step[c]);
      }
    }
    int c = 0;
    while (c < n && ++idx[c] == r) {
      idx[c] = 0;
      u[c] = set.lower[c];
      ++c;
    }
    if (c == n) break;
    u[c] = set.lower[c] + idx[c] * step[c];
  }
  // Axis-wise estimate; the sum of per-axis slopes bounds the l1 distance.
  *gap = steepest * step.sum();
  return best;
}

QEvaluation EvaluateQ(const SeparableProblem& prob, const ActivationDistribution& dist,
                      const Eigen::VectorXd& mu, const RateConstantOptions& options) {
  const ConstraintSystem& cs = prob.constraints;
  const int n = cs.dim();
  const int r = options.grid_resolution;
  if (r < 3) throw AdmmError(ErrorCode::kInvalidArgument, "grid resolution must be >= 3");
  if (mu.size() != cs.num_rows()) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "mu has wrong dimension");
  }
  RequireCompact(prob);

  QEvaluation q;
  Eigen::VectorXd x_hat(static_cast<Eigen::Index>(prob.num_components()) * n);
  Eigen::VectorXd z_hat(cs.num_rows());

  for (int i = 0; i < prob.num_components(); ++i) {
    const ConvexTerm& term = prob.terms[i];
    const FeasibleSet& set = prob.x_sets[i];
    const double inv_alpha = 1.0 / dist.alpha[i];
    // Slope of mu' (D_i u)/alpha_i in coordinate c.
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < n; ++c) {
      for (int row : cs.RowsOf(i, c)) s[c] += mu[row] * cs.RowEntry(row).coeff * inv_alpha;
    }
    if (term.IsScalarSeparable()) {
      for (int c = 0; c < n; ++c) {
        double arg = 0.0, gap = 0.0;
        q.value += MaximizeOnGrid(
            [&](double u) { return -inv_alpha * term.ScalarValue(c, u) + s[c] * u; },
            set.lower[c], set.upper[c], r, &arg, &gap);
        q.gap += gap;
        x_hat[i * n + c] = arg;
      }
    } else {
      Eigen::VectorXd arg(n);
      double gap = 0.0;
      q.value += MaximizeJointPiece(term, set, inv_alpha, s, options, &arg, &gap);
      q.gap += gap;
      x_hat.segment(static_cast<Eigen::Index>(i) * n, n) = arg;
    }
  }

  // z pieces are linear: mu_l h_l z_l / lambda_l, one per free row or pair.
  const Eigen::VectorXd& lo = prob.z_set.lower;
  const Eigen::VectorXd& hi = prob.z_set.upper;
  const std::vector<int> partner = prob.z_set.PairPartners();
  const auto slope = [&](int row) {
    return mu[row] * cs.h_diag()[row] * dist.weight_diag[row];
  };
  for (int row = 0; row < cs.num_rows(); ++row) {
    const int b = partner[row];
    if (b >= 0 && b < row) continue;
    double arg = 0.0, gap = 0.0;
    if (b < 0) {
      q.value += MaximizeOnGrid([&](double u) { return slope(row) * u; }, lo[row], hi[row], r,
                                &arg, &gap);
      z_hat[row] = arg;
    } else {
      // z_b = -z_row.
      const double t_lo = std::max(lo[row], -hi[b]);
      const double t_hi = std::min(hi[row], -lo[b]);
      const double sl = slope(row) - slope(b);
      q.value += MaximizeOnGrid([&](double u) { return sl * u; }, t_lo, t_hi, r, &arg, &gap);
      z_hat[row] = arg;
      z_hat[b] = -arg;
    }
    q.gap += gap;
  }
  q.gradient = WeightedConstraint(prob, dist, x_hat, z_hat);
  return q;
}

// Unit vector of the standard normal direction drawn from `rng`.
Eigen::VectorXd RandomUnitVector(Eigen::Index size, RngStream& rng) {
  Eigen::VectorXd u(size);
  do {
    for (Eigen::Index j = 0; j < size; ++j) {
      // Box-Muller; 1 - U keeps the logarithm finite.
      const double a = 1.0 - rng.NextUniform();
      const double b = rng.NextUniform();
      u[j] = std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * M_PI * b);
    }
  } while (u.norm() == 0.0);
  return u.normalized();
}

// Starting directions: +-e_j followed by random points of the sphere.
std::vector<Eigen::VectorXd> CandidateDirections(Eigen::Index size, int sampled, RngStream& rng) {
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index j = 0; j < size; ++j) {
    dirs.push_back(Eigen::VectorXd::Unit(size, j));
    dirs.push_back(-Eigen::VectorXd::Unit(size, j));
  }
  for (int k = 0; k < sampled; ++k) dirs.push_back(RandomUnitVector(size, rng));
  return dirs;
}

// Maximizes a convex function over the unit sphere: score every candidate,
// then from the best few iterate u <- grad / ||grad||, which never decreases
// a convex objective.
template <typename Eval>
Eigen::VectorXd AscendOnSphere(const std::vector<Eigen::VectorXd>& dirs, int iterations,
                               Eval&& eval, double* best_value) {
  std::vector<std::pair<double, int>> scored;
  scored.reserve(dirs.size());
  for (int k = 0; k < static_cast<int>(dirs.size()); ++k) {
    Eigen::VectorXd unused;
    scored.emplace_back(eval(dirs[k], &unused), k);
  }
  std::sort(scored.begin(), scored.end(), std::greater<>());
  constexpr int kStarts = 8;
  Eigen::VectorXd best = dirs[scored.front().second];
  *best_value = scored.front().first;
  for (int s = 0; s < std::min<int>(kStarts, scored.size()); ++s) {
    Eigen::VectorXd u = dirs[scored[s].second];
    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXd grad;
      const double val = eval(u, &grad);
      if (val > *best_value) {
        *best_value = val;
        best = u;
      }
      if (grad.norm() == 0.0) break;
      const Eigen::VectorXd next = grad.normalized();
      if ((next - u).norm() < 1e-14) break;
      u = next;
    }
    Eigen::VectorXd unused;
    const double val = eval(u, &unused);
    if (val > *best_value) {
      *best_value = val;
      best = u;
    }
  }
  return best;
}

}  // namespace

double WeightedNormSq(const Eigen::VectorXd& v, const Eigen::VectorXd& weights) {
  if (v.size() != weights.size()) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "weights do not match vector");
  }
  return v.cwiseProduct(v).dot(weights);
}

double WeightedLagrangian(const SeparableProblem& prob, const ActivationDistribution& dist,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                          const Eigen::VectorXd& mu) {
  const int n = prob.dim();
  double f = 0.0;
  for (int i = 0; i < prob.num_components(); ++i) {
    f += prob.terms[i].Value(x.segment(static_cast<Eigen::Index>(i) * n, n)) / dist.alpha[i];
  }
  return f - mu.dot(WeightedConstraint(prob, dist, x, z));
}

double Lyapunov(const SeparableProblem& prob, const Eigen::VectorXd& weight_diag,
                const PrimalDualState& state, const ReferenceSolution& ref) {
  return WeightedNormSq(state.p - ref.p, weight_diag) / (2.0 * prob.beta) +
         0.5 * prob.beta * SquaredHDistance(prob, weight_diag, state.z, ref.z);
}

double ExpectedLyapunovAfterStep(const SeparableProblem& prob, const ProperPartition& partition,
                                 const ActivationDistribution& dist,
                                 const PrimalDualState& state, const ReferenceSolution& ref) {
  double expected = 0.0;
  for (int b = 0; b < partition.num_blocks(); ++b) {
    PrimalDualState next = state;
    ApplyBlock(prob, partition, b, next);
    expected += dist.block_probs[b] * Lyapunov(prob, dist.weight_diag, next, ref);
  }
  return expected;
}

double ExpectedLyapunovFromShadow(const SeparableProblem& prob,
                                  const ActivationDistribution& dist,
                                  const PrimalDualState& state, const ReferenceSolution& ref) {
  const ShadowIterates sh = ShadowStep(prob, state);
  const double beta = prob.beta;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(prob.num_rows());
  const double shadow_part = (sh.mu - ref.p).squaredNorm() / (2.0 * beta) +
                             0.5 * beta * SquaredHDistance(prob, ones, sh.v, ref.z);
  const double current_part = (state.p - ref.p).squaredNorm() / (2.0 * beta) +
                              0.5 * beta * SquaredHDistance(prob, ones, state.z, ref.z);
  return shadow_part + Lyapunov(prob, dist.weight_diag, state, ref) - current_part;
}

void ErgodicAverages::Add(const PrimalDualState& state) {
  x_sum_ += state.x;
  z_sum_ += state.z;
  ++count_;
}

RateFit FitLogLog(std::span<const double> iters, std::span<const double> values,
                  double iter_min, double iter_max) {
  if (iters.size() != values.size()) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "iteration and value series differ in length");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (size_t j = 0; j < iters.size(); ++j) {
    if (iters[j] < iter_min || iters[j] > iter_max) continue;
    if (!(values[j] > 0.0) || !(iters[j] > 0.0)) {
      throw AdmmError(ErrorCode::kNonPositiveSeries,
                      "non-positive entry at iteration " + std::to_string(iters[j]));
    }
    const double lx = std::log(iters[j]);
    const double ly = std::log(values[j]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double denom = m * sxx - sx * sx;
  if (m < 2 || denom <= 0.0) {
    throw AdmmError(ErrorCode::kInvalidArgument, "need two distinct iterations to fit a rate");
  }
  RateFit fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.points = m;
  return fit;
}

RateFit EstimateRate(std::span<const double> iters, std::span<const double> values) {
  if (iters.empty()) throw AdmmError(ErrorCode::kInvalidArgument, "empty series");
  const double last = iters.back();
  return FitLogLog(iters, values, last / 2.0, last);
}

double QOfMu(const SeparableProblem& prob, const ActivationDistribution& dist,
             const Eigen::VectorXd& mu, const RateConstantOptions& options, double* gap) {
  const QEvaluation q = EvaluateQ(prob, dist, mu, options);
  if (gap != nullptr) *gap = q.gap;
  return q.value;
}

RateConstants ComputeRateConstants(const SeparableProblem& prob,
                                   const ActivationDistribution& dist,
                                   const ReferenceSolution& ref, const PrimalDualState& initial,
                                   const RateConstantOptions& options) {
  CheckProblem(prob);
  RequireCompact(prob);
  const Eigen::Index w = prob.num_rows();
  if (ref.p.size() != w || ref.z.size() != w) {
    throw AdmmError(ErrorCode::kMissingReference, "reference does not match problem");
  }
  RateConstants out;
  RngStream rng(options.seed);
  const std::vector<Eigen::VectorXd> dirs =
      CandidateDirections(w, options.sampled_directions, rng);
  out.directions_sampled = static_cast<int>(dirs.size());

  // Q is convex in mu; with mu = p* - u, dQ/du = -grad_mu Q.
  double max_gap = 0.0;
  const auto q_eval = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    const QEvaluation q = EvaluateQ(prob, dist, ref.p - u, options);
    max_gap = std::max(max_gap, q.gap);
    *grad = -q.gradient;
    return q.value;
  };
  AscendOnSphere(dirs, options.ascent_iterations, q_eval, &out.q_bar);

  const Eigen::VectorXd& wd = dist.weight_diag;
  const Eigen::VectorXd offset = initial.p - ref.p;
  const auto theta_eval = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    const Eigen::VectorXd d = offset + u;
    *grad = 2.0 * wd.cwiseProduct(d);
    return WeightedNormSq(d, wd);
  };
  const Eigen::VectorXd u_theta =
      AscendOnSphere(dirs, options.ascent_iterations, theta_eval, &out.theta_distance_sq);
  out.theta_bar = ref.p - u_theta;

  // L~(x0, z0, p* - u) is affine in u, so its maximum over the ball is exact.
  const Eigen::VectorXd g0 = WeightedConstraint(prob, dist, initial.x, initial.z);
  out.l_tilde_at_pstar = WeightedLagrangian(prob, dist, initial.x, initial.z, ref.p);
  out.l_tilde0 = out.l_tilde_at_pstar + g0.norm();

  double gap_at_pstar = 0.0;
  out.q_at_pstar = QOfMu(prob, dist, ref.p, options, &gap_at_pstar);
  out.grid_gap = std::max(max_gap, gap_at_pstar);
  return out;
}

double FeasibilityBoundConstant(const SeparableProblem& prob, const ActivationDistribution& dist,
                                const RateConstants& constants, const ReferenceSolution& ref,
                                const PrimalDualState& initial) {
  const double beta = prob.beta;
  return constants.q_bar + constants.grid_gap + constants.l_tilde0 +
         constants.theta_distance_sq / (2.0 * beta) +
         0.5 * beta * SquaredHDistance(prob, dist.weight_diag, initial.z, ref.z);
}

double ObjectiveBoundConstant(const SeparableProblem& prob, const ActivationDistribution& dist,
                              const RateConstants& constants, const ReferenceSolution& ref,
                              const PrimalDualState& initial) {
  const double beta = prob.beta;
  const Eigen::VectorXd& wd = dist.weight_diag;
  const double z_term = 0.5 * beta * SquaredHDistance(prob, wd, initial.z, ref.z);
  const double leading = constants.q_bar + constants.grid_gap + constants.l_tilde0 +
                         WeightedNormSq(initial.p - ref.p, wd) / (2.0 * beta) + z_term;
  const double at_pstar = constants.q_at_pstar + constants.grid_gap +
                          constants.l_tilde_at_pstar +
                          constants.theta_distance_sq / (2.0 * beta) + z_term;
  const double p_inf = ref.p.size() > 0 ? ref.p.lpNorm<Eigen::Infinity>() : 0.0;
  return leading + p_inf * at_pstar;
}

ReferenceSolution SolveReference(const SeparableProblem& prob, double tolerance,
                                 std::int64_t max_iterations) {
  if (!(tolerance > 0.0) || max_iterations < 1) {
    throw AdmmError(ErrorCode::kInvalidArgument, "tolerance and iteration cap must be positive");
  }
  const StandardProblem sp = ToStandard(prob);
  PrimalDualState state = InitialState(prob);
  double achieved = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < max_iterations; ++k) {
    PrimalDualState next = SyncAdmmStep(sp, state);
    if (!next.x.allFinite() || !next.p.allFinite() || !next.z.allFinite()) {
      throw AdmmError(ErrorCode::kDivergence, "reference iteration left the finite region");
    }
    const double res = Residual(prob, next.x, next.z).lpNorm<Eigen::Infinity>();
    const double dp = (next.p - state.p).lpNorm<Eigen::Infinity>();
    const double dz = (next.z - state.z).lpNorm<Eigen::Infinity>();
    achieved = std::max({res, dp, dz});
    state = std::move(next);
    if (achieved <= tolerance) break;
  }
  ReferenceSolution ref;
  ref.x = state.x;
  ref.z = state.z;
  ref.p = state.p;
  ref.objective = Objective(prob, state.x);
  ref.source = "long-run";
  ref.achieved_tolerance = achieved;
  return ref;
}

}  // namespace async_admm
