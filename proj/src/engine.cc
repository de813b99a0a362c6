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

#include "async_admm/engine.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "async_admm/errors.h"
#include "async_admm/prox.h"

namespace async_admm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Local subproblem of component i given the current (p, z) and a constant
// shift c of the constraint (D x + H z = c):
//   quad_diag[c] = beta * sum_l d_l^2
//   linear[c]    = sum_l d_l (p_l - beta (h_l z_l - c_l))
Eigen::VectorXd SolveComponent(const SeparableProblem& prob, int i, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& z, const Eigen::VectorXd* rhs) {
  const ConstraintSystem& cs = prob.constraints;
  const int n = cs.dim();
  const double beta = prob.beta;
  Eigen::VectorXd quad = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < n; ++c) {
    for (int row : cs.RowsOf(i, c)) {
      const double d = cs.RowEntry(row).coeff;
      const double shift = rhs != nullptr ? (*rhs)[row] : 0.0;
      quad[c] += beta * d * d;
      lin[c] += d * (p[row] - beta * (cs.h_diag()[row] * z[row] - shift));
    }
  }
  return SolveLocal({prob.terms[i], std::move(quad), std::move(lin), prob.x_sets[i]});
}

double RowDx(const ConstraintSystem& cs, const Eigen::VectorXd& x, int row) {
  const DEntry& d = cs.RowEntry(row);
  return d.coeff * x[d.component * cs.dim() + d.coord];
}

void CheckState(const SeparableProblem& prob, const PrimalDualState& state) {
  const Eigen::Index nx = static_cast<Eigen::Index>(prob.num_components()) * prob.dim();
  if (state.x.size() != nx || state.z.size() != prob.num_rows() ||
      state.p.size() != prob.num_rows()) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "state does not match problem");
  }
}

void GuardDivergence(const PrimalDualState& s) {
  const auto bad = [](const Eigen::VectorXd& v) {
    return !v.allFinite() || v.lpNorm<Eigen::Infinity>() > kDivergenceNorm;
  };
  const char* which = bad(s.x) ? "x" : bad(s.z) ? "z" : bad(s.p) ? "p" : nullptr;
  if (which != nullptr) {
    throw AdmmError(ErrorCode::kDivergence, std::string("iterate ") + which +
                                                " left the finite region at iteration " +
                                                std::to_string(s.k));
  }
}

}  // namespace

PrimalDualState InitialState(const SeparableProblem& prob) {
  CheckProblem(prob);
  const int n = prob.dim();
  const int num = prob.num_components();
  PrimalDualState s;
  s.x.resize(static_cast<Eigen::Index>(num) * n);
  for (int i = 0; i < num; ++i) {
    const FeasibleSet& set = prob.x_sets[i];
    for (int c = 0; c < n; ++c) s.x[i * n + c] = std::clamp(0.0, set.lower[c], set.upper[c]);
  }
  s.z = SolveZBlock({prob.constraints.h_diag(), -prob.constraints.ApplyD(s.x), prob.z_set});
  s.p = Eigen::VectorXd::Zero(prob.num_rows());
  return s;
}

Eigen::VectorXd XUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                        const std::vector<int>& active_components) {
  CheckState(prob, state);
  const int n = prob.dim();
  Eigen::VectorXd x = state.x;
  for (int i : active_components) {
    x.segment(static_cast<Eigen::Index>(i) * n, n) =
        SolveComponent(prob, i, state.p, state.z, nullptr);
  }
  return x;
}

Eigen::VectorXd ZUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                        const Eigen::VectorXd& x_new, const std::vector<int>& active_rows) {
  return ZUpdate(prob, state, x_new, active_rows, prob.z_set.Restrict(active_rows));
}

Eigen::VectorXd ZUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                        const Eigen::VectorXd& x_new, const std::vector<int>& active_rows,
                        const FeasibleSet& block_set) {
  CheckState(prob, state);
  const ConstraintSystem& cs = prob.constraints;
  const Eigen::Index m = static_cast<Eigen::Index>(active_rows.size());
  Eigen::VectorXd weights(m), target(m);
  // -(p - beta Dx)' H z + beta/2 ||H z||^2 = beta/2 ||H z - (p/beta - Dx)||^2 + const.
  for (Eigen::Index j = 0; j < m; ++j) {
    const int row = active_rows[j];
    weights[j] = cs.h_diag()[row];
    target[j] = state.p[row] / prob.beta - RowDx(cs, x_new, row);
  }
  const Eigen::VectorXd block = SolveZBlock({std::move(weights), std::move(target), block_set});
  Eigen::VectorXd z = state.z;
  for (Eigen::Index j = 0; j < m; ++j) z[active_rows[j]] = block[j];
  return z;
}

Eigen::VectorXd DualUpdate(const SeparableProblem& prob, const PrimalDualState& state,
                           const Eigen::VectorXd& x_new, const Eigen::VectorXd& z_new,
                           const std::vector<int>& active_rows) {
  CheckState(prob, state);
  const ConstraintSystem& cs = prob.constraints;
  Eigen::VectorXd p = state.p;
  for (int row : active_rows) {
    p[row] -= prob.beta * (RowDx(cs, x_new, row) + cs.h_diag()[row] * z_new[row]);
  }
  return p;
}

void ApplyBlock(const SeparableProblem& prob, const ProperPartition& partition, int block,
                PrimalDualState& state) {
  const auto& rows = partition.blocks[block];
  Eigen::VectorXd x = XUpdate(prob, state, partition.components[block]);
  Eigen::VectorXd z = ZUpdate(prob, state, x, rows, partition.block_sets[block]);
  Eigen::VectorXd p = DualUpdate(prob, state, x, z, rows);
  state.x = std::move(x);
  state.z = std::move(z);
  state.p = std::move(p);
  ++state.k;
}

StepRecord Step(const SeparableProblem& prob, const ProperPartition& partition,
                const ActivationDistribution& dist, RngStream& rng, const PrimalDualState& state,
                bool with_shadow) {
  StepRecord rec;
  rec.block = SampleBlock(dist, rng);
  rec.before = state;
  rec.after = state;
  ApplyBlock(prob, partition, rec.block, rec.after);
  if (with_shadow) rec.shadow = ShadowStep(prob, state);
  return rec;
}

ShadowIterates ShadowStep(const SeparableProblem& prob, const PrimalDualState& state) {
  CheckState(prob, state);
  const ConstraintSystem& cs = prob.constraints;
  const int n = prob.dim();
  ShadowIterates sh;
  sh.y.resize(state.x.size());
  for (int i = 0; i < prob.num_components(); ++i) {
    sh.y.segment(static_cast<Eigen::Index>(i) * n, n) =
        SolveComponent(prob, i, state.p, state.z, nullptr);
  }
  const Eigen::VectorXd dy = cs.ApplyD(sh.y);
  sh.v = SolveZBlock({cs.h_diag(), state.p / prob.beta - dy, prob.z_set});
  sh.r = dy + cs.h_diag().cwiseProduct(sh.v);
  sh.mu = state.p - prob.beta * sh.r;
  return sh;
}

StandardProblem ToStandard(const SeparableProblem& prob) {
  return {prob, {}, Eigen::VectorXd::Zero(prob.num_rows())};
}

PrimalDualState SyncAdmmStep(const StandardProblem& sp, const PrimalDualState& state) {
  const SeparableProblem& prob = sp.base;
  CheckState(prob, state);
  const ConstraintSystem& cs = prob.constraints;
  const int n = prob.dim();
  const double beta = prob.beta;
  if (sp.rhs.size() != prob.num_rows()) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "rhs has wrong dimension");
  }

  PrimalDualState next;
  next.k = state.k + 1;
  next.x.resize(state.x.size());
  for (int i = 0; i < prob.num_components(); ++i) {
    next.x.segment(static_cast<Eigen::Index>(i) * n, n) =
        SolveComponent(prob, i, state.p, state.z, &sp.rhs);
  }

  // z minimizes G(z) - p'H z + beta/2 ||D x + H z - c||^2.
  const Eigen::VectorXd& h = cs.h_diag();
  const Eigen::VectorXd target = state.p / beta - cs.ApplyD(next.x) + sp.rhs;
  if (sp.z_terms.empty()) {
    next.z = SolveZBlock({h, target, prob.z_set});
  } else {
    if (static_cast<int>(sp.z_terms.size()) != prob.num_rows() || !prob.z_set.pairs.empty()) {
      throw AdmmError(ErrorCode::kUnsupportedSet,
                      "z objective needs one scalar term per row and an uncoupled Z");
    }
    next.z.resize(prob.num_rows());
    for (int row = 0; row < prob.num_rows(); ++row) {
      const ConvexTerm& g = sp.z_terms[row];
      next.z[row] = SolveScalar(g, 0, beta * h[row] * h[row], beta * h[row] * target[row],
                                prob.z_set.lower[row], prob.z_set.upper[row]);
    }
  }
  next.p = state.p - beta * (cs.ApplyD(next.x) + h.cwiseProduct(next.z) - sp.rhs);
  return next;
}

bool CheckShadowIdentities(const SeparableProblem& prob, const ProperPartition& partition,
                           const StepRecord& record, double tol) {
  if (!record.shadow) return false;
  const ShadowIterates& sh = *record.shadow;
  const PrimalDualState& after = record.after;
  const int n = prob.dim();
  for (int i : partition.components[record.block]) {
    for (int c = 0; c < n; ++c) {
      const Eigen::Index j = static_cast<Eigen::Index>(i) * n + c;
      if (std::abs(after.x[j] - sh.y[j]) > tol) return false;
    }
  }
  for (int row : partition.blocks[record.block]) {
    if (std::abs(after.z[row] - sh.v[row]) > tol) return false;
    if (std::abs(after.p[row] - sh.mu[row]) > tol) return false;
  }
  return true;
}

bool CheckFrozenCoordinates(const SeparableProblem& prob, const ProperPartition& partition,
                            const StepRecord& record) {
  const int n = prob.dim();
  const auto& comps = partition.components[record.block];
  for (int i = 0; i < prob.num_components(); ++i) {
    if (std::binary_search(comps.begin(), comps.end(), i)) continue;
    for (int c = 0; c < n; ++c) {
      const Eigen::Index j = static_cast<Eigen::Index>(i) * n + c;
      if (record.after.x[j] != record.before.x[j]) return false;
    }
  }
  std::vector<char> active(prob.num_rows(), 0);
  for (int row : partition.blocks[record.block]) active[row] = 1;
  for (int row = 0; row < prob.num_rows(); ++row) {
    if (active[row]) continue;
    if (record.after.z[row] != record.before.z[row]) return false;
    if (record.after.p[row] != record.before.p[row]) return false;
  }
  return true;
}

RunMetrics Run(const SeparableProblem& prob, const ProperPartition& partition,
               const ActivationDistribution& dist, const RunOptions& options) {
  if (options.iterations < 1) {
    throw AdmmError(ErrorCode::kInvalidArgument, "iteration count must be at least 1");
  }
  if (options.stride < 1) throw AdmmError(ErrorCode::kInvalidArgument, "stride must be >= 1");
  if (options.lyapunov_probe && !options.reference) {
    throw AdmmError(ErrorCode::kMissingReference, "Lyapunov probe needs a reference solution");
  }
  CheckProblem(prob);

  RunMetrics out;
  PrimalDualState state = options.initial ? *options.initial : InitialState(prob);
  CheckState(prob, state);
  RngStream rng(options.seed);
  ErgodicAverages ergodic(state.x.size(), state.z.size());
  const ReferenceSolution* ref = options.reference ? &*options.reference : nullptr;
  out.records.reserve(static_cast<size_t>(options.iterations / options.stride));

  for (std::int64_t t = 1; t <= options.iterations; ++t) {
    int block;
    if (options.shadow_probe) {
      StepRecord rec = Step(prob, partition, dist, rng, state, /*with_shadow=*/true);
      ++out.counters.probed_steps;
      if (!CheckShadowIdentities(prob, partition, rec)) ++out.counters.shadow_failures;
      if (!CheckFrozenCoordinates(prob, partition, rec)) ++out.counters.freeze_failures;
      block = rec.block;
      state = std::move(rec.after);
    } else {
      block = SampleBlock(dist, rng);
      ApplyBlock(prob, partition, block, state);
    }
    GuardDivergence(state);
    ergodic.Add(state);

    if (t % options.stride != 0) continue;
    MetricRecord m;
    m.iter = t;
    m.active_block = block;
    m.objective = Objective(prob, state.x);
    m.feasibility_violation = Residual(prob, state.x, state.z).norm();
    m.objective_error = ref ? std::abs(m.objective - ref->objective) : kNaN;
    m.lyapunov = options.lyapunov_probe ? Lyapunov(prob, dist.weight_diag, state, *ref) : kNaN;
    if (options.ergodic_probe) {
      const Eigen::VectorXd xbar = ergodic.MeanX();
      Eigen::VectorXd res = Residual(prob, xbar, ergodic.MeanZ());
      m.ergodic_objective = Objective(prob, xbar);
      m.ergodic_objective_error = ref ? std::abs(m.ergodic_objective - ref->objective) : kNaN;
      m.ergodic_feasibility = res.norm();
      if (options.keep_ergodic_residual) m.ergodic_residual = std::move(res);
    } else {
      m.ergodic_objective = m.ergodic_objective_error = m.ergodic_feasibility = kNaN;
    }
    out.records.push_back(std::move(m));
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace async_admm
