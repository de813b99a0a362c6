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

#include <cmath>

#include <gtest/gtest.h>

#include "async_admm/diagnostics.h"
#include "async_admm/edge_consensus.h"
#include "async_admm/errors.h"
#include "async_admm/prox.h"
#include "oracles.h"
#include "test_util.h"

namespace async_admm {
namespace {

using testing_util::Gen;

PrimalDualState RandomState(const SeparableProblem& prob, Gen& gen) {
  PrimalDualState s = InitialState(prob);
  s.x = gen.Vector(s.x.size(), -3, 3);
  // Random point of Z: fill pairs antisymmetrically.
  s.z = gen.Vector(s.z.size(), -3, 3);
  for (const auto& [a, b] : prob.z_set.pairs) s.z[b] = -s.z[a];
  s.p = gen.Vector(s.p.size(), -3, 3);
  return s;
}

// One scalar component per row: D = diag(d), H = diag(h), Free sets.
SeparableProblem DiagonalProblem(std::vector<ConvexTerm> terms, Eigen::VectorXd d,
                                 Eigen::VectorXd h, double beta) {
  SeparableProblem prob;
  const int m = static_cast<int>(terms.size());
  std::vector<DEntry> entries;
  for (int r = 0; r < m; ++r) entries.push_back({r, r, 0, d[r]});
  prob.terms = std::move(terms);
  prob.x_sets = testing_util::FreeSets(m);
  prob.z_set = FeasibleSet::Free(m);
  prob.constraints = ConstraintSystem(m, m, 1, std::move(entries), std::move(h));
  prob.beta = beta;
  return prob;
}

TEST(XUpdate, QuadraticStationarity) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(2), {3.0, 0.0});
  PrimalDualState s = InitialState(r.problem);
  s.z.setZero();
  s.p.setZero();
  EXPECT_NEAR(XUpdate(r.problem, s, {0})[0], 2.0, 1e-15);
}

TEST(XUpdate, EmptyActiveSetIsIdentity) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(3), {1, 2, 3});
  Gen gen(1);
  const PrimalDualState s = RandomState(r.problem, gen);
  EXPECT_EQ(XUpdate(r.problem, s, {}), s.x);
  EXPECT_EQ(ZUpdate(r.problem, s, s.x, {}), s.z);
  EXPECT_EQ(DualUpdate(r.problem, s, s.x, s.z, {}), s.p);
}

TEST(XUpdate, FullActivationSeparates) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(2), {1.0, 4.0}, 2.0);
  Gen gen(2);
  const PrimalDualState s = RandomState(r.problem, gen);
  const Eigen::VectorXd x = XUpdate(r.problem, s, {0, 1});
  // Node i has one row with sign A: minimize (u - a)^2 + beta/2 u^2 - A (p - beta h z) u.
  for (int i = 0; i < 2; ++i) {
    const double a_sign = i == 0 ? 1.0 : -1.0;
    const double lin = a_sign * (s.p[i] + 2.0 * s.z[i]);
    const double want = oracle::MinimizeScalar(
        [&](double u) { return 2.0 * (u - (i == 0 ? 1.0 : 4.0)); }, 2.0, lin, -INFINITY, INFINITY);
    EXPECT_NEAR(x[i], want, 1e-9);
  }
}

TEST(ZUpdate, FreeBlockMatchesGridOracle) {
  const SeparableProblem prob =
      DiagonalProblem(testing_util::QuadraticTerms({0.0, 0.0}), Eigen::Vector2d(1.0, -2.0),
                      Eigen::Vector2d(0.5, -1.5), 1.7);
  Gen gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const PrimalDualState s = RandomState(prob, gen);
    const Eigen::VectorXd x = gen.Vector(2, -2, 2);
    const Eigen::VectorXd z = ZUpdate(prob, s, x, {0, 1});
    for (int l = 0; l < 2; ++l) {
      const double d = prob.constraints.RowEntry(l).coeff, h = prob.constraints.h_diag()[l];
      // -(p - beta d x) h z + beta/2 (h z)^2, maximized negated on a grid.
      const auto neg = [&](double t) {
        return (s.p[l] - prob.beta * d * x[l]) * h * t - 0.5 * prob.beta * h * h * t * t;
      };
      const double center = (s.p[l] / prob.beta - d * x[l]) / h;
      double best = center - 1.0, best_val = neg(best);
      for (int k = 0; k <= 200000; ++k) {
        const double t = center - 1.0 + 2.0 * k / 200000;
        if (neg(t) > best_val) best_val = neg(best = t);
      }
      EXPECT_NEAR(z[l], best, 1e-5);
    }
  }
}

TEST(DualUpdate, DirectSubstitution) {
  const SeparableProblem prob = DiagonalProblem(testing_util::QuadraticTerms({0.0}),
                                                Eigen::VectorXd::Ones(1),
                                                -Eigen::VectorXd::Ones(1), 2.0);
  PrimalDualState s{Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Zero(1),
                    Eigen::VectorXd::Zero(1), 0};
  EXPECT_DOUBLE_EQ(DualUpdate(prob, s, s.x, s.z, {0})[0], -1.0);
  // Feasible active rows leave p alone.
  s.p[0] = 0.3;
  EXPECT_DOUBLE_EQ(DualUpdate(prob, s, s.x, Eigen::VectorXd::Constant(1, 0.5), {0})[0], 0.3);
}

TEST(Step, PropertyShadowIdentitiesAndFreeze) {
  Gen gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int nodes = gen.Int(2, 6);
    std::vector<double> a;
    for (int i = 0; i < nodes; ++i) a.push_back(gen.Uniform(-5, 5));
    const Graph g = gen.Coin() ? CycleGraph(nodes) : PathGraph(nodes);
    const EdgeReformulation r =
        BuildReformulation(g, gen.Coin() ? testing_util::QuadraticTerms(a)
                                         : testing_util::AbsDevTerms(a),
                           testing_util::FreeSets(nodes), gen.Uniform(0.2, 3.0), 1);
    const ActivationDistribution d = UniformDistribution(r.partition, nodes);
    RngStream rng(trial);
    PrimalDualState s = RandomState(r.problem, gen);
    for (int k = 0; k < 20; ++k) {
      StepRecord rec = Step(r.problem, r.partition, d, rng, s, true);
      EXPECT_TRUE(CheckShadowIdentities(r.problem, r.partition, rec));
      EXPECT_TRUE(CheckFrozenCoordinates(r.problem, r.partition, rec));
      EXPECT_EQ(rec.after.k, s.k + 1);
      s = rec.after;
    }
  }
}

TEST(Step, IdenticalSeedsGiveIdenticalStates) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(5), {1, 2, 3, 4, 5});
  const ActivationDistribution d = UniformDistribution(r.partition, 5);
  RngStream a(8), b(8);
  PrimalDualState sa = InitialState(r.problem), sb = sa;
  for (int k = 0; k < 50; ++k) {
    sa = Step(r.problem, r.partition, d, a, sa, false).after;
    sb = Step(r.problem, r.partition, d, b, sb, false).after;
  }
  EXPECT_EQ(sa.x, sb.x);
  EXPECT_EQ(sa.z, sb.z);
  EXPECT_EQ(sa.p, sb.p);
}

TEST(ShadowStep, FullActivationStepEqualsShadow) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(4), {1, 5, 2, 0});
  const ProperPartition one = SingleBlockPartition(r.problem.z_set, r.problem.constraints);
  Gen gen(6);
  PrimalDualState s = RandomState(r.problem, gen);
  const ShadowIterates sh = ShadowStep(r.problem, s);
  ApplyBlock(r.problem, one, 0, s);
  EXPECT_LE((s.x - sh.y).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE((s.z - sh.v).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE((s.p - sh.mu).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE((sh.r - Residual(r.problem, sh.y, sh.v)).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(ShadowStep, ResidualVanishesAtSaddlePoint) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(4), {1, 5, 2, 0});
  const ReferenceSolution ref = SolveReference(r.problem);
  const ShadowIterates sh = ShadowStep(r.problem, {ref.x, ref.z, ref.p, 0});
  EXPECT_LE(sh.r.norm(), 1e-8);
}

TEST(ShadowStep, TwoAgentClosedForm) {
  // Node i: (u - a_i)^2 with one row of sign A_i, so
  // y_i = (2 a_i + A_i (p_i + beta z_i)) / (2 + beta).
  const double beta = 1.3;
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(2), {2.0, -1.0}, beta);
  Gen gen(7);
  const PrimalDualState s = RandomState(r.problem, gen);
  const ShadowIterates sh = ShadowStep(r.problem, s);
  const double a[2] = {2.0, -1.0}, sign[2] = {1.0, -1.0};
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(sh.y[i], (2 * a[i] + sign[i] * (s.p[i] + beta * s.z[i])) / (2 + beta), 1e-13);
  }
}

TEST(SyncAdmm, ToyProblemConvergesToOrigin) {
  // minimize x^2 + z^2 subject to x - z = 0.
  StandardProblem sp{DiagonalProblem(testing_util::QuadraticTerms({0.0}),
                                     Eigen::VectorXd::Ones(1), -Eigen::VectorXd::Ones(1), 1.0),
                     testing_util::QuadraticTerms({0.0}), Eigen::VectorXd::Zero(1)};
  PrimalDualState s{Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, -3.0),
                    Eigen::VectorXd::Constant(1, 2.0), 0};
  for (int k = 0; k < 200; ++k) s = SyncAdmmStep(sp, s);
  EXPECT_NEAR(s.x[0], 0.0, 1e-10);
  EXPECT_NEAR(s.z[0], 0.0, 1e-10);
}

TEST(SyncAdmm, FixedPointIsStationary) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(3), {1, 2, 6});
  const ReferenceSolution ref = SolveReference(r.problem, 1e-13);
  const PrimalDualState s{ref.x, ref.z, ref.p, 0};
  const PrimalDualState next = SyncAdmmStep(ToStandard(r.problem), s);
  EXPECT_LE((next.x - s.x).lpNorm<Eigen::Infinity>(), 1e-11);
  EXPECT_LE((next.p - s.p).lpNorm<Eigen::Infinity>(), 1e-11);
}

TEST(Run, BoundaryAndStride) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(2), {1.0, 3.0});
  const ActivationDistribution d = UniformDistribution(r.partition, 2);
  RunOptions opt;
  opt.iterations = 0;
  EXPECT_THROW(async_admm::Run(r.problem, r.partition, d, opt), AdmmError);
  opt.iterations = 1;
  EXPECT_EQ(async_admm::Run(r.problem, r.partition, d, opt).records.size(), 1u);
  opt.iterations = 100;
  opt.stride = 7;
  EXPECT_EQ(async_admm::Run(r.problem, r.partition, d, opt).records.size(), 14u);
  opt.lyapunov_probe = true;
  try {
    async_admm::Run(r.problem, r.partition, d, opt);
    FAIL();
  } catch (const AdmmError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReference);
  }
}

TEST(Run, TwoNodeConsensusBecomesFeasible) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(2), {1.0, 3.0});
  const ActivationDistribution d = UniformDistribution(r.partition, 2);
  RunOptions opt;
  opt.iterations = 5000;
  opt.stride = 5000;
  const RunMetrics m = async_admm::Run(r.problem, r.partition, d, opt);
  EXPECT_LT(m.records.back().feasibility_violation, 1e-4);
  EXPECT_NEAR(m.final_state.x[0], 2.0, 1e-4);
}

TEST(Run, CountersMatchProbedSteps) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(CycleGraph(4), {1, 2, 3, 4});
  const ActivationDistribution d = UniformDistribution(r.partition, 4);
  RunOptions opt;
  opt.iterations = 250;
  opt.shadow_probe = true;
  const RunMetrics m = async_admm::Run(r.problem, r.partition, d, opt);
  EXPECT_EQ(m.counters.probed_steps, 250);
  EXPECT_EQ(m.counters.shadow_failures, 0);
  EXPECT_EQ(m.counters.freeze_failures, 0);
}

TEST(Run, DivergenceGuard) {
  const EdgeReformulation r = testing_util::QuadraticConsensus(PathGraph(3), {1, 2, 3});
  const ActivationDistribution d = UniformDistribution(r.partition, 3);
  RunOptions opt;
  opt.iterations = 10;
  PrimalDualState s = InitialState(r.problem);
  s.p[0] = 1e13;
  opt.initial = s;
  try {
    async_admm::Run(r.problem, r.partition, d, opt);
    FAIL();
  } catch (const AdmmError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
}

}  // namespace
}  // namespace async_admm
