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


#include "async_admm/problem.h"

#include <cmath>

#include <gtest/gtest.h>

#include "async_admm/edge_consensus.h"
#include "async_admm/errors.h"
#include "test_util.h"

namespace async_admm {
namespace {

using testing_util::Gen;

ConstraintSystem TwoRowSystem(double h0, double h1) {
  return ConstraintSystem(2, 2, 1, {{0, 0, 0, 1.0}, {1, 1, 0, -1.0}},
                          (Eigen::VectorXd(2) << h0, h1).finished());
}

// D = I2, H = -I2, two scalar components.
SeparableProblem IdentityProblem(std::vector<ConvexTerm> terms) {
  SeparableProblem prob;
  prob.terms = std::move(terms);
  prob.x_sets = testing_util::FreeSets(2);
  prob.z_set = FeasibleSet::Free(2);
  prob.constraints = ConstraintSystem(2, 2, 1, {{0, 0, 0, 1.0}, {1, 1, 0, 1.0}},
                                      Eigen::VectorXd::Constant(2, -1.0));
  return prob;
}

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

TEST(ValidateConstraints, AcceptsEdgeStyleSystem) {
  EXPECT_TRUE(ValidateConstraints(TwoRowSystem(-1.0, -1.0)).ok());
}

TEST(ValidateConstraints, FlagsSingularH) {
  const ValidationReport r = ValidateConstraints(TwoRowSystem(1.0, 0.0));
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, Violation::Kind::kSingularH);
  EXPECT_NE(r.violations[0].message.find("H not invertible"), std::string::npos);
}

TEST(ValidateConstraints, FlagsRowCouplingTwoComponents) {
  const ConstraintSystem cs(2, 2, 1, {{0, 0, 0, 1.0}, {0, 1, 0, 1.0}, {1, 1, 0, 1.0}},
                            Eigen::VectorXd::Constant(2, -1.0));
  const ValidationReport r = ValidateConstraints(cs);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].kind, Violation::Kind::kMultiEntryRow);
  EXPECT_NE(r.violations[0].message.find("couples two components"), std::string::npos);
}

TEST(ValidateConstraints, FlagsZeroColumnAndEmptyRow) {
  const ConstraintSystem cs(2, 2, 1, {{0, 0, 0, 1.0}}, Eigen::VectorXd::Constant(2, -1.0));
  const ValidationReport r = ValidateConstraints(cs);
  bool zero_col = false, empty_row = false;
  for (const Violation& v : r.violations) {
    zero_col |= v.kind == Violation::Kind::kZeroColumn;
    empty_row |= v.kind == Violation::Kind::kEmptyRow;
  }
  EXPECT_TRUE(zero_col);
  EXPECT_TRUE(empty_row);
}

TEST(Objective, QuadraticTermsAtMinimum) {
  const SeparableProblem prob = IdentityProblem(testing_util::QuadraticTerms({1.0, 1.0}));
  EXPECT_DOUBLE_EQ(Objective(prob, Vec({1.0, 1.0})), 0.0);
  EXPECT_DOUBLE_EQ(Objective(prob, Vec({0.0, 2.0})), 2.0);
}

TEST(Objective, AbsDevTermsMatchDirectSum) {
  SeparableProblem prob;
  prob.terms = testing_util::AbsDevTerms({1.0, 2.0, 3.0});
  prob.x_sets = testing_util::FreeSets(3);
  prob.z_set = FeasibleSet::Free(3);
  prob.constraints = ConstraintSystem(3, 3, 1, {{0, 0, 0, 1.0}, {1, 1, 0, 1.0}, {2, 2, 0, 1.0}},
                                      Eigen::VectorXd::Constant(3, -1.0));
  // |2-1| + |2-2| + |2-3|.
  EXPECT_DOUBLE_EQ(Objective(prob, Vec({2.0, 2.0, 2.0})), 2.0);
}

TEST(Objective, RejectsWrongDimension) {
  const SeparableProblem prob = IdentityProblem(testing_util::QuadraticTerms({1.0, 1.0}));
  EXPECT_THROW(Objective(prob, Vec({1.0})), AdmmError);
}

TEST(Residual, IdentityCases) {
  const SeparableProblem prob = IdentityProblem(testing_util::QuadraticTerms({0.0, 0.0}));
  EXPECT_TRUE(Residual(prob, Vec({1.0, 2.0}), Vec({1.0, 2.0})).isZero());
  EXPECT_TRUE(Residual(prob, Vec({1.0, 2.0}), Vec({0.0, 0.0})).isApprox(Vec({1.0, 2.0})));
}

TEST(Lagrangian, DirectSubstitution) {
  // F(x) = 2 at x = (0, 2) and residual (1, 0) with z = (-1, 2).
  const SeparableProblem prob = IdentityProblem(testing_util::QuadraticTerms({1.0, 1.0}));
  const Eigen::VectorXd x = Vec({0.0, 2.0}), z = Vec({-1.0, 2.0});
  ASSERT_TRUE(Residual(prob, x, z).isApprox(Vec({1.0, 0.0})));
  EXPECT_DOUBLE_EQ(Lagrangian(prob, x, z, Vec({3.0, 5.0})), -1.0);
  EXPECT_DOUBLE_EQ(Lagrangian(prob, x, z, Vec({0.0, 0.0})), Objective(prob, x));
}

TEST(Lagrangian, PropertyEqualsObjectiveMinusPairing) {
  Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const SeparableProblem prob = IdentityProblem(
        {ConvexTerm::Quadratic(gen.Vector(1, -3, 3), gen.Uniform(0.1, 4.0)),
         ConvexTerm::AbsDev(gen.Vector(1, -3, 3))});
    const Eigen::VectorXd x = gen.Vector(2, -5, 5), z = gen.Vector(2, -5, 5),
                          p = gen.Vector(2, -5, 5);
    const double expected = Objective(prob, x) - p.dot(Residual(prob, x, z));
    EXPECT_NEAR(Lagrangian(prob, x, z, p), expected, 1e-12);
    // Feasible pairs make the multiplier irrelevant.
    EXPECT_NEAR(Lagrangian(prob, x, x, p), Objective(prob, x), 1e-12);
  }
}

TEST(CheckProblem, RejectsNonPositiveBeta) {
  SeparableProblem prob = IdentityProblem(testing_util::QuadraticTerms({0.0, 0.0}));
  prob.beta = 0.0;
  EXPECT_THROW(CheckProblem(prob), AdmmError);
}

TEST(ConvexTerm, FactoriesValidate) {
  EXPECT_THROW(ConvexTerm::Quadratic(Eigen::VectorXd::Zero(1), 0.0), AdmmError);
  EXPECT_THROW(ConvexTerm::L1(1, -1.0), AdmmError);
}

TEST(FeasibleSet, SumZeroPairsRejectsOverlap) {
  EXPECT_THROW(FeasibleSet::SumZeroPairs(3, {{0, 1}, {1, 2}}), AdmmError);
  EXPECT_THROW(FeasibleSet::SumZeroPairs(2, {{0, 2}}), AdmmError);
}

TEST(FeasibleSet, RestrictKeepsPairsTogether) {
  const FeasibleSet z = FeasibleSet::SumZeroPairs(4, {{0, 1}, {2, 3}});
  const FeasibleSet r = z.Restrict({2, 3});
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0], std::make_pair(0, 1));
  EXPECT_THROW(z.Restrict({0, 2}), AdmmError);
}

TEST(ValidateConstraints, PropertyEdgeBuilderAlwaysValid) {
  Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int nodes = gen.Int(2, 8);
    const int n = gen.Int(1, 3);
    // Random spanning tree plus a few random chords.
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < nodes; ++v) edges.emplace_back(gen.Int(0, v - 1), v);
    for (int extra = gen.Int(0, 3); extra > 0; --extra) {
      const int a = gen.Int(0, nodes - 1), b = gen.Int(0, nodes - 1);
      if (a == b) continue;
      const auto e = std::minmax(a, b);
      bool dup = false;
      for (const auto& f : edges) dup |= std::minmax(f.first, f.second) == e;
      if (!dup) edges.emplace_back(e.first, e.second);
    }
    const Graph g = MakeGraph(nodes, edges);
    std::vector<ConvexTerm> terms;
    for (int i = 0; i < nodes; ++i) terms.push_back(ConvexTerm::Quadratic(gen.Vector(n, -2, 2)));
    const EdgeReformulation r =
        BuildReformulation(g, terms, testing_util::FreeSets(nodes, n), 1.0, n);
    EXPECT_TRUE(ValidateConstraints(r.problem.constraints).ok());
  }
}

}  // namespace
}  // namespace async_admm
