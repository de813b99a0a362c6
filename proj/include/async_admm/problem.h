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

// Problem data for separable convex programs with decoupled linear
// constraints:
//
//   minimize   sum_i f_i(x_i)
//   subject to x_i in X_i, z in Z, D x + H z = 0
//
// where each row of D touches exactly one scalar column of x and H is
// diagonal and invertible.

#ifndef ASYNC_ADMM_PROBLEM_H_
#define ASYNC_ADMM_PROBLEM_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace async_admm {

inline constexpr double kDefaultTolerance = 1e-8;

enum class TermKind { kQuadratic, kAbsDev, kL1, kCustom };

// User-supplied objective. When `scalar_convex` is set the term is
// f(u) = sum_c g(u_c) with g given by `scalar_value`; `scalar_derivative`
// returns any subgradient of g and, if absent, is replaced by a central
// difference of `scalar_value`. Convexity is declared, never verified.
struct CustomOracle {
  std::string family;
  std::vector<double> params;
  bool scalar_convex = false;
  std::function<double(double)> scalar_value;
  std::function<double(double)> scalar_derivative;
  std::function<double(const Eigen::VectorXd&)> vector_value;
};

struct ConvexTerm {
  TermKind kind = TermKind::kQuadratic;
  int dim = 1;
  // Quadratic: w * ||u - a||^2, AbsDev: ||u - a||_1.
  Eigen::VectorXd center;
  // w for Quadratic, gamma for L1.
  double weight = 1.0;
  std::shared_ptr<const CustomOracle> custom;

  static ConvexTerm Quadratic(Eigen::VectorXd a, double w = 1.0);
  static ConvexTerm AbsDev(Eigen::VectorXd a);
  static ConvexTerm L1(int dim, double gamma);
  static ConvexTerm Custom(int dim, CustomOracle oracle);

  double Value(const Eigen::VectorXd& u) const;

  // True when the term is a sum of scalar functions of its coordinates.
  bool IsScalarSeparable() const;
  // Scalar piece acting on coordinate `coord`. Requires IsScalarSeparable().
  double ScalarValue(int coord, double u) const;
  // Right derivative of the scalar piece, a valid subgradient.
  double ScalarSubgradient(int coord, double u) const;
};

enum class SetKind { kFree, kBox, kSumZeroPairs };

// Closed convex set. `lower`/`upper` are always sized `dim` (infinite when
// unconstrained). SumZeroPairs constrains z_a + z_b = 0 for each listed pair
// and may additionally carry finite bounds, which makes it compact.
struct FeasibleSet {
  SetKind kind = SetKind::kFree;
  int dim = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::pair<int, int>> pairs;

  static FeasibleSet Free(int dim);
  static FeasibleSet Box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static FeasibleSet SumZeroPairs(int dim, std::vector<std::pair<int, int>> pairs);
  static FeasibleSet SumZeroPairs(int dim, std::vector<std::pair<int, int>> pairs,
                                  Eigen::VectorXd lower, Eigen::VectorXd upper);

  bool Contains(const Eigen::VectorXd& v, double tol = kDefaultTolerance) const;
  bool IsBounded() const;
  // pair_partner[c] is the coordinate coupled with c, or -1.
  std::vector<int> PairPartners() const;
  // Restriction to the listed coordinates, with pairs re-indexed. Every pair
  // must lie entirely inside or outside `coords`.
  FeasibleSet Restrict(const std::vector<int>& coords) const;
};

// One nonzero of D: D(row, component * n + coord) = coeff.
struct DEntry {
  int row = 0;
  int component = 0;
  int coord = 0;
  double coeff = 0.0;

  friend bool operator==(const DEntry&, const DEntry&) = default;
};

// D as a list of triples plus the diagonal of H. Structure is not enforced
// here; ValidateConstraints() reports what the solver requires.
class ConstraintSystem {
 public:
  ConstraintSystem() = default;
  ConstraintSystem(int num_rows, int num_components, int dim,
                   std::vector<DEntry> entries, Eigen::VectorXd h_diag);

  int num_rows() const { return num_rows_; }
  int num_components() const { return num_components_; }
  int dim() const { return dim_; }
  const std::vector<DEntry>& entries() const { return entries_; }
  const Eigen::VectorXd& h_diag() const { return h_diag_; }

  // The unique entry of `row`. Throws kInvalidProblem when the row has no
  // entry or more than one.
  const DEntry& RowEntry(int row) const;
  // Rows with a nonzero in column (component, coord).
  const std::vector<int>& RowsOf(int component, int coord) const {
    return rows_by_column_[component * dim_ + coord];
  }
  const std::vector<int>& EntriesOfRow(int row) const { return entries_by_row_[row]; }

  Eigen::VectorXd ApplyD(const Eigen::VectorXd& x) const;

 private:
  int num_rows_ = 0;
  int num_components_ = 0;
  int dim_ = 1;
  std::vector<DEntry> entries_;
  Eigen::VectorXd h_diag_;
  std::vector<std::vector<int>> entries_by_row_;
  std::vector<std::vector<int>> rows_by_column_;
};

struct Violation {
  enum class Kind { kMultiEntryRow, kEmptyRow, kZeroColumn, kSingularH };
  Kind kind;
  int index;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport ValidateConstraints(const ConstraintSystem& cs);

struct SeparableProblem {
  std::vector<ConvexTerm> terms;
  std::vector<FeasibleSet> x_sets;
  FeasibleSet z_set;
  ConstraintSystem constraints;
  double beta = 1.0;

  int num_components() const { return constraints.num_components(); }
  int num_rows() const { return constraints.num_rows(); }
  int dim() const { return constraints.dim(); }
};

// Throws kInvalidProblem/kDimensionMismatch unless every dimension agrees,
// beta > 0 and the constraint structure validates.
void CheckProblem(const SeparableProblem& prob);

struct PrimalDualState {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  std::int64_t k = 0;
};

double Objective(const SeparableProblem& prob, const Eigen::VectorXd& x);
// D x + H z.
Eigen::VectorXd Residual(const SeparableProblem& prob, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& z);
// F(x) - p'(D x + H z).
double Lagrangian(const SeparableProblem& prob, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& z, const Eigen::VectorXd& p);

}  // namespace async_admm

#endif  // ASYNC_ADMM_PROBLEM_H_
