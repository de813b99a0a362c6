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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "async_admm/errors.h"

namespace async_admm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void RequireDim(bool ok, const std::string& what) {
  if (!ok) throw AdmmError(ErrorCode::kDimensionMismatch, what);
}

}  // namespace

ConvexTerm ConvexTerm::Quadratic(Eigen::VectorXd a, double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw AdmmError(ErrorCode::kInvalidArgument, "quadratic weight must be positive");
  }
  if (a.size() == 0) throw AdmmError(ErrorCode::kInvalidArgument, "empty center");
  ConvexTerm t;
  t.kind = TermKind::kQuadratic;
  t.dim = static_cast<int>(a.size());
  t.center = std::move(a);
  t.weight = w;
  return t;
}

ConvexTerm ConvexTerm::AbsDev(Eigen::VectorXd a) {
  if (a.size() == 0) throw AdmmError(ErrorCode::kInvalidArgument, "empty center");
  ConvexTerm t;
  t.kind = TermKind::kAbsDev;
  t.dim = static_cast<int>(a.size());
  t.center = std::move(a);
  return t;
}

ConvexTerm ConvexTerm::L1(int dim, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw AdmmError(ErrorCode::kInvalidArgument, "L1 weight must be nonnegative");
  }
  if (dim <= 0) throw AdmmError(ErrorCode::kInvalidArgument, "dimension must be positive");
  ConvexTerm t;
  t.kind = TermKind::kL1;
  t.dim = dim;
  t.center = Eigen::VectorXd::Zero(dim);
  t.weight = gamma;
  return t;
}

ConvexTerm ConvexTerm::Custom(int dim, CustomOracle oracle) {
  if (dim <= 0) throw AdmmError(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (oracle.scalar_convex && !oracle.scalar_value) {
    throw AdmmError(ErrorCode::kInvalidArgument, "scalar custom term needs scalar_value");
  }
  if (!oracle.scalar_convex && !oracle.vector_value) {
    throw AdmmError(ErrorCode::kInvalidArgument, "custom term needs an evaluation oracle");
  }
  ConvexTerm t;
  t.kind = TermKind::kCustom;
  t.dim = dim;
  t.center = Eigen::VectorXd::Zero(dim);
  t.custom = std::make_shared<const CustomOracle>(std::move(oracle));
  return t;
}

bool ConvexTerm::IsScalarSeparable() const {
  return kind != TermKind::kCustom || (custom && custom->scalar_convex);
}

double ConvexTerm::ScalarValue(int coord, double u) const {
  switch (kind) {
    case TermKind::kQuadratic: {
      const double d = u - center[coord];
      return weight * d * d;
    }
    case TermKind::kAbsDev:
      return std::abs(u - center[coord]);
    case TermKind::kL1:
      return weight * std::abs(u);
    case TermKind::kCustom:
      if (!custom->scalar_convex) {
        throw AdmmError(ErrorCode::kUnsupportedTerm, "custom term is not scalar separable");
      }
      return custom->scalar_value(u);
  }
  return 0.0;
}

double ConvexTerm::ScalarSubgradient(int coord, double u) const {
  switch (kind) {
    case TermKind::kQuadratic:
      return 2.0 * weight * (u - center[coord]);
    case TermKind::kAbsDev:
      return u >= center[coord] ? 1.0 : -1.0;
    case TermKind::kL1:
      return u >= 0.0 ? weight : -weight;
    case TermKind::kCustom: {
      if (!custom->scalar_convex) {
        throw AdmmError(ErrorCode::kUnsupportedTerm, "custom term is not scalar separable");
      }
      if (custom->scalar_derivative) return custom->scalar_derivative(u);
      const double h = 1e-7 * std::max(1.0, std::abs(u));
      return (custom->scalar_value(u + h) - custom->scalar_value(u - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

double ConvexTerm::Value(const Eigen::VectorXd& u) const {
  RequireDim(u.size() == dim, "term argument has wrong dimension");
  switch (kind) {
    case TermKind::kQuadratic:
      return weight * (u - center).squaredNorm();
    case TermKind::kAbsDev:
      return (u - center).lpNorm<1>();
    case TermKind::kL1:
      return weight * u.lpNorm<1>();
    case TermKind::kCustom: {
      if (!custom->scalar_convex) return custom->vector_value(u);
      double sum = 0.0;
      for (int c = 0; c < dim; ++c) sum += custom->scalar_value(u[c]);
      return sum;
    }
  }
  return 0.0;
}

FeasibleSet FeasibleSet::Free(int dim) {
  FeasibleSet s;
  s.kind = SetKind::kFree;
  s.dim = dim;
  s.lower = Eigen::VectorXd::Constant(dim, -kInf);
  s.upper = Eigen::VectorXd::Constant(dim, kInf);
  return s;
}

FeasibleSet FeasibleSet::Box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  RequireDim(lower.size() == upper.size(), "box bounds differ in size");
  for (Eigen::Index c = 0; c < lower.size(); ++c) {
    if (!(lower[c] <= upper[c])) {
      throw AdmmError(ErrorCode::kInvalidArgument, "box requires lower <= upper");
    }
  }
  FeasibleSet s;
  s.kind = SetKind::kBox;
  s.dim = static_cast<int>(lower.size());
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::SumZeroPairs(int dim, std::vector<std::pair<int, int>> pairs) {
  return SumZeroPairs(dim, std::move(pairs), Eigen::VectorXd::Constant(dim, -kInf),
                      Eigen::VectorXd::Constant(dim, kInf));
}

FeasibleSet FeasibleSet::SumZeroPairs(int dim, std::vector<std::pair<int, int>> pairs,
                                      Eigen::VectorXd lower, Eigen::VectorXd upper) {
  RequireDim(lower.size() == dim && upper.size() == dim, "pair-set bounds have wrong size");
  std::vector<char> used(dim, 0);
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= dim || b >= dim || a == b) {
      throw AdmmError(ErrorCode::kInvalidArgument, "sum-zero pair index out of range");
    }
    if (used[a] || used[b]) {
      throw AdmmError(ErrorCode::kInvalidArgument, "sum-zero pairs must be disjoint");
    }
    used[a] = used[b] = 1;
    // z_a ranges over [max(l_a, -u_b), min(u_a, -l_b)].
    if (std::max(lower[a], -upper[b]) > std::min(upper[a], -lower[b])) {
      throw AdmmError(ErrorCode::kInvalidArgument, "sum-zero pair has empty bounds");
    }
  }
  for (int c = 0; c < dim; ++c) {
    if (!(lower[c] <= upper[c])) {
      throw AdmmError(ErrorCode::kInvalidArgument, "bounds require lower <= upper");
    }
  }
  FeasibleSet s;
  s.kind = SetKind::kSumZeroPairs;
  s.dim = dim;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.pairs = std::move(pairs);
  return s;
}

bool FeasibleSet::Contains(const Eigen::VectorXd& v, double tol) const {
  if (v.size() != dim) return false;
  for (int c = 0; c < dim; ++c) {
    if (!std::isfinite(v[c])) return false;
    if (v[c] < lower[c] - tol || v[c] > upper[c] + tol) return false;
  }
  for (const auto& [a, b] : pairs) {
    if (std::abs(v[a] + v[b]) > tol) return false;
  }
  return true;
}

bool FeasibleSet::IsBounded() const {
  return lower.allFinite() && upper.allFinite();
}

std::vector<int> FeasibleSet::PairPartners() const {
  std::vector<int> partner(dim, -1);
  for (const auto& [a, b] : pairs) {
    partner[a] = b;
    partner[b] = a;
  }
  return partner;
}

FeasibleSet FeasibleSet::Restrict(const std::vector<int>& coords) const {
  const int m = static_cast<int>(coords.size());
  std::vector<int> local(dim, -1);
  Eigen::VectorXd lo(m), hi(m);
  for (int j = 0; j < m; ++j) {
    RequireDim(coords[j] >= 0 && coords[j] < dim, "restriction index out of range");
    local[coords[j]] = j;
    lo[j] = lower[coords[j]];
    hi[j] = upper[coords[j]];
  }
  if (kind == SetKind::kFree) return Free(m);
  if (kind == SetKind::kBox) return Box(lo, hi);
  std::vector<std::pair<int, int>> local_pairs;
  for (const auto& [a, b] : pairs) {
    const bool in_a = local[a] >= 0;
    const bool in_b = local[b] >= 0;
    if (in_a != in_b) {
      throw AdmmError(ErrorCode::kImproperPartition,
                      "coupled coordinates split by restriction");
    }
    if (in_a) local_pairs.emplace_back(local[a], local[b]);
  }
  return SumZeroPairs(m, std::move(local_pairs), lo, hi);
}

ConstraintSystem::ConstraintSystem(int num_rows, int num_components, int dim,
                                   std::vector<DEntry> entries, Eigen::VectorXd h_diag)
    : num_rows_(num_rows),
      num_components_(num_components),
      dim_(dim),
      entries_(std::move(entries)),
      h_diag_(std::move(h_diag)) {
  RequireDim(num_rows > 0 && num_components > 0 && dim > 0,
             "constraint dimensions must be positive");
  RequireDim(h_diag_.size() == num_rows, "H diagonal length differs from row count");
  entries_by_row_.assign(num_rows, {});
  rows_by_column_.assign(static_cast<size_t>(num_components) * dim, {});
  for (size_t e = 0; e < entries_.size(); ++e) {
    const DEntry& d = entries_[e];
    RequireDim(d.row >= 0 && d.row < num_rows, "D entry row out of range");
    RequireDim(d.component >= 0 && d.component < num_components,
               "D entry component out of range");
    RequireDim(d.coord >= 0 && d.coord < dim, "D entry coordinate out of range");
    if (d.coeff == 0.0) continue;
    entries_by_row_[d.row].push_back(static_cast<int>(e));
    rows_by_column_[d.component * dim + d.coord].push_back(d.row);
  }
}

const DEntry& ConstraintSystem::RowEntry(int row) const {
  const auto& ids = entries_by_row_[row];
  if (ids.size() != 1) {
    throw AdmmError(ErrorCode::kInvalidProblem,
                    "row " + std::to_string(row) + " must have exactly one D entry");
  }
  return entries_[ids.front()];
}

Eigen::VectorXd ConstraintSystem::ApplyD(const Eigen::VectorXd& x) const {
  RequireDim(x.size() == static_cast<Eigen::Index>(num_components_) * dim_,
             "x has wrong dimension");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_rows_);
  for (const DEntry& d : entries_) {
    out[d.row] += d.coeff * x[d.component * dim_ + d.coord];
  }
  return out;
}

ValidationReport ValidateConstraints(const ConstraintSystem& cs) {
  ValidationReport report;
  for (int row = 0; row < cs.num_rows(); ++row) {
    const auto& ids = cs.EntriesOfRow(row);
    if (ids.empty()) {
      report.violations.push_back({Violation::Kind::kEmptyRow, row,
                                   "row " + std::to_string(row) + " of D is empty"});
      continue;
    }
    if (ids.size() > 1) {
      report.violations.push_back(
          {Violation::Kind::kMultiEntryRow, row,
           "row " + std::to_string(row) + " couples two components"});
    }
  }
  for (int i = 0; i < cs.num_components(); ++i) {
    for (int c = 0; c < cs.dim(); ++c) {
      if (cs.RowsOf(i, c).empty()) {
        report.violations.push_back(
            {Violation::Kind::kZeroColumn, i,
             "column (" + std::to_string(i) + "," + std::to_string(c) + ") of D is zero"});
      }
    }
  }
  for (int row = 0; row < cs.num_rows(); ++row) {
    if (cs.h_diag()[row] == 0.0 || !std::isfinite(cs.h_diag()[row])) {
      report.violations.push_back({Violation::Kind::kSingularH, row,
                                   "H not invertible at row " + std::to_string(row)});
    }
  }
  return report;
}

void CheckProblem(const SeparableProblem& prob) {
  const int n = prob.dim();
  const int num = prob.num_components();
  const int w = prob.num_rows();
  RequireDim(static_cast<int>(prob.terms.size()) == num, "number of terms differs from N");
  RequireDim(static_cast<int>(prob.x_sets.size()) == num, "number of x sets differs from N");
  for (int i = 0; i < num; ++i) {
    RequireDim(prob.terms[i].dim == n, "term " + std::to_string(i) + " has wrong dimension");
    RequireDim(prob.x_sets[i].dim == n, "x set " + std::to_string(i) + " has wrong dimension");
  }
  RequireDim(prob.z_set.dim == w, "z set dimension differs from W");
  if (!(prob.beta > 0.0) || !std::isfinite(prob.beta)) {
    throw AdmmError(ErrorCode::kInvalidProblem, "beta must be positive");
  }
  const ValidationReport report = ValidateConstraints(prob.constraints);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "constraint structure invalid:";
    for (const auto& v : report.violations) msg << " [" << v.message << "]";
    throw AdmmError(ErrorCode::kInvalidProblem, msg.str());
  }
}

double Objective(const SeparableProblem& prob, const Eigen::VectorXd& x) {
  const int n = prob.dim();
  RequireDim(x.size() == static_cast<Eigen::Index>(prob.terms.size()) * n,
             "x has wrong dimension");
  double sum = 0.0;
  for (size_t i = 0; i < prob.terms.size(); ++i) {
    sum += prob.terms[i].Value(x.segment(static_cast<Eigen::Index>(i) * n, n));
  }
  return sum;
}

Eigen::VectorXd Residual(const SeparableProblem& prob, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& z) {
  RequireDim(z.size() == prob.num_rows(), "z has wrong dimension");
  return prob.constraints.ApplyD(x) + prob.constraints.h_diag().cwiseProduct(z);
}

double Lagrangian(const SeparableProblem& prob, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& z, const Eigen::VectorXd& p) {
  RequireDim(p.size() == prob.num_rows(), "p has wrong dimension");
  return Objective(prob, x) - p.dot(Residual(prob, x, z));
}

}  // namespace async_admm
