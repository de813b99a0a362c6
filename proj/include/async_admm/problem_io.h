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


// JSON encoding of problems, the built-in custom term families and CSV
// metric files.
//
// Problem document:
//   {"dim": n,
//    "components": [{"term": TERM, "set": SET}, ...],
//    "rows": W,
//    "entries": [[row, component, coord, coeff], ...],
//    "h": [h_0, ..., h_{W-1}],
//    "z_set": SET}
// TERM is {"kind": "quadratic", "center": [...], "weight": w},
// {"kind": "absdev", "center": [...]}, {"kind": "l1", "gamma": g} or
// {"kind": "custom", "family": name, "params": [...]}. SET is
// {"kind": "free"}, {"kind": "box", "lower": [...], "upper": [...]} or
// {"kind": "sum_zero_pairs", "pairs": [[a, b], ...]} with optional bounds.

#ifndef ASYNC_ADMM_PROBLEM_IO_H_
#define ASYNC_ADMM_PROBLEM_IO_H_

#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "async_admm/engine.h"
#include "async_admm/problem.h"

namespace async_admm {

// Families: "huber" [delta, center], "log_cosh" [center] and
// "concave_quadratic" [a]. The last one is -a u^2, declared convex although
// it is not; it exists to exercise failure paths.
ConvexTerm MakeCustomTerm(const std::string& family, const std::vector<double>& params, int dim);

// Throws kParseError naming the first key of `obj` outside `allowed`.
void RequireKnownFields(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                        const std::string& context);

ConvexTerm TermFromJson(const nlohmann::json& j, int dim);
nlohmann::json TermToJson(const ConvexTerm& term);
FeasibleSet SetFromJson(const nlohmann::json& j, int dim);
nlohmann::json SetToJson(const FeasibleSet& set);

// Builds the problem with the given beta and checks it.
SeparableProblem ProblemFromJson(const nlohmann::json& j, double beta);
nlohmann::json ProblemToJson(const SeparableProblem& prob);

// Column order of every metric CSV.
inline constexpr const char* kCsvColumns[] = {
    "iter",
    "objective",
    "objective_error",
    "feasibility_violation",
    "ergodic_objective_error",
    "ergodic_feasibility",
    "lyapunov",
    "active_block",
};

// Doubles use %.17g so files round-trip exactly.
std::string FormatDouble(double v);
std::string MetricsToCsv(const std::vector<MetricRecord>& records);
void WriteTextFile(const std::string& path, const std::string& text);
std::string ReadTextFile(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws kInvalidArgument when `name` is not a column.
  std::vector<double> Column(const std::string& name) const;
};

CsvTable ParseCsv(const std::string& text);

}  // namespace async_admm

#endif  // ASYNC_ADMM_PROBLEM_IO_H_
