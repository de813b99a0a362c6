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


// Edge-based reformulation of the consensus problem
//
//   minimize sum_i f_i(x_i)  subject to  x_i = x_j for every edge (i, j)
//
// as A_eq x_q = z_eq with z_ei + z_ej = 0 for every edge e and endpoint q.
// The low-index endpoint of an edge carries A = +1 and the other A = -1.
// Row (e, q, c) of the constraint system lives at index (2e + q) n + c.

#ifndef ASYNC_ADMM_EDGE_CONSENSUS_H_
#define ASYNC_ADMM_EDGE_CONSENSUS_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "async_admm/problem.h"
#include "async_admm/scheduler.h"

namespace async_admm {

struct Graph {
  int num_nodes = 0;
  // Stored with first < second.
  std::vector<std::pair<int, int>> edges;

  int num_edges() const { return static_cast<int>(edges.size()); }

  friend bool operator==(const Graph&, const Graph&) = default;
};

// Orders each edge, then rejects self-loops, duplicates and out-of-range
// nodes (kInvalidArgument) and disconnected graphs (kDisconnectedGraph).
Graph MakeGraph(int num_nodes, std::vector<std::pair<int, int>> edges);

// "N M" followed by M lines "i j", 0-based. Throws kParseError on malformed
// text and the MakeGraph errors otherwise.
Graph ParseGraph(const std::string& text);
Graph ReadGraphFile(const std::string& path);
std::string FormatGraph(const Graph& graph);

Graph CycleGraph(int num_nodes);
Graph PathGraph(int num_nodes);
Graph CompleteGraph(int num_nodes);

struct EdgeReformulation {
  Graph graph;
  SeparableProblem problem;
  // One block per edge, edge order.
  ProperPartition partition;

  int n() const { return problem.dim(); }
  int Row(int edge, int endpoint, int coord) const { return (2 * edge + endpoint) * n() + coord; }
  // A_eq: +1 for endpoint 0 (low index), -1 for endpoint 1.
  static double Sign(int endpoint) { return endpoint == 0 ? 1.0 : -1.0; }
};

// `z_bound`, when given, bounds every z coordinate to [-z_bound, z_bound]
// so that Z is compact; choose it large enough not to bind.
EdgeReformulation BuildReformulation(const Graph& graph, std::vector<ConvexTerm> terms,
                                     std::vector<FeasibleSet> x_sets, double beta, int n,
                                     std::optional<double> z_bound = std::nullopt);

// One iteration with block `edge` in closed form. Both endpoint x-updates
// use every incident edge, then
//   v    = -(p_ei + p_ej)/2 + beta/2 (A_ei x_i + A_ej x_j)
//   z_eq = (-p_eq - v)/beta + A_eq x_q
//   p_eq = -v
// for each coordinate. If z would leave a bounded Z the pair is clamped and
// the multipliers fall back to the generic dual step.
PrimalDualState EdgeStep(const EdgeReformulation& reform, const PrimalDualState& state,
                         int edge);

// Minimizer of sum_i f_i(u) over u in R^n: the weighted mean when every term
// is Quadratic, the median when every term is AbsDev, and bisection on the
// summed subgradient for other mixes of coordinate separable terms. Throws
// kUnsupportedMix for terms that are not coordinate separable.
Eigen::VectorXd ConsensusReference(const std::vector<ConvexTerm>& terms);

}  // namespace async_admm

#endif  // ASYNC_ADMM_EDGE_CONSENSUS_H_
