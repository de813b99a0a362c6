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


#include "async_admm/edge_consensus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "async_admm/engine.h"
#include "async_admm/errors.h"
#include "async_admm/prox.h"

namespace async_admm {
namespace {

bool IsConnected(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = num_nodes;
  for (const auto& [a, b] : edges) {
    const int ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components <= 1;
}

// Sum of right derivatives of the scalar pieces at u, nondecreasing in u.
double SummedSubgradient(const std::vector<ConvexTerm>& terms, int coord, double u) {
  double g = 0.0;
  for (const ConvexTerm& t : terms) g += t.ScalarSubgradient(coord, u);
  return g;
}

// Smallest u with nonnegative summed right derivative.
double BisectConsensus(const std::vector<ConvexTerm>& terms, int coord) {
  double lo = -1.0, hi = 1.0;
  while (SummedSubgradient(terms, coord, lo) >= 0.0) {
    lo *= 2.0;
    if (lo < -kBracketLimit) {
      throw AdmmError(ErrorCode::kUnboundedSubproblem, "consensus objective unbounded below");
    }
  }
  while (SummedSubgradient(terms, coord, hi) < 0.0) {
    hi *= 2.0;
    if (hi > kBracketLimit) {
      throw AdmmError(ErrorCode::kUnboundedSubproblem, "consensus objective unbounded below");
    }
  }
  for (int it = 0; it < kBisectionMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (SummedSubgradient(terms, coord, mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Graph MakeGraph(int num_nodes, std::vector<std::pair<int, int>> edges) {
  if (num_nodes < 1) throw AdmmError(ErrorCode::kInvalidArgument, "graph needs a node");
  std::set<std::pair<int, int>> seen;
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) {
      throw AdmmError(ErrorCode::kInvalidArgument, "edge (" + std::to_string(a) + ", " +
                                                       std::to_string(b) + ") out of range");
    }
    if (a == b) {
      throw AdmmError(ErrorCode::kInvalidArgument, "self-loop at node " + std::to_string(a));
    }
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) {
      throw AdmmError(ErrorCode::kInvalidArgument, "duplicate edge (" + std::to_string(a) +
                                                       ", " + std::to_string(b) + ")");
    }
  }
  if (!IsConnected(num_nodes, edges)) {
    throw AdmmError(ErrorCode::kDisconnectedGraph, "graph is not connected");
  }
  return Graph{num_nodes, std::move(edges)};
}

Graph ParseGraph(const std::string& text) {
  std::istringstream in(text);
  long long n = 0, m = 0;
  if (!(in >> n >> m) || n < 1 || m < 0) {
    throw AdmmError(ErrorCode::kParseError, "graph header must be \"N M\"");
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(m));
  for (long long e = 0; e < m; ++e) {
    long long a = 0, b = 0;
    if (!(in >> a >> b)) {
      throw AdmmError(ErrorCode::kParseError, "edge " + std::to_string(e) + " is malformed");
    }
    edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  std::string extra;
  if (in >> extra) throw AdmmError(ErrorCode::kParseError, "trailing data after edge list");
  return MakeGraph(static_cast<int>(n), std::move(edges));
}

Graph ReadGraphFile(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw AdmmError(ErrorCode::kIo, "cannot open graph file " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  return ParseGraph(buf.str());
}

std::string FormatGraph(const Graph& graph) {
  std::ostringstream out;
  out << graph.num_nodes << ' ' << graph.num_edges() << '\n';
  for (const auto& [a, b] : graph.edges) out << a << ' ' << b << '\n';
  return out.str();
}

Graph CycleGraph(int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < num_nodes; ++i) edges.emplace_back(i, i + 1);
  if (num_nodes > 2) edges.emplace_back(0, num_nodes - 1);
  return MakeGraph(num_nodes, std::move(edges));
}

Graph PathGraph(int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < num_nodes; ++i) edges.emplace_back(i, i + 1);
  return MakeGraph(num_nodes, std::move(edges));
}

Graph CompleteGraph(int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < num_nodes; ++i) {
    for (int j = i + 1; j < num_nodes; ++j) edges.emplace_back(i, j);
  }
  return MakeGraph(num_nodes, std::move(edges));
}

EdgeReformulation BuildReformulation(const Graph& graph, std::vector<ConvexTerm> terms,
                                     std::vector<FeasibleSet> x_sets, double beta, int n,
                                     std::optional<double> z_bound) {
  if (n < 1) throw AdmmError(ErrorCode::kInvalidArgument, "n must be at least 1");
  if (static_cast<int>(terms.size()) != graph.num_nodes ||
      static_cast<int>(x_sets.size()) != graph.num_nodes) {
    throw AdmmError(ErrorCode::kDimensionMismatch, "one term and one set per node required");
  }
  if (!IsConnected(graph.num_nodes, graph.edges)) {
    throw AdmmError(ErrorCode::kDisconnectedGraph, "graph is not connected");
  }
  EdgeReformulation out;
  out.graph = graph;
  const int m = graph.num_edges();
  const int w = 2 * m * n;

  std::vector<DEntry> entries;
  entries.reserve(w);
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<int>> blocks(m);
  for (int e = 0; e < m; ++e) {
    const int node[2] = {graph.edges[e].first, graph.edges[e].second};
    for (int q = 0; q < 2; ++q) {
      for (int c = 0; c < n; ++c) {
        const int row = (2 * e + q) * n + c;
        entries.push_back({row, node[q], c, EdgeReformulation::Sign(q)});
        blocks[e].push_back(row);
      }
    }
    for (int c = 0; c < n; ++c) pairs.emplace_back(2 * e * n + c, (2 * e + 1) * n + c);
  }

  SeparableProblem& prob = out.problem;
  prob.terms = std::move(terms);
  prob.x_sets = std::move(x_sets);
  prob.beta = beta;
  prob.constraints = ConstraintSystem(w, graph.num_nodes, n, std::move(entries),
                                      Eigen::VectorXd::Constant(w, -1.0));
  prob.z_set = z_bound ? FeasibleSet::SumZeroPairs(w, std::move(pairs),
                                                   Eigen::VectorXd::Constant(w, -*z_bound),
                                                   Eigen::VectorXd::Constant(w, *z_bound))
                       : FeasibleSet::SumZeroPairs(w, std::move(pairs));
  CheckProblem(prob);
  out.partition = BuildPartition(prob.z_set, prob.constraints, std::move(blocks));
  return out;
}

PrimalDualState EdgeStep(const EdgeReformulation& reform, const PrimalDualState& state,
                         int edge) {
  const Graph& g = reform.graph;
  if (edge < 0 || edge >= g.num_edges()) {
    throw AdmmError(ErrorCode::kInvalidArgument, "edge " + std::to_string(edge) + " not in graph");
  }
  const SeparableProblem& prob = reform.problem;
  const int n = reform.n();
  const double beta = prob.beta;
  const int node[2] = {g.edges[edge].first, g.edges[edge].second};

  PrimalDualState next = state;
  next.x = XUpdate(prob, state, {node[0], node[1]});
  const Eigen::VectorXd& lo = prob.z_set.lower;
  const Eigen::VectorXd& hi = prob.z_set.upper;
  for (int c = 0; c < n; ++c) {
    const int r[2] = {reform.Row(edge, 0, c), reform.Row(edge, 1, c)};
    double ax[2];
    for (int q = 0; q < 2; ++q) ax[q] = EdgeReformulation::Sign(q) * next.x[node[q] * n + c];
    const double v = -0.5 * (state.p[r[0]] + state.p[r[1]]) + 0.5 * beta * (ax[0] + ax[1]);
    double z0 = (-state.p[r[0]] - v) / beta + ax[0];
    const double t_lo = std::max(lo[r[0]], -hi[r[1]]);
    const double t_hi = std::min(hi[r[0]], -lo[r[1]]);
    if (z0 >= t_lo && z0 <= t_hi) {
      next.z[r[0]] = z0;
      next.z[r[1]] = -z0;
      next.p[r[0]] = next.p[r[1]] = -v;
    } else {
      z0 = std::clamp(z0, t_lo, t_hi);
      next.z[r[0]] = z0;
      next.z[r[1]] = -z0;
      for (int q = 0; q < 2; ++q) {
        next.p[r[q]] = state.p[r[q]] - beta * (ax[q] - next.z[r[q]]);
      }
    }
  }
  ++next.k;
  return next;
}

Eigen::VectorXd ConsensusReference(const std::vector<ConvexTerm>& terms) {
  if (terms.empty()) throw AdmmError(ErrorCode::kInvalidArgument, "no terms");
  const int n = terms.front().dim;
  for (const ConvexTerm& t : terms) {
    if (t.dim != n) throw AdmmError(ErrorCode::kDimensionMismatch, "terms differ in dimension");
    if (!t.IsScalarSeparable()) {
      throw AdmmError(ErrorCode::kUnsupportedMix, "consensus reference needs separable terms");
    }
  }
  const auto all = [&](TermKind kind) {
    return std::all_of(terms.begin(), terms.end(),
                       [kind](const ConvexTerm& t) { return t.kind == kind; });
  };
  Eigen::VectorXd out(n);
  if (all(TermKind::kQuadratic)) {
    double wsum = 0.0;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (const ConvexTerm& t : terms) {
      acc += t.weight * t.center;
      wsum += t.weight;
    }
    return acc / wsum;
  }
  if (all(TermKind::kAbsDev)) {
    // Midpoint of the two middle values for an even count.
    const size_t m = terms.size();
    for (int c = 0; c < n; ++c) {
      std::vector<double> vals;
      for (const ConvexTerm& t : terms) vals.push_back(t.center[c]);
      std::sort(vals.begin(), vals.end());
      out[c] = m % 2 == 1 ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
    }
    return out;
  }
  for (int c = 0; c < n; ++c) out[c] = BisectConsensus(terms, c);
  return out;
}

}  // namespace async_admm
