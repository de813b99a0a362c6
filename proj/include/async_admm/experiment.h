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


// Experiment configuration, benchmark generation and multi-seed runs.
//
// A config is a JSON object:
//   {"problem": {"benchmark": NAME, ...params} | {"file": PATH} | {"inline": PROBLEM},
//    "graph": PATH | {"nodes": N, "edges": [[i, j], ...]} | {"type": "cycle", "nodes": N},
//    "beta": 1.0,
//    "blocks": [[row, ...], ...],
//    "block_probs": [...],
//    "seeds": [0, 1, ...] or "seed": 0,
//    "T": 1000,
//    "stride": 1,
//    "probes": {"shadow": false, "lyapunov": false, "ergodic": false},
//    "output": DIR,
//    "threads": 0}
// Only "problem" and "T" are required.

#ifndef ASYNC_ADMM_EXPERIMENT_H_
#define ASYNC_ADMM_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "async_admm/diagnostics.h"
#include "async_admm/edge_consensus.h"
#include "async_admm/engine.h"
#include "async_admm/errors.h"
#include "async_admm/problem.h"
#include "async_admm/scheduler.h"

namespace async_admm {

// consensus-quadratic: node i holds weights[i] (u - a[i])^2.
// consensus-lad:       node i holds |u - a[i]|.
// lasso-toy:           node i < N-1 holds (w[i] u - b[i])^2, node N-1 holds pi |u|.
// `box` bounds every x and z coordinate to [-box, box] when set.
struct BenchmarkSpec {
  std::string name;
  std::vector<double> a;
  std::vector<double> weights;
  std::vector<double> w;
  std::vector<double> b;
  double pi = 0.0;
  std::optional<double> box;

  friend bool operator==(const BenchmarkSpec&, const BenchmarkSpec&) = default;
};

struct ProblemSource {
  enum class Kind { kBenchmark, kFile, kInline };
  Kind kind = Kind::kBenchmark;
  BenchmarkSpec benchmark;
  std::string file;
  nlohmann::json inline_problem;

  friend bool operator==(const ProblemSource&, const ProblemSource&) = default;
};

struct ProbeFlags {
  bool shadow = false;
  bool lyapunov = false;
  bool ergodic = false;

  friend bool operator==(const ProbeFlags&, const ProbeFlags&) = default;
};

struct ExperimentConfig {
  ProblemSource problem;
  std::string graph_file;
  std::optional<Graph> graph;
  double beta = 1.0;
  std::vector<std::vector<int>> blocks;
  std::vector<double> block_probs;
  std::vector<std::uint64_t> seeds{0};
  std::int64_t T = 0;
  std::int64_t stride = 1;
  ProbeFlags probes;
  std::string output;
  int threads = 0;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline constexpr const char* kOutputDirEnv = "ASYNC_ADMM_OUT_DIR";

// Throws kParseError (malformed JSON with its line, unknown or mistyped
// field) and kValidationError (values out of range, missing files).
ExperimentConfig ParseConfig(const std::string& text);
// Relative paths inside the file are resolved against its directory.
ExperimentConfig LoadConfigFile(const std::string& path);
std::string RenderConfig(const ExperimentConfig& config);

struct BenchmarkInstance {
  EdgeReformulation reform;
  ReferenceSolution reference;
};

// The x and z parts of the reference are exact; p comes from a long
// synchronous run. Throws kUnknownBenchmark and kValidationError.
BenchmarkInstance GenerateBenchmark(const BenchmarkSpec& spec, const Graph& graph, double beta);

// Everything needed to run a config.
struct PreparedExperiment {
  SeparableProblem problem;
  ProperPartition partition;
  ActivationDistribution dist;
  ReferenceSolution reference;
};

PreparedExperiment Prepare(const ExperimentConfig& config);

struct SeedResult {
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

// Runs every seed on a worker pool; results are ordered as config.seeds.
std::vector<SeedResult> RunSeeds(const ExperimentConfig& config,
                                 const PreparedExperiment& prepared);

// Per-record mean over seeds. The objective columns hold the mean objective
// and |mean objective - reference_objective|, ergodic_feasibility is the norm
// of the mean residual vector when runs kept it, the remaining columns are
// plain means and active_block is -1.
std::vector<MetricRecord> MeanTrajectory(const std::vector<SeedResult>& results,
                                         double reference_objective);

enum ExitCode : int { kExitOk = 0, kExitDivergence = 1, kExitConfig = 2, kExitIo = 3 };

int ExitCodeFor(ErrorCode code);

struct ExperimentOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::string output_dir;
};

// Writes seed_<s>.csv per seed, mean.csv and summary.json into the output
// directory (config.output, else $ASYNC_ADMM_OUT_DIR, else "out").
ExperimentOutcome RunExperiment(const ExperimentConfig& config);

}  // namespace async_admm

#endif  // ASYNC_ADMM_EXPERIMENT_H_
