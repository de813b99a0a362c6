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


// Command line front end: run and validate configs, run named benchmarks and
// fit rates to metric files.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "async_admm/diagnostics.h"
#include "async_admm/errors.h"
#include "async_admm/experiment.h"
#include "async_admm/problem_io.h"

namespace {

using namespace async_admm;

// "a..b" (inclusive) or a single seed.
std::vector<std::uint64_t> ParseSeedRange(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {std::stoull(text)};
    const std::uint64_t lo = std::stoull(text.substr(0, dots));
    const std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw AdmmError(ErrorCode::kValidationError, "empty seed range " + text);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  } catch (const std::logic_error&) {
    throw AdmmError(ErrorCode::kValidationError, "seed range must look like 0..9, got " + text);
  }
}

int Report(const ExperimentOutcome& outcome) {
  (outcome.exit_code == kExitOk ? std::cout : std::cerr) << outcome.message << "\n";
  return outcome.exit_code;
}

int Validate(const std::string& path) {
  const ExperimentConfig config = LoadConfigFile(path);
  const PreparedExperiment prepared = Prepare(config);
  const ValidationReport report = ValidateConstraints(prepared.problem.constraints);
  for (const Violation& v : report.violations) std::cerr << v.message << "\n";
  if (!report.ok()) return kExitConfig;
  std::cout << "ok: " << prepared.problem.num_components() << " components, "
            << prepared.problem.num_rows() << " rows, " << prepared.partition.num_blocks()
            << " blocks, reference objective " << FormatDouble(prepared.reference.objective)
            << "\n";
  return kExitOk;
}

int Slope(const std::string& path, const std::string& column, double from, double to) {
  const CsvTable table = ParseCsv(ReadTextFile(path));
  const std::vector<double> iters = table.Column("iter");
  const std::vector<double> values = table.Column(column);
  const RateFit fit = from > 0.0 || to > 0.0
                          ? FitLogLog(iters, values, from, to > 0.0 ? to : iters.back())
                          : EstimateRate(iters, values);
  std::cout << "slope " << FormatDouble(fit.slope) << "\nintercept " << FormatDouble(fit.intercept)
            << "\npoints " << fit.points << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous ADMM experiments"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "JSON config file")->required();

  CLI::App* validate = app.add_subcommand("validate", "Check a config and its problem");
  validate->add_option("config", config_path, "JSON config file")->required();

  BenchmarkSpec bench_spec;
  std::string graph_path, seeds_text = "0", out_dir, probes_text;
  std::int64_t T = 1000, stride = 1;
  double beta = 1.0, box = 0.0;
  int threads = 0;
  CLI::App* bench = app.add_subcommand("bench", "Run a named benchmark");
  bench->add_option("name", bench_spec.name, "consensus-quadratic, consensus-lad or lasso-toy")
      ->required();
  bench->add_option("--graph", graph_path, "Graph file")->required();
  bench->add_option("--seeds", seeds_text, "Seed or inclusive range a..b");
  bench->add_option("--T", T, "Iterations per run");
  bench->add_option("--beta", beta, "Penalty parameter");
  bench->add_option("--out", out_dir, "Output directory");
  bench->add_option("--stride", stride, "Record every stride iterations");
  bench->add_option("--a", bench_spec.a, "Node data a_i")->delimiter(',');
  bench->add_option("--w", bench_spec.w, "lasso-toy regressors")->delimiter(',');
  bench->add_option("--b", bench_spec.b, "lasso-toy responses")->delimiter(',');
  bench->add_option("--pi", bench_spec.pi, "lasso-toy l1 weight");
  bench->add_option("--box", box, "Bound every coordinate to [-box, box]");
  bench->add_option("--probes", probes_text, "Comma list of shadow, lyapunov, ergodic");
  bench->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string csv_path, column;
  double from = 0.0, to = 0.0;
  CLI::App* slope = app.add_subcommand("slope", "Fit log(value) against log(iter)");
  slope->add_option("csv", csv_path, "Metric CSV")->required();
  slope->add_option("--column", column, "Column to fit")->required();
  slope->add_option("--from", from, "First iteration of the window (default: last/2)");
  slope->add_option("--to", to, "Last iteration of the window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return Report(RunExperiment(LoadConfigFile(config_path)));
    if (*validate) return Validate(config_path);
    if (*slope) return Slope(csv_path, column, from, to);

    ExperimentConfig config;
    config.problem.kind = ProblemSource::Kind::kBenchmark;
    if (box > 0.0) bench_spec.box = box;
    config.problem.benchmark = bench_spec;
    config.graph = ReadGraphFile(graph_path);
    config.seeds = ParseSeedRange(seeds_text);
    config.T = T;
    config.stride = stride;
    config.beta = beta;
    config.output = out_dir;
    config.threads = threads;
    for (const std::string& p : CLI::detail::split(probes_text, ',')) {
      if (p == "shadow") {
        config.probes.shadow = true;
      } else if (p == "lyapunov") {
        config.probes.lyapunov = true;
      } else if (p == "ergodic") {
        config.probes.ergodic = true;
      } else if (!p.empty()) {
        throw AdmmError(ErrorCode::kValidationError, "unknown probe \"" + p + "\"");
      }
    }
    // Round-trip through the parser so bench applies the same validation as run.
    return Report(RunExperiment(ParseConfig(RenderConfig(config))));
  } catch (const AdmmError& e) {
    std::cerr << e.what() << "\n";
    return ExitCodeFor(e.code());
  }
}
