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


#include "async_admm/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <thread>

#include "async_admm/errors.h"
#include "async_admm/problem_io.h"

namespace async_admm {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kReferenceTolerance = 1e-10;
constexpr std::int64_t kReferenceIterations = 200'000;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void Invalid(const std::string& msg) {
  throw AdmmError(ErrorCode::kValidationError, msg);
}

template <typename T>
T Field(const json& obj, const char* key, const std::string& context) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw AdmmError(ErrorCode::kParseError, context + ": field \"" + key + "\" has wrong type");
  }
}

int LineOfOffset(const std::string& text, size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

std::string ResolvePath(const std::string& path, const fs::path& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

BenchmarkSpec ParseBenchmark(const json& j) {
  RequireKnownFields(j, {"benchmark", "a", "weights", "w", "b", "pi", "box"}, "problem");
  BenchmarkSpec spec;
  spec.name = Field<std::string>(j, "benchmark", "problem");
  if (spec.name != "consensus-quadratic" && spec.name != "consensus-lad" &&
      spec.name != "lasso-toy") {
    throw AdmmError(ErrorCode::kUnknownBenchmark, "unknown benchmark \"" + spec.name + "\"");
  }
  if (j.contains("a")) spec.a = Field<std::vector<double>>(j, "a", "problem");
  if (j.contains("weights")) spec.weights = Field<std::vector<double>>(j, "weights", "problem");
  if (j.contains("w")) spec.w = Field<std::vector<double>>(j, "w", "problem");
  if (j.contains("b")) spec.b = Field<std::vector<double>>(j, "b", "problem");
  if (j.contains("pi")) spec.pi = Field<double>(j, "pi", "problem");
  if (j.contains("box") && !j.at("box").is_null()) {
    spec.box = Field<double>(j, "box", "problem");
    if (!(*spec.box > 0.0) || !std::isfinite(*spec.box)) Invalid("box must be positive");
  }
  if (!(spec.pi >= 0.0)) Invalid("pi must be nonnegative");
  return spec;
}

json BenchmarkToJson(const BenchmarkSpec& spec) {
  json j = {{"benchmark", spec.name}};
  if (!spec.a.empty()) j["a"] = spec.a;
  if (!spec.weights.empty()) j["weights"] = spec.weights;
  if (!spec.w.empty()) j["w"] = spec.w;
  if (!spec.b.empty()) j["b"] = spec.b;
  if (spec.pi != 0.0) j["pi"] = spec.pi;
  if (spec.box) j["box"] = *spec.box;
  return j;
}

Graph ParseInlineGraph(const json& j) {
  RequireKnownFields(j, {"nodes", "edges", "type"}, "graph");
  const int nodes = Field<int>(j, "nodes", "graph");
  if (j.contains("type")) {
    if (j.contains("edges")) Invalid("graph: give either \"type\" or \"edges\"");
    const std::string type = Field<std::string>(j, "type", "graph");
    if (type == "cycle") return CycleGraph(nodes);
    if (type == "path") return PathGraph(nodes);
    if (type == "complete") return CompleteGraph(nodes);
    Invalid("graph type \"" + type + "\" is not one of cycle, path, complete");
  }
  return MakeGraph(nodes, Field<std::vector<std::pair<int, int>>>(j, "edges", "graph"));
}

ExperimentConfig ParseConfigJson(const json& j, const fs::path& base) {
  RequireKnownFields(j,
                     {"problem", "graph", "beta", "blocks", "block_probs", "seeds", "seed", "T",
                      "stride", "probes", "output", "threads"},
                     "config");
  ExperimentConfig c;
  if (!j.contains("problem")) throw AdmmError(ErrorCode::kParseError, "config: missing \"problem\"");
  if (!j.contains("T")) throw AdmmError(ErrorCode::kParseError, "config: missing \"T\"");

  const json& pj = j.at("problem");
  if (!pj.is_object()) throw AdmmError(ErrorCode::kParseError, "problem must be an object");
  const int sources = pj.contains("benchmark") + pj.contains("file") + pj.contains("inline");
  if (sources != 1) Invalid("problem needs exactly one of benchmark, file, inline");
  if (pj.contains("benchmark")) {
    c.problem.kind = ProblemSource::Kind::kBenchmark;
    c.problem.benchmark = ParseBenchmark(pj);
  } else if (pj.contains("file")) {
    RequireKnownFields(pj, {"file"}, "problem");
    c.problem.kind = ProblemSource::Kind::kFile;
    c.problem.file = ResolvePath(Field<std::string>(pj, "file", "problem"), base);
    if (!fs::exists(c.problem.file)) Invalid("problem file " + c.problem.file + " does not exist");
  } else {
    RequireKnownFields(pj, {"inline"}, "problem");
    c.problem.kind = ProblemSource::Kind::kInline;
    c.problem.inline_problem = pj.at("inline");
    if (!c.problem.inline_problem.is_object()) {
      throw AdmmError(ErrorCode::kParseError, "problem.inline must be an object");
    }
  }

  if (j.contains("graph")) {
    const json& gj = j.at("graph");
    if (gj.is_string()) {
      c.graph_file = ResolvePath(gj.get<std::string>(), base);
      if (!fs::exists(c.graph_file)) Invalid("graph file " + c.graph_file + " does not exist");
    } else {
      c.graph = ParseInlineGraph(gj);
    }
  }
  const bool has_graph = c.graph || !c.graph_file.empty();
  if (c.problem.kind == ProblemSource::Kind::kBenchmark && !has_graph) {
    Invalid("benchmark problems need a graph");
  }
  if (c.problem.kind != ProblemSource::Kind::kBenchmark && has_graph) {
    Invalid("graph only applies to benchmark problems");
  }

  if (j.contains("beta")) c.beta = Field<double>(j, "beta", "config");
  if (!(c.beta > 0.0) || !std::isfinite(c.beta)) Invalid("beta must be positive and finite");
  if (j.contains("blocks")) c.blocks = Field<std::vector<std::vector<int>>>(j, "blocks", "config");
  if (j.contains("block_probs")) {
    c.block_probs = Field<std::vector<double>>(j, "block_probs", "config");
    double total = 0.0;
    for (double p : c.block_probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) Invalid("block_probs must be nonnegative");
      total += p;
    }
    if (c.block_probs.empty() || std::abs(total - 1.0) > kProbabilitySumTolerance) {
      Invalid("block_probs must sum to 1");
    }
    if (!c.blocks.empty() && c.blocks.size() != c.block_probs.size()) {
      Invalid("blocks and block_probs differ in length");
    }
  }
  if (j.contains("seed") && j.contains("seeds")) Invalid("give either seed or seeds");
  if (j.contains("seed")) c.seeds = {Field<std::uint64_t>(j, "seed", "config")};
  if (j.contains("seeds")) c.seeds = Field<std::vector<std::uint64_t>>(j, "seeds", "config");
  if (c.seeds.empty()) Invalid("seeds must not be empty");
  c.T = Field<std::int64_t>(j, "T", "config");
  if (c.T < 1) Invalid("T must be at least 1");
  if (j.contains("stride")) c.stride = Field<std::int64_t>(j, "stride", "config");
  if (c.stride < 1) Invalid("stride must be at least 1");
  if (j.contains("probes")) {
    const json& pr = j.at("probes");
    RequireKnownFields(pr, {"shadow", "lyapunov", "ergodic"}, "probes");
    if (pr.contains("shadow")) c.probes.shadow = Field<bool>(pr, "shadow", "probes");
    if (pr.contains("lyapunov")) c.probes.lyapunov = Field<bool>(pr, "lyapunov", "probes");
    if (pr.contains("ergodic")) c.probes.ergodic = Field<bool>(pr, "ergodic", "probes");
  }
  if (j.contains("output")) c.output = ResolvePath(Field<std::string>(j, "output", "config"), base);
  if (j.contains("threads")) c.threads = Field<int>(j, "threads", "config");
  if (c.threads < 0) Invalid("threads must be nonnegative");
  return c;
}

json Final(const MetricRecord& m) {
  return {{"objective", m.objective},
          {"objective_error", m.objective_error},
          {"feasibility_violation", m.feasibility_violation},
          {"ergodic_objective_error", m.ergodic_objective_error},
          {"ergodic_feasibility", m.ergodic_feasibility},
          {"lyapunov", m.lyapunov}};
}

json Slopes(const std::vector<MetricRecord>& records) {
  std::vector<double> iters;
  for (const MetricRecord& m : records) iters.push_back(static_cast<double>(m.iter));
  json out = json::object();
  const auto fit = [&](const char* name, double MetricRecord::*field) {
    std::vector<double> vals;
    for (const MetricRecord& m : records) vals.push_back(m.*field);
    try {
      const RateFit f = EstimateRate(iters, vals);
      out[name] = {{"slope", f.slope}, {"intercept", f.intercept}, {"points", f.points}};
    } catch (const AdmmError&) {
      out[name] = nullptr;
    }
  };
  fit("ergodic_feasibility", &MetricRecord::ergodic_feasibility);
  fit("ergodic_objective_error", &MetricRecord::ergodic_objective_error);
  return out;
}

std::string OutputDir(const ExperimentConfig& config) {
  if (!config.output.empty()) return config.output;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "out";
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw AdmmError(ErrorCode::kParseError,
                    "line " + std::to_string(LineOfOffset(text, e.byte)) + ": malformed JSON");
  }
  return ParseConfigJson(j, fs::path());
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  const std::string text = ReadTextFile(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw AdmmError(ErrorCode::kParseError, path + " line " +
                                                std::to_string(LineOfOffset(text, e.byte)) +
                                                ": malformed JSON");
  }
  fs::path base = fs::path(path).parent_path();
  if (base.empty()) base = ".";
  return ParseConfigJson(j, base);
}

std::string RenderConfig(const ExperimentConfig& c) {
  json j;
  switch (c.problem.kind) {
    case ProblemSource::Kind::kBenchmark:
      j["problem"] = BenchmarkToJson(c.problem.benchmark);
      break;
    case ProblemSource::Kind::kFile:
      j["problem"] = {{"file", c.problem.file}};
      break;
    case ProblemSource::Kind::kInline:
      j["problem"] = {{"inline", c.problem.inline_problem}};
      break;
  }
  if (c.graph) {
    j["graph"] = {{"nodes", c.graph->num_nodes}, {"edges", c.graph->edges}};
  } else if (!c.graph_file.empty()) {
    j["graph"] = c.graph_file;
  }
  j["beta"] = c.beta;
  if (!c.blocks.empty()) j["blocks"] = c.blocks;
  if (!c.block_probs.empty()) j["block_probs"] = c.block_probs;
  j["seeds"] = c.seeds;
  j["T"] = c.T;
  j["stride"] = c.stride;
  j["probes"] = {{"shadow", c.probes.shadow},
                 {"lyapunov", c.probes.lyapunov},
                 {"ergodic", c.probes.ergodic}};
  if (!c.output.empty()) j["output"] = c.output;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

BenchmarkInstance GenerateBenchmark(const BenchmarkSpec& spec, const Graph& graph, double beta) {
  const int nodes = graph.num_nodes;
  const auto sized = [&](std::vector<double> v, size_t size, double start, double step,
                         const char* what) {
    if (v.empty()) {
      for (size_t k = 0; k < size; ++k) v.push_back(start + step * static_cast<double>(k));
    }
    if (v.size() != size) {
      Invalid(std::string(what) + " needs " + std::to_string(size) + " values");
    }
    return v;
  };
  std::vector<ConvexTerm> terms;
  if (spec.name == "consensus-quadratic") {
    const auto a = sized(spec.a, nodes, 1.0, 1.0, "a");
    const auto wt = sized(spec.weights, nodes, 1.0, 0.0, "weights");
    for (int i = 0; i < nodes; ++i) {
      terms.push_back(ConvexTerm::Quadratic(Eigen::VectorXd::Constant(1, a[i]), wt[i]));
    }
  } else if (spec.name == "consensus-lad") {
    const auto a = sized(spec.a, nodes, 1.0, 1.0, "a");
    for (int i = 0; i < nodes; ++i) {
      terms.push_back(ConvexTerm::AbsDev(Eigen::VectorXd::Constant(1, a[i])));
    }
  } else if (spec.name == "lasso-toy") {
    if (nodes < 2) Invalid("lasso-toy needs at least two nodes");
    const auto w = sized(spec.w, nodes - 1, 1.0, 0.0, "w");
    const auto b = sized(spec.b, nodes - 1, 1.0, 1.0, "b");
    for (int i = 0; i + 1 < nodes; ++i) {
      if (w[i] == 0.0) Invalid("lasso-toy regressors must be nonzero");
      // (w u - b)^2 = w^2 (u - b/w)^2.
      terms.push_back(ConvexTerm::Quadratic(Eigen::VectorXd::Constant(1, b[i] / w[i]), w[i] * w[i]));
    }
    terms.push_back(ConvexTerm::L1(1, spec.pi));
  } else {
    throw AdmmError(ErrorCode::kUnknownBenchmark, "unknown benchmark \"" + spec.name + "\"");
  }

  std::vector<FeasibleSet> sets;
  for (int i = 0; i < nodes; ++i) {
    sets.push_back(spec.box ? FeasibleSet::Box(Eigen::VectorXd::Constant(1, -*spec.box),
                                               Eigen::VectorXd::Constant(1, *spec.box))
                            : FeasibleSet::Free(1));
  }
  const double x_star = ConsensusReference(terms)[0];
  BenchmarkInstance inst{BuildReformulation(graph, std::move(terms), std::move(sets), beta, 1,
                                            spec.box),
                         {}};
  const SeparableProblem& prob = inst.reform.problem;
  ReferenceSolution long_run = SolveReference(prob, kReferenceTolerance, kReferenceIterations);

  ReferenceSolution& ref = inst.reference;
  ref.x = Eigen::VectorXd::Constant(nodes, x_star);
  ref.z.resize(prob.num_rows());
  for (int e = 0; e < graph.num_edges(); ++e) {
    for (int q = 0; q < 2; ++q) ref.z[inst.reform.Row(e, q, 0)] = EdgeReformulation::Sign(q) * x_star;
  }
  ref.p = std::move(long_run.p);
  ref.objective = Objective(prob, ref.x);
  ref.source = "analytic";
  ref.achieved_tolerance = long_run.achieved_tolerance;
  return inst;
}

PreparedExperiment Prepare(const ExperimentConfig& config) {
  PreparedExperiment out;
  if (config.problem.kind == ProblemSource::Kind::kBenchmark) {
    const Graph graph = config.graph ? *config.graph : ReadGraphFile(config.graph_file);
    BenchmarkInstance inst = GenerateBenchmark(config.problem.benchmark, graph, config.beta);
    out.problem = std::move(inst.reform.problem);
    out.partition = config.blocks.empty()
                        ? std::move(inst.reform.partition)
                        : BuildPartition(out.problem.z_set, out.problem.constraints, config.blocks);
    out.reference = std::move(inst.reference);
  } else {
    const json pj = config.problem.kind == ProblemSource::Kind::kInline
                        ? config.problem.inline_problem
                        : [&] {
                            try {
                              return json::parse(ReadTextFile(config.problem.file));
                            } catch (const json::parse_error& e) {
                              throw AdmmError(ErrorCode::kParseError,
                                              config.problem.file + ": malformed JSON");
                            }
                          }();
    out.problem = ProblemFromJson(pj, config.beta);
    std::vector<std::vector<int>> blocks = config.blocks;
    if (blocks.empty()) {
      // One block per row, with coupled rows kept together.
      const std::vector<int> partner = out.problem.z_set.PairPartners();
      for (int row = 0; row < out.problem.num_rows(); ++row) {
        if (partner[row] >= 0 && partner[row] < row) continue;
        blocks.push_back(partner[row] >= 0 ? std::vector<int>{row, partner[row]}
                                           : std::vector<int>{row});
      }
    }
    out.partition = BuildPartition(out.problem.z_set, out.problem.constraints, std::move(blocks));
    out.reference = SolveReference(out.problem, kReferenceTolerance, kReferenceIterations);
  }
  const int nc = out.problem.num_components();
  out.dist = config.block_probs.empty()
                 ? UniformDistribution(out.partition, nc)
                 : DeriveProbabilities(out.partition,
                                       Eigen::Map<const Eigen::VectorXd>(
                                           config.block_probs.data(),
                                           static_cast<Eigen::Index>(config.block_probs.size())),
                                       nc);
  return out;
}

std::vector<SeedResult> RunSeeds(const ExperimentConfig& config,
                                 const PreparedExperiment& prepared) {
  const size_t count = config.seeds.size();
  std::vector<SeedResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t k = next++; k < count; k = next++) {
      try {
        RunOptions opt;
        opt.seed = config.seeds[k];
        opt.iterations = config.T;
        opt.stride = config.stride;
        opt.shadow_probe = config.probes.shadow;
        opt.lyapunov_probe = config.probes.lyapunov;
        opt.ergodic_probe = config.probes.ergodic;
        opt.keep_ergodic_residual = config.probes.ergodic;
        opt.reference = prepared.reference;
        results[k] = {config.seeds[k],
                      Run(prepared.problem, prepared.partition, prepared.dist, opt)};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  size_t threads = config.threads > 0 ? static_cast<size_t>(config.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<MetricRecord> MeanTrajectory(const std::vector<SeedResult>& results,
                                         double reference_objective) {
  if (results.empty()) return {};
  const size_t rows = results.front().metrics.records.size();
  const double inv = 1.0 / static_cast<double>(results.size());
  std::vector<MetricRecord> mean(rows);
  for (size_t r = 0; r < rows; ++r) {
    MetricRecord& m = mean[r];
    m.iter = results.front().metrics.records[r].iter;
    m.active_block = -1;
    Eigen::VectorXd residual;
    bool have_residual = true;
    for (const SeedResult& s : results) {
      const MetricRecord& x = s.metrics.records.at(r);
      m.objective += inv * x.objective;
      m.feasibility_violation += inv * x.feasibility_violation;
      m.ergodic_objective += inv * x.ergodic_objective;
      m.ergodic_feasibility += inv * x.ergodic_feasibility;
      m.lyapunov += inv * x.lyapunov;
      if (x.ergodic_residual.size() == 0) {
        have_residual = false;
      } else if (residual.size() == 0) {
        residual = inv * x.ergodic_residual;
      } else {
        residual += inv * x.ergodic_residual;
      }
    }
    m.objective_error = std::abs(m.objective - reference_objective);
    m.ergodic_objective_error = std::abs(m.ergodic_objective - reference_objective);
    if (have_residual) {
      m.ergodic_feasibility = residual.norm();
      m.ergodic_residual = std::move(residual);
    }
  }
  return mean;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDivergence:
    case ErrorCode::kUnboundedSubproblem:
      return kExitDivergence;
    case ErrorCode::kIo:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

ExperimentOutcome RunExperiment(const ExperimentConfig& config) {
  ExperimentOutcome outcome;
  outcome.output_dir = OutputDir(config);
  try {
    const PreparedExperiment prepared = Prepare(config);
    const std::vector<SeedResult> results = RunSeeds(config, prepared);

    std::error_code ec;
    fs::create_directories(outcome.output_dir, ec);
    if (ec) throw AdmmError(ErrorCode::kIo, "cannot create " + outcome.output_dir);
    const fs::path dir(outcome.output_dir);

    json runs = json::array();
    json invariants = {{"probed_steps", 0}, {"shadow_failures", 0}, {"freeze_failures", 0}};
    for (const SeedResult& r : results) {
      const std::string name = "seed_" + std::to_string(r.seed) + ".csv";
      WriteTextFile((dir / name).string(), MetricsToCsv(r.metrics.records));
      const InvariantCounters& ic = r.metrics.counters;
      runs.push_back({{"seed", r.seed},
                      {"csv", name},
                      {"rows", r.metrics.records.size()},
                      {"final", r.metrics.records.empty() ? json(nullptr)
                                                          : Final(r.metrics.records.back())},
                      {"slopes", Slopes(r.metrics.records)},
                      {"invariants",
                       {{"probed_steps", ic.probed_steps},
                        {"shadow_failures", ic.shadow_failures},
                        {"freeze_failures", ic.freeze_failures}}}});
      invariants["probed_steps"] = invariants["probed_steps"].get<std::int64_t>() + ic.probed_steps;
      invariants["shadow_failures"] =
          invariants["shadow_failures"].get<std::int64_t>() + ic.shadow_failures;
      invariants["freeze_failures"] =
          invariants["freeze_failures"].get<std::int64_t>() + ic.freeze_failures;
    }
    const std::vector<MetricRecord> mean = MeanTrajectory(results, prepared.reference.objective);
    WriteTextFile((dir / "mean.csv").string(), MetricsToCsv(mean));

    json summary = {
        {"status", "ok"},
        {"seeds", config.seeds},
        {"T", config.T},
        {"stride", config.stride},
        {"beta", config.beta},
        {"blocks", prepared.partition.num_blocks()},
        {"reference",
         {{"objective", prepared.reference.objective},
          {"source", prepared.reference.source},
          {"achieved_tolerance", prepared.reference.achieved_tolerance}}},
        {"runs", runs},
        {"mean",
         {{"csv", "mean.csv"},
          {"final", mean.empty() ? json(nullptr) : Final(mean.back())},
          {"slopes", Slopes(mean)}}},
        {"invariants", invariants}};
    WriteTextFile((dir / "summary.json").string(), summary.dump(2) + "\n");
    outcome.message = "wrote " + std::to_string(results.size()) + " run(s) to " +
                      outcome.output_dir;
  } catch (const AdmmError& e) {
    outcome.exit_code = ExitCodeFor(e.code());
    outcome.message = e.what();
  } catch (const fs::filesystem_error& e) {
    outcome.exit_code = kExitIo;
    outcome.message = e.what();
  }
  return outcome;
}

}  // namespace async_admm
