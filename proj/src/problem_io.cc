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


#include "async_admm/problem_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "async_admm/errors.h"

namespace async_admm {
namespace {

using nlohmann::json;

Eigen::VectorXd VectorFromJson(const json& j, Eigen::Index size, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw AdmmError(ErrorCode::kParseError,
                    what + " must be an array of " + std::to_string(size) + " numbers");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index k = 0; k < size; ++k) {
    if (!j[k].is_number()) throw AdmmError(ErrorCode::kParseError, what + " must be numeric");
    v[k] = j[k].get<double>();
  }
  return v;
}

json VectorToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

// Infinite bounds are written as null so documents stay valid JSON.
json BoundsToJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (double x : v) out.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  return out;
}

Eigen::VectorXd BoundsFromJson(const json& j, int dim, double missing, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw AdmmError(ErrorCode::kParseError,
                    what + " must be an array of " + std::to_string(dim) + " entries");
  }
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) {
    if (j[k].is_null()) {
      v[k] = missing;
    } else if (j[k].is_number()) {
      v[k] = j[k].get<double>();
    } else {
      throw AdmmError(ErrorCode::kParseError, what + " entries must be numbers or null");
    }
  }
  return v;
}

template <typename T>
T Get(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) {
    throw AdmmError(ErrorCode::kParseError, context + ": missing field \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw AdmmError(ErrorCode::kParseError, context + ": field \"" + key + "\" has wrong type");
  }
}

double LogCosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace

ConvexTerm MakeCustomTerm(const std::string& family, const std::vector<double>& params,
                          int dim) {
  CustomOracle oracle;
  oracle.family = family;
  oracle.params = params;
  oracle.scalar_convex = true;
  const auto need = [&](size_t count) {
    if (params.size() != count) {
      throw AdmmError(ErrorCode::kInvalidArgument, family + " takes " + std::to_string(count) +
                                                       " parameter(s)");
    }
  };
  if (family == "huber") {
    need(2);
    const double delta = params[0], c = params[1];
    if (!(delta > 0.0)) throw AdmmError(ErrorCode::kInvalidArgument, "huber delta must be > 0");
    oracle.scalar_value = [delta, c](double u) {
      const double d = std::abs(u - c);
      return d <= delta ? 0.5 * d * d : delta * (d - 0.5 * delta);
    };
    oracle.scalar_derivative = [delta, c](double u) {
      return std::clamp(u - c, -delta, delta);
    };
  } else if (family == "log_cosh") {
    need(1);
    const double c = params[0];
    oracle.scalar_value = [c](double u) { return LogCosh(u - c); };
    oracle.scalar_derivative = [c](double u) { return std::tanh(u - c); };
  } else if (family == "concave_quadratic") {
    need(1);
    const double a = params[0];
    oracle.scalar_value = [a](double u) { return -a * u * u; };
    oracle.scalar_derivative = [a](double u) { return -2.0 * a * u; };
  } else {
    throw AdmmError(ErrorCode::kUnsupportedTerm, "unknown custom family \"" + family + "\"");
  }
  return ConvexTerm::Custom(dim, std::move(oracle));
}

void RequireKnownFields(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& context) {
  if (!obj.is_object()) throw AdmmError(ErrorCode::kParseError, context + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || item.key() == name;
    if (!known) {
      throw AdmmError(ErrorCode::kParseError,
                      context + ": unknown field \"" + item.key() + "\"");
    }
  }
}

ConvexTerm TermFromJson(const json& j, int dim) {
  const std::string kind = j.is_object() ? Get<std::string>(j, "kind", "term") : "";
  if (kind == "quadratic") {
    RequireKnownFields(j, {"kind", "center", "weight"}, "quadratic term");
    const double w = j.contains("weight") ? Get<double>(j, "weight", "quadratic term") : 1.0;
    return ConvexTerm::Quadratic(VectorFromJson(j.at("center"), dim, "center"), w);
  }
  if (kind == "absdev") {
    RequireKnownFields(j, {"kind", "center"}, "absdev term");
    return ConvexTerm::AbsDev(VectorFromJson(j.at("center"), dim, "center"));
  }
  if (kind == "l1") {
    RequireKnownFields(j, {"kind", "gamma"}, "l1 term");
    return ConvexTerm::L1(dim, Get<double>(j, "gamma", "l1 term"));
  }
  if (kind == "custom") {
    RequireKnownFields(j, {"kind", "family", "params"}, "custom term");
    return MakeCustomTerm(Get<std::string>(j, "family", "custom term"),
                          j.contains("params") ? Get<std::vector<double>>(j, "params", "custom term")
                                               : std::vector<double>{},
                          dim);
  }
  throw AdmmError(ErrorCode::kParseError, "term kind \"" + kind + "\" is not recognized");
}

json TermToJson(const ConvexTerm& term) {
  switch (term.kind) {
    case TermKind::kQuadratic:
      return {{"kind", "quadratic"}, {"center", VectorToJson(term.center)}, {"weight", term.weight}};
    case TermKind::kAbsDev:
      return {{"kind", "absdev"}, {"center", VectorToJson(term.center)}};
    case TermKind::kL1:
      return {{"kind", "l1"}, {"gamma", term.weight}};
    case TermKind::kCustom:
      break;
  }
  if (!term.custom || term.custom->family.empty()) {
    throw AdmmError(ErrorCode::kUnsupportedTerm, "custom term without a family cannot be saved");
  }
  return {{"kind", "custom"}, {"family", term.custom->family}, {"params", term.custom->params}};
}

FeasibleSet SetFromJson(const json& j, int dim) {
  const std::string kind = j.is_object() ? Get<std::string>(j, "kind", "set") : "";
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (kind == "free") {
    RequireKnownFields(j, {"kind"}, "free set");
    return FeasibleSet::Free(dim);
  }
  if (kind == "box") {
    RequireKnownFields(j, {"kind", "lower", "upper"}, "box set");
    return FeasibleSet::Box(BoundsFromJson(j.at("lower"), dim, -kInf, "lower"),
                            BoundsFromJson(j.at("upper"), dim, kInf, "upper"));
  }
  if (kind == "sum_zero_pairs") {
    RequireKnownFields(j, {"kind", "pairs", "lower", "upper"}, "sum_zero_pairs set");
    auto pairs = Get<std::vector<std::pair<int, int>>>(j, "pairs", "sum_zero_pairs set");
    if (!j.contains("lower") && !j.contains("upper")) {
      return FeasibleSet::SumZeroPairs(dim, std::move(pairs));
    }
    const Eigen::VectorXd lo = j.contains("lower")
                                   ? BoundsFromJson(j.at("lower"), dim, -kInf, "lower")
                                   : Eigen::VectorXd::Constant(dim, -kInf);
    const Eigen::VectorXd hi = j.contains("upper")
                                   ? BoundsFromJson(j.at("upper"), dim, kInf, "upper")
                                   : Eigen::VectorXd::Constant(dim, kInf);
    return FeasibleSet::SumZeroPairs(dim, std::move(pairs), lo, hi);
  }
  throw AdmmError(ErrorCode::kParseError, "set kind \"" + kind + "\" is not recognized");
}

json SetToJson(const FeasibleSet& set) {
  switch (set.kind) {
    case SetKind::kFree:
      return {{"kind", "free"}};
    case SetKind::kBox:
      return {{"kind", "box"}, {"lower", BoundsToJson(set.lower)}, {"upper", BoundsToJson(set.upper)}};
    case SetKind::kSumZeroPairs:
      break;
  }
  json out = {{"kind", "sum_zero_pairs"}, {"pairs", set.pairs}};
  if (set.lower.array().isFinite().any() || set.upper.array().isFinite().any()) {
    out["lower"] = BoundsToJson(set.lower);
    out["upper"] = BoundsToJson(set.upper);
  }
  return out;
}

SeparableProblem ProblemFromJson(const json& j, double beta) {
  RequireKnownFields(j, {"dim", "components", "rows", "entries", "h", "z_set"}, "problem");
  const int n = Get<int>(j, "dim", "problem");
  const int w = Get<int>(j, "rows", "problem");
  if (n < 1 || w < 1) throw AdmmError(ErrorCode::kParseError, "dim and rows must be positive");
  const json& comps = j.at("components");
  if (!comps.is_array() || comps.empty()) {
    throw AdmmError(ErrorCode::kParseError, "components must be a non-empty array");
  }
  SeparableProblem prob;
  prob.beta = beta;
  for (const json& c : comps) {
    RequireKnownFields(c, {"term", "set"}, "component");
    prob.terms.push_back(TermFromJson(c.at("term"), n));
    prob.x_sets.push_back(c.contains("set") ? SetFromJson(c.at("set"), n) : FeasibleSet::Free(n));
  }
  std::vector<DEntry> entries;
  const json& ej = j.contains("entries") ? j.at("entries") : json::array();
  for (const json& e : ej) {
    if (!e.is_array() || e.size() != 4) {
      throw AdmmError(ErrorCode::kParseError, "entries must be [row, component, coord, coeff]");
    }
    entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<double>()});
  }
  const Eigen::VectorXd h = VectorFromJson(j.at("h"), w, "h");
  prob.z_set = j.contains("z_set") ? SetFromJson(j.at("z_set"), w) : FeasibleSet::Free(w);
  prob.constraints =
      ConstraintSystem(w, static_cast<int>(prob.terms.size()), n, std::move(entries), h);
  CheckProblem(prob);
  return prob;
}

json ProblemToJson(const SeparableProblem& prob) {
  json comps = json::array();
  for (int i = 0; i < prob.num_components(); ++i) {
    comps.push_back({{"term", TermToJson(prob.terms[i])}, {"set", SetToJson(prob.x_sets[i])}});
  }
  json entries = json::array();
  for (const DEntry& e : prob.constraints.entries()) {
    entries.push_back({e.row, e.component, e.coord, e.coeff});
  }
  return {{"dim", prob.dim()},
          {"components", comps},
          {"rows", prob.num_rows()},
          {"entries", entries},
          {"h", VectorToJson(prob.constraints.h_diag())},
          {"z_set", SetToJson(prob.z_set)}};
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string MetricsToCsv(const std::vector<MetricRecord>& records) {
  std::string out;
  for (size_t c = 0; c < std::size(kCsvColumns); ++c) {
    if (c > 0) out += ',';
    out += kCsvColumns[c];
  }
  out += '\n';
  for (const MetricRecord& m : records) {
    out += std::to_string(m.iter);
    for (double v : {m.objective, m.objective_error, m.feasibility_violation,
                     m.ergodic_objective_error, m.ergodic_feasibility, m.lyapunov}) {
      out += ',';
      out += FormatDouble(v);
    }
    out += ',';
    out += std::to_string(m.active_block);
    out += '\n';
  }
  return out;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw AdmmError(ErrorCode::kIo, "cannot open " + path + " for writing");
  file << text;
  file.close();
  if (!file) throw AdmmError(ErrorCode::kIo, "failed writing " + path);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw AdmmError(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

std::vector<double> CsvTable::Column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw AdmmError(ErrorCode::kInvalidArgument, "no column named \"" + name + "\"");
  }
  const size_t c = static_cast<size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

CsvTable ParseCsv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw AdmmError(ErrorCode::kParseError, "empty CSV");
  table.header = split(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw AdmmError(ErrorCode::kParseError,
                      "CSV line " + std::to_string(line_no) + " has the wrong column count");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& cell : cells) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw AdmmError(ErrorCode::kParseError,
                        "CSV line " + std::to_string(line_no) + ": bad number \"" + cell + "\"");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace async_admm
