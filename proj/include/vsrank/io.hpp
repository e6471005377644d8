#pragma once

// File formats: capacity JSON, constraint-system dumps, JSON-lines session logs.

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "vsrank/choquet.hpp"
#include "vsrank/constraints.hpp"
#include "vsrank/learner.hpp"

namespace vsrank {

using ojson = nlohmann::ordered_json;

// {"d": 5, "k": 2, "coeffs": {"1": ..., "1,2": ...}} in canonical subset order.
inline ojson capacity_to_json(const MobiusCapacity& m) {
  ojson j;
  j["d"] = m.index.criteria();
  j["k"] = m.index.order();
  ojson coeffs = ojson::object();
  for (std::size_t p = 0; p < m.index.size(); ++p) coeffs[m.index.key(p)] = m.coeffs.at(p);
  j["coeffs"] = std::move(coeffs);
  return j;
}

inline MobiusCapacity capacity_from_json(const ojson& j) {
  try {
    const int d = j.at("d").get<int>();
    const int k = j.at("k").get<int>();
    MobiusCapacity m{SubsetIndex(d, k), {}};
    m.coeffs.assign(m.index.size(), 0.0);
    const auto& coeffs = j.at("coeffs");
    if (!coeffs.is_object()) throw Error("capacity JSON: coeffs must be an object");
    for (std::size_t p = 0; p < m.index.size(); ++p) {
      const std::string key = m.index.key(p);
      if (!coeffs.contains(key)) throw Error("capacity JSON: missing coefficient \"" + key + "\"");
      m.coeffs[p] = coeffs.at(key).get<double>();
    }
    if (coeffs.size() != m.index.size()) throw Error("capacity JSON: unexpected coefficient keys");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("capacity JSON: ") + e.what());
  }
}

inline MobiusCapacity load_capacity_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open capacity file: " + path);
  ojson j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("capacity JSON " + path + ": " + e.what());
  }
  return capacity_from_json(j);
}

inline ojson constraints_to_json(const ConstraintSystem& cs) {
  auto rows = [](const std::vector<LinearRow>& rs) {
    ojson out = ojson::array();
    for (const auto& r : rs) {
      ojson row;
      row["coeffs"] = r.coeffs;
      row["rhs"] = r.rhs;
      ojson prov;
      prov["kind"] = r.provenance.kind == Provenance::Kind::capacity ? "capacity" : "preference";
      if (r.provenance.kind == Provenance::Kind::preference) prov["iteration"] = r.provenance.iteration;
      row["provenance"] = std::move(prov);
      out.push_back(std::move(row));
    }
    return out;
  };
  ojson j;
  j["dim"] = cs.dim;
  j["equalities"] = rows(cs.equalities);
  j["inequalities"] = rows(cs.inequalities);
  return j;
}

/// Extra per-line context written alongside each record.
struct LogContext {
  std::uint64_t seed = 0;
  int fold = 0;
  int folds = 1;
};

inline ojson record_to_json(const IterationRecord& r, const LogContext& ctx) {
  ojson j;
  j["iteration"] = r.iteration;
  j["i"] = r.i;
  j["j"] = r.j;
  j["answer"] = r.answer;
  j["r_max"] = r.r_max;
  j["center"] = r.center;
  j["duration_ms"] = r.duration_ms;
  j["outcome"] = r.outcome;
  j["seed"] = ctx.seed;
  j["fold"] = ctx.fold;
  j["folds"] = ctx.folds;
  return j;
}

struct LoggedRecord {
  IterationRecord record;
  LogContext context;
};

inline LoggedRecord record_from_json(const ojson& j) {
  LoggedRecord out;
  auto& r = out.record;
  r.iteration = j.at("iteration").get<int>();
  r.i = j.at("i").get<std::size_t>();
  r.j = j.at("j").get<std::size_t>();
  r.answer = j.at("answer").get<int>();
  r.r_max = j.at("r_max").get<double>();
  r.center = j.at("center").get<Vec>();
  r.duration_ms = j.value("duration_ms", 0.0);
  r.outcome = j.value("outcome", std::string{});
  out.context.seed = j.value("seed", std::uint64_t{0});
  out.context.fold = j.value("fold", 0);
  out.context.folds = j.value("folds", 1);
  return out;
}

inline void write_log(std::ostream& out, const std::vector<IterationRecord>& records, const LogContext& ctx) {
  for (const auto& r : records) out << record_to_json(r, ctx).dump() << '\n';
}

inline std::vector<LoggedRecord> read_log(std::istream& in) {
  std::vector<LoggedRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(ojson::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("session log: ") + e.what(), line_no);
    }
  }
  return out;
}

inline std::vector<LoggedRecord> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open session log: " + path);
  return read_log(in);
}

}  // namespace vsrank
