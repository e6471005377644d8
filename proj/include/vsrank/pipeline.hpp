#pragma once

// Glue shared by the command-line tools: fold splits, oracle specs, orders.

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vsrank/io.hpp"
#include "vsrank/learner.hpp"
#include "vsrank/measures.hpp"
#include "vsrank/oracles.hpp"

namespace vsrank {

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffles [0, n) with the seed and deals it round-robin into `folds` parts.
/// Fold f trains on the other parts and is evaluated on part f; with a single
/// fold both sides are the whole set.
inline FoldSplit fold_split(std::size_t n, int folds, int fold, std::uint64_t seed) {
  if (folds < 1) throw Error("folds must be >= 1");
  if (fold < 0 || fold >= folds) throw Error("fold index out of range");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (folds == 1) return {all, all};
  if (n < static_cast<std::size_t>(folds)) throw Error("fewer rules than folds");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(all.begin(), all.end(), rng);
  FoldSplit s;
  for (std::size_t p = 0; p < n; ++p) {
    if (static_cast<int>(p % static_cast<std::size_t>(folds)) == fold)
      s.test.push_back(all[p]);
    else
      s.train.push_back(all[p]);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

struct OracleSpec {
  OracleKind kind = OracleKind::phi;
  std::string capacity_path;  // choquet only
};

/// "phi", "surprise" or "choquet:<capacity.json>".
inline std::optional<OracleSpec> parse_oracle_spec(const std::string& s) {
  if (s == "phi") return OracleSpec{OracleKind::phi, {}};
  if (s == "surprise") return OracleSpec{OracleKind::surprise, {}};
  const std::string prefix = "choquet:";
  if (s.rfind(prefix, 0) == 0 && s.size() > prefix.size())
    return OracleSpec{OracleKind::hidden_choquet, s.substr(prefix.size())};
  return std::nullopt;
}

/// Oracle scores of the surviving (deduplicated) rules, by local index.
inline std::vector<double> oracle_scores(const Oracle& oracle, const RuleTable& table, const FeatureTable& ft) {
  if (oracle.kind() == OracleKind::hidden_choquet &&
      oracle.capacity()->index.criteria() != static_cast<int>(ft.dim()))
    throw Error("capacity has d = " + std::to_string(oracle.capacity()->index.criteria()) + " but the rules have " +
                std::to_string(ft.dim()) + " measures");
  std::vector<double> s;
  s.reserve(ft.rows());
  for (std::size_t r = 0; r < ft.rows(); ++r) s.push_back(oracle.score(table.rules[ft.kept[r]], ft.normalized[r]));
  return s;
}

/// Positions within `subset` sorted by descending score; ties keep order.
inline std::vector<std::size_t> order_by_scores(const std::vector<double>& scores,
                                                const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> pos(subset.size());
  std::iota(pos.begin(), pos.end(), 0);
  std::stable_sort(pos.begin(), pos.end(),
                   [&](std::size_t a, std::size_t b) { return scores[subset[a]] > scores[subset[b]]; });
  return pos;
}

/// The additivity k whose augmented dimension over d criteria equals D.
inline std::optional<int> order_for_dimension(int d, std::size_t D) {
  for (int k = 1; k <= d; ++k)
    if (SubsetIndex(d, k).size() == D) return k;
  return std::nullopt;
}

template <class T>
std::vector<T> select_rows(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v.at(i));
  return out;
}

}  // namespace vsrank
