#pragma once

// Ranking metrics, top-k cover diversity and constraint-orientation angles.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vsrank/corpus.hpp"
#include "vsrank/learner.hpp"

namespace vsrank {

/// |top-k(learned) ∩ top-k(oracle)| / k.
inline double precision_at_k(const std::vector<std::size_t>& learned, const std::vector<std::size_t>& oracle,
                             std::size_t k) {
  if (k == 0) throw Error("precision_at_k: k must be >= 1");
  if (k > learned.size() || k > oracle.size()) throw Error("precision_at_k: k exceeds the list length");
  const std::set<std::size_t> top(oracle.begin(), oracle.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t hit = 0;
  for (std::size_t r = 0; r < k; ++r) hit += top.count(learned[r]);
  return static_cast<double>(hit) / static_cast<double>(k);
}

/// Transactions (by position) containing every item of `s`.
inline std::vector<std::uint32_t> cover(const TransactionDatabase& db, const Itemset& s) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t t = 0; t < db.transactions.size(); ++t) {
    const auto& tr = db.transactions[t];
    if (std::includes(tr.begin(), tr.end(), s.begin(), s.end())) out.push_back(t);
  }
  return out;
}

/// |a ∧ b| / |a ∨ b| over sorted cover lists; 0 when both are empty.
inline double jaccard(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const std::size_t uni = a.size() + b.size() - both.size();
  return uni == 0 ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(uni);
}

inline double jaccard(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw Error("jaccard: cover vectors differ in length");
  std::size_t inter = 0, uni = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    inter += a[t] && b[t];
    uni += a[t] || b[t];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct JaccardPair {
  std::size_t a = 0, b = 0;  // rule ids
  double value = 0.0;
  bool zero_cover = false;
};

/// Pairwise Jaccard similarity of the covers of X ∪ Y over the learned top-k.
inline std::vector<JaccardPair> jaccard_topk_diversity(const TransactionDatabase& db, const std::vector<Rule>& rules,
                                                       const std::vector<std::size_t>& learned, std::size_t k = 15) {
  if (k > learned.size()) throw Error("jaccard_topk_diversity: k exceeds the ranking length");
  std::vector<std::vector<std::uint32_t>> covers;
  for (std::size_t r = 0; r < k; ++r) covers.push_back(cover(db, rules.at(learned[r]).items()));
  std::vector<JaccardPair> out;
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = x + 1; y < k; ++y) {
      JaccardPair p{learned[x], learned[y], 0.0, covers[x].empty() || covers[y].empty()};
      if (!p.zero_cover) p.value = jaccard(covers[x], covers[y]);
      out.push_back(p);
    }
  return out;
}

struct ReducedRow {
  Vec a;
  double b = 0.0;
};

/// Eliminates the last augmented coordinate through the normalization
/// equality: a_i = h_i - h_D, b = -h_D.
inline ReducedRow reduce_constraint(std::span<const double> h) {
  if (h.size() < 2) throw Error("reduce_constraint: need at least 2 coordinates");
  ReducedRow r;
  const double last = h.back();
  for (std::size_t i = 0; i + 1 < h.size(); ++i) r.a.push_back(h[i] - last);
  r.b = -last;
  return r;
}

struct AngleReport {
  std::vector<double> angles;       // radians, all pairs of kept rows
  std::vector<std::size_t> skipped;  // rows whose reduced normal vanished
};

inline AngleReport constraint_angles(const std::vector<Vec>& rows) {
  if (rows.size() < 2) throw Error("constraint_angles: need at least 2 rows");
  AngleReport rep;
  std::vector<Vec> normals;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Vec a = reduce_constraint(rows[r]).a;
    const double n = norm2(a);
    if (n == 0.0) {
      rep.skipped.push_back(r);
      continue;
    }
    for (double& v : a) v /= n;
    normals.push_back(std::move(a));
  }
  for (std::size_t x = 0; x < normals.size(); ++x)
    for (std::size_t y = x + 1; y < normals.size(); ++y)
      rep.angles.push_back(std::acos(std::clamp(dot(normals[x], normals[y]), -1.0, 1.0)));
  return rep;
}

/// Linear-interpolated quantile of sorted values.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("quantile of an empty list");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile(v, 0.5);
}

// ---------------------------------------------------------------------------
// Convergence tables

struct SessionLog {
  std::string seed = "0";
  std::string fold = "0";
  std::vector<IterationRecord> records;
};

/// What precision is measured against: candidates in augmented space and the
/// oracle's order over them, both by local position.
struct EvalTarget {
  std::vector<Vec> psi;
  std::vector<std::size_t> oracle_order;
};

struct MetricRow {
  int iteration = 0;
  std::string metric;
  std::optional<std::size_t> cutoff;
  double value = 0.0;
  std::string seed;
  std::string fold;
};

struct ReportOptions {
  std::vector<std::size_t> cutoffs = {5, 10, 15};
  bool aggregate = true;
};

/// Per-iteration metric rows for each log, then mean and median rows over
/// logs (seed = "mean" / "median", fold = "all") when there is more than one.
/// `targets[l]` is the evaluation target of log l (omitted metrics when
/// absent); `query_rows[l]` the augmented preference rows of log l in
/// iteration order (angles omitted when absent).
inline std::vector<MetricRow> convergence_report(const std::vector<SessionLog>& logs,
                                                 const std::vector<std::optional<EvalTarget>>& targets,
                                                 const std::vector<std::vector<Vec>>& query_rows,
                                                 const ReportOptions& opt = {}) {
  if (logs.empty()) throw Error("convergence_report: no logs");
  std::vector<MetricRow> rows;
  for (std::size_t l = 0; l < logs.size(); ++l) {
    const auto& log = logs[l];
    const EvalTarget* target = l < targets.size() && targets[l] ? &*targets[l] : nullptr;
    const std::vector<Vec>* hs = l < query_rows.size() && !query_rows[l].empty() ? &query_rows[l] : nullptr;
    std::vector<double> angles;  // kept sorted
    std::vector<Vec> normals;
    for (std::size_t r = 0; r < log.records.size(); ++r) {
      const auto& rec = log.records[r];
      auto emit = [&](std::string metric, std::optional<std::size_t> cutoff, double value) {
        rows.push_back({rec.iteration, std::move(metric), cutoff, value, log.seed, log.fold});
      };
      emit("r_max", std::nullopt, rec.r_max);
      emit("wall_ms", std::nullopt, rec.duration_ms);
      if (target && !target->psi.empty()) {
        std::vector<std::size_t> learned(target->psi.size());
        std::vector<double> s;
        for (const auto& p : target->psi) s.push_back(dot(rec.center, p));
        for (std::size_t i = 0; i < learned.size(); ++i) learned[i] = i;
        std::stable_sort(learned.begin(), learned.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
        for (std::size_t k : opt.cutoffs)
          if (k >= 1 && k <= learned.size()) emit("precision", k, precision_at_k(learned, target->oracle_order, k));
      }
      if (hs && r < hs->size()) {
        if (rec.answer != 0) {
          Vec a = reduce_constraint((*hs)[r]).a;
          const double n = norm2(a);
          if (n > 0.0) {
            for (double& v : a) v /= n;
            std::vector<double> fresh;
            for (const auto& prev : normals) fresh.push_back(std::acos(std::clamp(dot(prev, a), -1.0, 1.0)));
            normals.push_back(std::move(a));
            std::sort(fresh.begin(), fresh.end());
            const auto mid = angles.size();
            angles.insert(angles.end(), fresh.begin(), fresh.end());
            std::inplace_merge(angles.begin(), angles.begin() + static_cast<std::ptrdiff_t>(mid), angles.end());
          }
        }
        if (!angles.empty()) {
          emit("angle_q10", std::nullopt, quantile(angles, 0.1));
          emit("angle_median", std::nullopt, quantile(angles, 0.5));
          emit("angle_q90", std::nullopt, quantile(angles, 0.9));
        }
      }
    }
  }
  if (!opt.aggregate || logs.size() < 2) return rows;

  std::map<std::tuple<int, std::string, std::optional<std::size_t>>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.iteration, r.metric, r.cutoff}].push_back(r.value);
  for (const auto& [key, vals] : groups) {
    const auto& [it, metric, cutoff] = key;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    rows.push_back({it, metric, cutoff, mean, "mean", "all"});
    rows.push_back({it, metric, cutoff, median(vals), "median", "all"});
  }
  return rows;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "iteration,metric,cutoff,value,seed,fold\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.metric << ',';
    if (r.cutoff) out << *r.cutoff;
    out << ',' << format_double(r.value) << ',' << r.seed << ',' << r.fold << '\n';
  }
}

}  // namespace vsrank
