#pragma once

// Interestingness measures on 2x2 contingency tables, the surprise score, and
// the min-max normalized rule feature matrix.
//
// Cells: a = n_xy, b = n_x - n_xy, c = n_y - n_xy, e = n - n_x - n_y + n_xy.
// Degenerate denominators evaluate to 0 so every feature stays finite.

#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vsrank/corpus.hpp"

namespace vsrank {

enum class MeasureKind { yules_q, cosine, gk_tau, added_value, certainty_factor, phi };

inline std::string_view to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::yules_q: return "yules_q";
    case MeasureKind::cosine: return "cosine";
    case MeasureKind::gk_tau: return "gk_tau";
    case MeasureKind::added_value: return "added_value";
    case MeasureKind::certainty_factor: return "certainty_factor";
    case MeasureKind::phi: return "phi";
  }
  return "?";
}

inline std::optional<MeasureKind> parse_measure(std::string_view s) {
  for (auto k : {MeasureKind::yules_q, MeasureKind::cosine, MeasureKind::gk_tau, MeasureKind::added_value,
                 MeasureKind::certainty_factor, MeasureKind::phi})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// The five learner features; phi is reserved for the oracle.
inline const std::vector<MeasureKind>& default_features() {
  static const std::vector<MeasureKind> kinds = {MeasureKind::yules_q, MeasureKind::cosine, MeasureKind::gk_tau,
                                                 MeasureKind::added_value, MeasureKind::certainty_factor};
  return kinds;
}

inline double compute_measure(const ContingencyCounts& t, MeasureKind kind) {
  if (t.n == 0) throw Error("compute_measure: empty table (n = 0)");
  if (!t.valid()) throw Error("compute_measure: inconsistent contingency counts");
  const double n = static_cast<double>(t.n);
  const double a = static_cast<double>(t.n_xy);
  const double b = static_cast<double>(t.n_x - t.n_xy);
  const double c = static_cast<double>(t.n_y - t.n_xy);
  const double e = static_cast<double>(t.n - t.n_x - t.n_y + t.n_xy);
  const double px = static_cast<double>(t.n_x) / n;
  const double py = static_cast<double>(t.n_y) / n;
  const double conf = t.n_x == 0 ? 0.0 : a / static_cast<double>(t.n_x);

  switch (kind) {
    case MeasureKind::yules_q: {
      const double den = a * e + b * c;
      return den == 0.0 ? 0.0 : (a * e - b * c) / den;
    }
    case MeasureKind::cosine: {
      const double den = static_cast<double>(t.n_x) * static_cast<double>(t.n_y);
      return den == 0.0 ? 0.0 : a / std::sqrt(den);
    }
    case MeasureKind::gk_tau: {
      // rows X / not X, columns Y / not Y
      const double cells[2][2] = {{a / n, b / n}, {c / n, e / n}};
      const double rows[2] = {px, 1.0 - px};
      const double col_sq = py * py + (1.0 - py) * (1.0 - py);
      double s = 0.0;
      for (int i = 0; i < 2; ++i) {
        if (rows[i] <= 0.0) continue;
        s += (cells[i][0] * cells[i][0] + cells[i][1] * cells[i][1]) / rows[i];
      }
      const double den = 1.0 - col_sq;
      return den <= 0.0 ? 0.0 : (s - col_sq) / den;
    }
    case MeasureKind::added_value:
      return conf - py;
    case MeasureKind::certainty_factor: {
      if (py <= 0.0 || py >= 1.0) return 0.0;
      if (conf > py) return (conf - py) / (1.0 - py);
      if (conf < py) return (conf - py) / py;
      return 0.0;
    }
    case MeasureKind::phi: {
      // (n n_xy - n_x n_y) / sqrt(n_x n_y (n - n_x)(n - n_y)); numerator in integers
      const long double cov = static_cast<long double>(t.n) * static_cast<long double>(t.n_xy) -
                              static_cast<long double>(t.n_x) * static_cast<long double>(t.n_y);
      const double den = std::sqrt(static_cast<double>(t.n_x) * static_cast<double>(t.n_y) *
                                   static_cast<double>(t.n - t.n_x) * static_cast<double>(t.n - t.n_y));
      return den == 0.0 ? 0.0 : static_cast<double>(cov) / den;
    }
  }
  throw Error("compute_measure: unknown measure");
}

/// log2(f_obs / (n * prod p_i)) over the items of the rule.
inline double surprise_score(const std::map<Item, std::size_t>& item_counts, std::size_t n, const Rule& rule) {
  if (n == 0) throw Error("surprise_score: empty database");
  const double f_obs = static_cast<double>(rule.counts.n_xy);
  if (f_obs <= 0.0) throw Error("surprise_score: rule never occurs (f_obs = 0)");
  double log_exp = std::log2(static_cast<double>(n));
  for (Item i : rule.items()) {
    auto it = item_counts.find(i);
    if (it == item_counts.end() || it->second == 0)
      throw Error("surprise_score: item " + std::to_string(i) + " does not occur");
    log_exp += std::log2(static_cast<double>(it->second) / static_cast<double>(n));
  }
  return std::log2(f_obs) - log_exp;
}

inline double surprise_score(const TransactionDatabase& db, const Rule& rule) {
  return surprise_score(db.item_counts, db.size(), rule);
}

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<Vec> raw;               // one row per surviving rule
  std::vector<Vec> normalized;        // min-max scaled to [0, 1]
  std::vector<std::size_t> kept;      // surviving row -> input rule index
  std::vector<bool> constant_column;  // normalized to 0.5

  std::size_t rows() const { return raw.size(); }
  std::size_t dim() const { return names.size(); }
};

namespace detail {

inline std::string dedup_key(const Vec& v) {
  std::string key;
  char buf[64];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.12f|", x);
    key += buf;
  }
  return key;
}

}  // namespace detail

/// Deduplicates identical raw rows (first occurrence wins) and min-max
/// normalizes each column over the survivors.
inline FeatureTable normalize_features(const std::vector<Vec>& raw, std::vector<std::string> names) {
  if (raw.empty()) throw Error("feature_matrix: no rules");
  if (names.empty()) throw Error("feature_matrix: no measures");
  FeatureTable ft;
  ft.names = std::move(names);
  const std::size_t d = ft.names.size();
  std::set<std::string> seen;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (raw[r].size() != d) throw Error("feature_matrix: row " + std::to_string(r) + " has wrong width");
    for (double v : raw[r])
      if (!std::isfinite(v)) throw Error("feature_matrix: non-finite value in row " + std::to_string(r));
    if (!seen.insert(detail::dedup_key(raw[r])).second) continue;
    ft.raw.push_back(raw[r]);
    ft.kept.push_back(r);
  }
  ft.constant_column.assign(d, false);
  ft.normalized.assign(ft.raw.size(), Vec(d, 0.0));
  for (std::size_t j = 0; j < d; ++j) {
    double lo = ft.raw[0][j], hi = ft.raw[0][j];
    for (const auto& row : ft.raw) {
      lo = std::min(lo, row[j]);
      hi = std::max(hi, row[j]);
    }
    ft.constant_column[j] = !(hi > lo);
    for (std::size_t r = 0; r < ft.raw.size(); ++r)
      ft.normalized[r][j] = ft.constant_column[j] ? 0.5 : (ft.raw[r][j] - lo) / (hi - lo);
  }
  return ft;
}

inline FeatureTable feature_matrix(const std::vector<Rule>& rules, const std::vector<MeasureKind>& kinds) {
  std::vector<Vec> raw;
  raw.reserve(rules.size());
  for (const auto& r : rules) {
    Vec row;
    row.reserve(kinds.size());
    for (auto k : kinds) row.push_back(compute_measure(r.counts, k));
    raw.push_back(std::move(row));
  }
  std::vector<std::string> names;
  for (auto k : kinds) names.emplace_back(to_string(k));
  return normalize_features(raw, std::move(names));
}

// ---------------------------------------------------------------------------
// Rule-feature CSV:
//   antecedent,consequent,n,n_x,n_y,n_xy,<measure names...>
// Itemsets are ';'-joined ids; values are written with 17 significant digits.

struct RuleTable {
  std::vector<Rule> rules;
  std::vector<std::string> measure_names;
  std::vector<Vec> values;  // raw measure values, one row per rule
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_itemset(const Itemset& s) {
  std::string out;
  for (Item i : s) {
    if (!out.empty()) out += ';';
    out += std::to_string(i);
  }
  return out;
}

inline RuleTable make_rule_table(std::vector<Rule> rules, const std::vector<MeasureKind>& kinds) {
  RuleTable t;
  for (auto k : kinds) t.measure_names.emplace_back(to_string(k));
  for (const auto& r : rules) {
    Vec row;
    for (auto k : kinds) row.push_back(compute_measure(r.counts, k));
    t.values.push_back(std::move(row));
  }
  t.rules = std::move(rules);
  return t;
}

inline void write_rules_csv(std::ostream& out, const RuleTable& t) {
  out << "antecedent,consequent,n,n_x,n_y,n_xy";
  for (const auto& name : t.measure_names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < t.rules.size(); ++r) {
    const Rule& rule = t.rules[r];
    out << format_itemset(rule.antecedent) << ',' << format_itemset(rule.consequent) << ',' << rule.counts.n
        << ',' << rule.counts.n_x << ',' << rule.counts.n_y << ',' << rule.counts.n_xy;
    for (double v : t.values[r]) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::size_t parse_count(const std::string& s, std::size_t line) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ParseError("expected a non-negative integer, got '" + s + "'", line);
  return static_cast<std::size_t>(std::stoull(s));
}

inline Itemset parse_itemset(const std::string& s, std::size_t line) {
  Itemset out;
  for (const auto& tok : split(s, ';')) out.push_back(static_cast<Item>(parse_count(tok, line)));
  return normalize_itemset(std::move(out));
}

}  // namespace detail

inline RuleTable read_rules_csv(std::istream& in) {
  RuleTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty rule CSV", 1);
  const auto header = detail::split(line, ',');
  static const std::vector<std::string> fixed = {"antecedent", "consequent", "n", "n_x", "n_y", "n_xy"};
  if (header.size() < fixed.size() + 1 || !std::equal(fixed.begin(), fixed.end(), header.begin()))
    throw ParseError("rule CSV header must start with antecedent,consequent,n,n_x,n_y,n_xy and name >= 1 measure", 1);
  t.measure_names.assign(header.begin() + static_cast<std::ptrdiff_t>(fixed.size()), header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, got " + std::to_string(cols.size()),
                       line_no);
    Rule r;
    r.antecedent = detail::parse_itemset(cols[0], line_no);
    r.consequent = detail::parse_itemset(cols[1], line_no);
    r.counts = {detail::parse_count(cols[2], line_no), detail::parse_count(cols[3], line_no),
                detail::parse_count(cols[4], line_no), detail::parse_count(cols[5], line_no)};
    if (!r.counts.valid()) throw ParseError("inconsistent contingency counts", line_no);
    Vec vals;
    for (std::size_t j = fixed.size(); j < cols.size(); ++j) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cols[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cols[j].size()) throw ParseError("invalid number '" + cols[j] + "'", line_no);
      vals.push_back(v);
    }
    t.rules.push_back(std::move(r));
    t.values.push_back(std::move(vals));
  }
  return t;
}

}  // namespace vsrank
