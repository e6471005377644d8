#pragma once

// Transaction databases, association-rule mining and 2x2 contingency counts.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vsrank/core.hpp"

namespace vsrank {

using Item = std::uint32_t;
using Itemset = std::vector<Item>;  // sorted, unique

struct TransactionDatabase {
  std::vector<Itemset> transactions;
  std::map<Item, std::size_t> item_counts;

  std::size_t size() const { return transactions.size(); }
  std::size_t count(Item i) const {
    auto it = item_counts.find(i);
    return it == item_counts.end() ? 0 : it->second;
  }

  /// Number of transactions containing every item of `s`.
  std::size_t frequency(const Itemset& s) const {
    std::size_t f = 0;
    for (const auto& t : transactions)
      if (std::includes(t.begin(), t.end(), s.begin(), s.end())) ++f;
    return f;
  }
};

struct ContingencyCounts {
  std::size_t n = 0;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::size_t n_xy = 0;

  bool valid() const {
    return n_xy <= std::min(n_x, n_y) && std::max(n_x, n_y) <= n && n_x + n_y - n_xy <= n;
  }
  double confidence() const { return n_x == 0 ? 0.0 : static_cast<double>(n_xy) / static_cast<double>(n_x); }

  friend bool operator==(const ContingencyCounts&, const ContingencyCounts&) = default;
};

struct Rule {
  Itemset antecedent;
  Itemset consequent;
  ContingencyCounts counts;

  Itemset items() const {
    Itemset all;
    std::set_union(antecedent.begin(), antecedent.end(), consequent.begin(), consequent.end(),
                   std::back_inserter(all));
    return all;
  }
};

inline Itemset normalize_itemset(Itemset s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// FIMI text: one transaction per nonempty line, whitespace-separated ids.
inline TransactionDatabase load_transactions(std::istream& in) {
  TransactionDatabase db;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string tok;
    Itemset t;
    while (tokens >> tok) {
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ParseError("invalid item id '" + tok + "'", line_no);
      unsigned long long v = 0;
      try {
        v = std::stoull(tok);
      } catch (const std::out_of_range&) {
        throw ParseError("item id out of range '" + tok + "'", line_no);
      }
      if (v > UINT32_MAX) throw ParseError("item id out of range '" + tok + "'", line_no);
      t.push_back(static_cast<Item>(v));
    }
    if (t.empty()) continue;
    t = normalize_itemset(std::move(t));
    for (Item i : t) ++db.item_counts[i];
    db.transactions.push_back(std::move(t));
  }
  if (db.transactions.empty()) throw ParseError("no transactions in input", line_no);
  return db;
}

inline TransactionDatabase load_transactions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open transaction file: " + path);
  return load_transactions(in);
}

inline ContingencyCounts contingency(const TransactionDatabase& db, const Itemset& antecedent,
                                     const Itemset& consequent) {
  const Itemset x = normalize_itemset(antecedent);
  const Itemset y = normalize_itemset(consequent);
  if (x.empty() || y.empty()) throw Error("contingency: itemsets must be nonempty");
  Itemset common;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
  if (!common.empty()) throw Error("contingency: antecedent and consequent overlap");
  ContingencyCounts c;
  c.n = db.size();
  for (const auto& t : db.transactions) {
    const bool hx = std::includes(t.begin(), t.end(), x.begin(), x.end());
    const bool hy = std::includes(t.begin(), t.end(), y.begin(), y.end());
    c.n_x += hx;
    c.n_y += hy;
    c.n_xy += hx && hy;
  }
  return c;
}

struct MiningOptions {
  std::size_t min_support = 10;
  double min_confidence = 0.99;
  std::size_t max_rules = 100000;
  std::size_t max_length = 0;  // itemset length cap; 0 = none
};

namespace detail {

using Tidset = std::vector<std::uint32_t>;

inline Tidset intersect(const Tidset& a, const Tidset& b) {
  Tidset out;
  out.reserve(std::min(a.size(), b.size()));
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Depth-first tidset intersection; every frequent itemset lands in `out`.
inline void eclat(const Itemset& prefix, const std::vector<std::pair<Item, Tidset>>& tail,
                  const MiningOptions& opt, std::map<Itemset, std::size_t>& out) {
  for (std::size_t i = 0; i < tail.size(); ++i) {
    Itemset next = prefix;
    next.push_back(tail[i].first);
    out.emplace(next, tail[i].second.size());
    if (opt.max_length != 0 && next.size() >= opt.max_length) continue;
    std::vector<std::pair<Item, Tidset>> ext;
    for (std::size_t j = i + 1; j < tail.size(); ++j) {
      Tidset t = intersect(tail[i].second, tail[j].second);
      if (t.size() >= opt.min_support) ext.emplace_back(tail[j].first, std::move(t));
    }
    if (!ext.empty()) eclat(next, ext, opt, out);
  }
}

}  // namespace detail

/// Rules X => {y} with support >= min_support and confidence >= min_confidence,
/// sorted by descending support then (antecedent, consequent), truncated.
inline std::vector<Rule> mine_rules(const TransactionDatabase& db, const MiningOptions& opt) {
  if (opt.min_support < 1) throw Error("mine_rules: min_support must be >= 1");
  if (!(opt.min_confidence > 0.0 && opt.min_confidence <= 1.0))
    throw Error("mine_rules: min_confidence must be in (0, 1]");

  std::map<Item, detail::Tidset> vertical;
  for (std::uint32_t tid = 0; tid < db.transactions.size(); ++tid)
    for (Item i : db.transactions[tid]) vertical[i].push_back(tid);
  std::vector<std::pair<Item, detail::Tidset>> roots;
  for (auto& [item, tids] : vertical)
    if (tids.size() >= opt.min_support) roots.emplace_back(item, std::move(tids));

  std::map<Itemset, std::size_t> frequent;
  detail::eclat({}, roots, opt, frequent);

  std::vector<Rule> rules;
  for (const auto& [z, support] : frequent) {
    if (z.size() < 2) continue;
    for (std::size_t drop = 0; drop < z.size(); ++drop) {
      Itemset x;
      for (std::size_t j = 0; j < z.size(); ++j)
        if (j != drop) x.push_back(z[j]);
      const std::size_t n_x = frequent.at(x);
      if (static_cast<double>(support) / static_cast<double>(n_x) < opt.min_confidence) continue;
      Rule r;
      r.antecedent = std::move(x);
      r.consequent = {z[drop]};
      r.counts = {db.size(), n_x, db.count(z[drop]), support};
      rules.push_back(std::move(r));
    }
  }
  std::sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
    if (a.counts.n_xy != b.counts.n_xy) return a.counts.n_xy > b.counts.n_xy;
    if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
    return a.consequent < b.consequent;
  });
  if (rules.size() > opt.max_rules) rules.resize(opt.max_rules);
  return rules;
}

}  // namespace vsrank
