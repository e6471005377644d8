#pragma once

// k-additive Choquet integral in Moebius form.
//
// A capacity is stored as its Moebius coefficients m(A) for every subset
// A of the d criteria with 1 <= |A| <= k. Evaluation is a dot product with the
// augmented vector of subset minima, so the capacity polytope and every
// pairwise preference live in the same D-dimensional space.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vsrank/constraints.hpp"
#include "vsrank/core.hpp"

namespace vsrank {

/// Canonical enumeration of subsets 1 <= |A| <= k of {0..d-1}: by size, then
/// lexicographically. Singleton {i} sits at position i.
class SubsetIndex {
 public:
  static constexpr int max_criteria = 20;

  SubsetIndex() = default;
  SubsetIndex(int d, int k) : d_(d), k_(k) {
    if (d < 1 || d > max_criteria) throw Error("SubsetIndex: d must be in [1, 20]");
    if (k < 1 || k > d) throw Error("SubsetIndex: k must be in [1, d]");
    position_.assign(std::size_t{1} << d, -1);
    for (int size = 1; size <= k; ++size) {
      std::vector<int> comb(static_cast<std::size_t>(size));
      for (int i = 0; i < size; ++i) comb[static_cast<std::size_t>(i)] = i;
      while (true) {
        std::uint32_t mask = 0;
        for (int e : comb) mask |= std::uint32_t{1} << e;
        position_[mask] = static_cast<int>(masks_.size());
        masks_.push_back(mask);
        // next combination in lexicographic order
        int i = size - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == d - size + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size; ++j)
          comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  }

  int criteria() const { return d_; }
  int order() const { return k_; }
  std::size_t size() const { return masks_.size(); }
  std::uint32_t mask(std::size_t pos) const { return masks_.at(pos); }
  const std::vector<std::uint32_t>& masks() const { return masks_; }

  /// Position of a subset, or -1 when |A| > k or A is empty.
  int position(std::uint32_t mask) const {
    return mask < position_.size() ? position_[mask] : -1;
  }

  /// k <= 3 is the well-exercised range; larger orders work but are untested.
  bool beyond_tested_order() const { return k_ > 3; }

  /// "1,2" style key with 1-based ascending ids.
  std::string key(std::size_t pos) const {
    std::string out;
    const std::uint32_t m = mask(pos);
    for (int i = 0; i < d_; ++i) {
      if (!(m & (std::uint32_t{1} << i))) continue;
      if (!out.empty()) out += ',';
      out += std::to_string(i + 1);
    }
    return out;
  }

  friend bool operator==(const SubsetIndex& a, const SubsetIndex& b) {
    return a.d_ == b.d_ && a.k_ == b.k_;
  }

 private:
  int d_ = 0;
  int k_ = 0;
  std::vector<std::uint32_t> masks_;
  std::vector<int> position_;
};

struct MobiusCapacity {
  SubsetIndex index;
  Vec coeffs;

  double sum() const { return std::accumulate(coeffs.begin(), coeffs.end(), 0.0); }
};

/// values[A] = min over i in A of f_i, in canonical order.
inline Vec augment(std::span<const double> f, const SubsetIndex& index) {
  if (f.size() != static_cast<std::size_t>(index.criteria()))
    throw Error("augment: feature vector has length " + std::to_string(f.size()) + ", expected " +
                std::to_string(index.criteria()));
  Vec out(index.size());
  const int d = index.criteria();
  for (std::size_t p = 0; p < index.size(); ++p) {
    const std::uint32_t m = index.mask(p);
    double v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i)
      if (m & (std::uint32_t{1} << i)) v = std::min(v, f[static_cast<std::size_t>(i)]);
    out[p] = v;
  }
  return out;
}

inline double choquet_eval(const MobiusCapacity& m, std::span<const double> f) {
  if (m.coeffs.size() != m.index.size()) throw Error("choquet_eval: capacity size mismatch");
  const Vec psi = augment(f, m.index);
  return dot(m.coeffs, psi);
}

/// Monotonicity rows sum_{T subset S, |T| <= k-1} m(T + {i}) >= 0 for every i and
/// S not containing i, stored as <= rows, with exact duplicates removed; plus
/// the normalization equality sum m(A) = 1.
inline ConstraintSystem capacity_constraints(const SubsetIndex& index) {
  const int d = index.criteria();
  const int k = index.order();
  const std::size_t D = index.size();
  ConstraintSystem cs;
  cs.dim = D;
  std::set<Vec> seen;
  for (int i = 0; i < d; ++i) {
    const std::uint32_t bit_i = std::uint32_t{1} << i;
    const std::uint32_t others = ((std::uint32_t{1} << d) - 1) & ~bit_i;
    // enumerate S over subsets of `others` in increasing mask order
    for (std::uint32_t s = 0;; s = (s - others) & others) {
      Vec row(D, 0.0);
      // T ranges over subsets of S with |T| <= k-1
      for (std::uint32_t t = s;; t = (t - 1) & s) {
        if (std::popcount(t) <= k - 1) {
          const int pos = index.position(t | bit_i);
          row[static_cast<std::size_t>(pos)] += 1.0;
        }
        if (t == 0) break;
      }
      if (seen.insert(row).second) {
        Vec neg(D);
        for (std::size_t j = 0; j < D; ++j) neg[j] = row[j] == 0.0 ? 0.0 : -row[j];
        cs.add_inequality({std::move(neg), 0.0, {Provenance::Kind::capacity, 0}});
      }
      if (s == others) break;
    }
  }
  cs.add_equality({Vec(D, 1.0), 1.0, {Provenance::Kind::capacity, 0}});
  return cs;
}

/// Half-space from a pairwise answer: +1 means the first rule is preferred,
/// i.e. <w, psi_i - psi_j> >= margin. Returned in <= form.
inline LinearRow preference_constraint(std::span<const double> psi_i, std::span<const double> psi_j,
                                       int answer, int iteration = 0, double margin = 0.0) {
  if (answer != 1 && answer != -1) throw Error("preference_constraint: answer must be +1 or -1");
  if (psi_i.size() != psi_j.size()) throw Error("preference_constraint: dimension mismatch");
  if (std::equal(psi_i.begin(), psi_i.end(), psi_j.begin()))
    throw Error("preference_constraint: identical vectors give a vacuous constraint");
  Vec row(psi_i.size());
  // answer=+1: -(psi_i - psi_j) . w <= -margin
  for (std::size_t a = 0; a < row.size(); ++a) row[a] = -answer * (psi_i[a] - psi_j[a]);
  return {std::move(row), -margin, {Provenance::Kind::preference, iteration}};
}

}  // namespace vsrank
