#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "vsrank/core.hpp"

namespace vsrank {

struct Provenance {
  enum class Kind { capacity, preference };
  Kind kind = Kind::capacity;
  int iteration = 0;  // preference rows only

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LinearRow {
  Vec coeffs;
  double rhs = 0.0;
  Provenance provenance;
};

/// Equalities <a,w> = b and inequalities <c,w> <= d over capacity space.
struct ConstraintSystem {
  std::size_t dim = 0;
  std::vector<LinearRow> equalities;
  std::vector<LinearRow> inequalities;

  void add_equality(LinearRow row) {
    check(row);
    equalities.push_back(std::move(row));
  }
  void add_inequality(LinearRow row) {
    check(row);
    inequalities.push_back(std::move(row));
  }

  std::size_t preference_count() const {
    std::size_t n = 0;
    for (const auto& r : inequalities)
      if (r.provenance.kind == Provenance::Kind::preference) ++n;
    return n;
  }

  /// Largest violation of any row at w (0 when w satisfies everything).
  double max_violation(std::span<const double> w) const {
    double worst = 0.0;
    for (const auto& r : equalities) worst = std::max(worst, std::abs(dot(r.coeffs, w) - r.rhs));
    for (const auto& r : inequalities) worst = std::max(worst, dot(r.coeffs, w) - r.rhs);
    return worst;
  }

 private:
  void check(const LinearRow& row) const {
    if (row.coeffs.size() != dim) throw Error("constraint row has dimension " +
                                              std::to_string(row.coeffs.size()) + ", expected " +
                                              std::to_string(dim));
  }
};

}  // namespace vsrank
