#pragma once

// The version space: capacities consistent with the monotonicity and
// normalization rows plus every answered comparison. Centers and cut checks
// are small linear programs over it.

#include <algorithm>
#include <optional>
#include <string>

#include "vsrank/choquet.hpp"
#include "vsrank/constraints.hpp"
#include "vsrank/lp.hpp"

namespace vsrank {

enum class CenterKind { chebyshev, minkowski };

inline std::string_view to_string(CenterKind k) {
  return k == CenterKind::chebyshev ? "chebyshev" : "minkowski";
}

struct CenterEstimate {
  CenterKind kind = CenterKind::chebyshev;
  Vec point;
  double radius = 0.0;
  std::optional<double> symmetry;  // Minkowski lambda*
};

/// Thin adapter from a ConstraintSystem to the LP facility.
inline lp::Solution solve_lp(const ConstraintSystem& vs, const Vec& objective) {
  lp::Problem p;
  p.num_vars = vs.dim;
  p.objective = objective;
  for (const auto& r : vs.equalities) p.add_equality(r.coeffs, r.rhs);
  for (const auto& r : vs.inequalities) p.add_inequality(r.coeffs, r.rhs);
  return lp::solve(p);
}

inline ConstraintSystem init_version_space(const SubsetIndex& index) {
  return capacity_constraints(index);
}

inline ConstraintSystem add_preference(ConstraintSystem vs, LinearRow row, int iteration) {
  row.provenance = {Provenance::Kind::preference, iteration};
  vs.add_inequality(std::move(row));
  return vs;
}

namespace detail {

[[noreturn]] inline void raise_status(lp::Status s, const char* what) {
  if (s == lp::Status::infeasible)
    throw InfeasibleVersionSpace(std::string(what) + ": version space is empty");
  throw Error(std::string(what) + ": LP returned " + std::string(lp::to_string(s)));
}

}  // namespace detail

/// min over inequality rows of (d_i - <c_i, c>) / ||c_i||, clamped at 0.
inline double inscribed_radius(const ConstraintSystem& vs, std::span<const double> c,
                               double tolerance = 1e-7) {
  if (c.size() != vs.dim) throw Error("inscribed_radius: dimension mismatch");
  if (vs.max_violation(c) > tolerance) throw Error("inscribed_radius: point is outside the version space");
  double r = std::numeric_limits<double>::infinity();
  for (const auto& row : vs.inequalities) {
    const double nrm = norm2(row.coeffs);
    if (nrm == 0.0) continue;
    r = std::min(r, (row.rhs - dot(row.coeffs, c)) / nrm);
  }
  if (!std::isfinite(r)) return 0.0;  // no inequality rows: unbounded ball, report 0
  return std::max(0.0, r);
}

/// Largest Euclidean ball inside the inequalities, center kept on the equalities.
inline CenterEstimate chebyshev_center(const ConstraintSystem& vs) {
  const std::size_t D = vs.dim;
  lp::Problem p;
  p.num_vars = D + 1;
  p.objective.assign(D + 1, 0.0);
  p.objective[D] = 1.0;
  for (const auto& r : vs.equalities) {
    Vec row = r.coeffs;
    row.push_back(0.0);
    p.add_equality(std::move(row), r.rhs);
  }
  for (const auto& r : vs.inequalities) {
    Vec row = r.coeffs;
    row.push_back(norm2(r.coeffs));
    p.add_inequality(std::move(row), r.rhs);
  }
  Vec nonneg(D + 1, 0.0);
  nonneg[D] = -1.0;
  p.add_inequality(std::move(nonneg), 0.0);

  const lp::Solution sol = lp::solve(p);
  if (sol.status != lp::Status::optimal) detail::raise_status(sol.status, "chebyshev_center");
  CenterEstimate out;
  out.kind = CenterKind::chebyshev;
  out.point.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(D));
  out.radius = std::max(0.0, sol.x[D]);
  return out;
}

/// Minkowski center: facet minima delta_i = min <c_i, y> over the polytope,
/// then max lambda s.t. A w = (1+lambda) b, C w - lambda delta <= d, lambda >= 0;
/// the center is w / (1 + lambda).
inline CenterEstimate minkowski_center(const ConstraintSystem& vs) {
  const std::size_t D = vs.dim;
  Vec delta(vs.inequalities.size());
  for (std::size_t i = 0; i < vs.inequalities.size(); ++i) {
    Vec neg = vs.inequalities[i].coeffs;
    for (double& v : neg) v = -v;
    const lp::Solution s = solve_lp(vs, neg);
    if (s.status != lp::Status::optimal) detail::raise_status(s.status, "minkowski_center (facet minimum)");
    delta[i] = -s.value;
  }

  lp::Problem p;
  p.num_vars = D + 1;
  p.objective.assign(D + 1, 0.0);
  p.objective[D] = 1.0;
  for (const auto& r : vs.equalities) {
    Vec row = r.coeffs;
    row.push_back(-r.rhs);
    p.add_equality(std::move(row), r.rhs);
  }
  for (std::size_t i = 0; i < vs.inequalities.size(); ++i) {
    Vec row = vs.inequalities[i].coeffs;
    row.push_back(-delta[i]);
    p.add_inequality(std::move(row), vs.inequalities[i].rhs);
  }
  Vec nonneg(D + 1, 0.0);
  nonneg[D] = -1.0;
  p.add_inequality(std::move(nonneg), 0.0);

  const lp::Solution sol = lp::solve(p);
  if (sol.status != lp::Status::optimal) detail::raise_status(sol.status, "minkowski_center");
  const double lambda = std::max(0.0, sol.x[D]);
  CenterEstimate out;
  out.kind = CenterKind::minkowski;
  out.point.resize(D);
  for (std::size_t j = 0; j < D; ++j) out.point[j] = sol.x[j] / (1.0 + lambda);
  out.symmetry = lambda;
  out.radius = inscribed_radius(vs, out.point);
  return out;
}

inline CenterEstimate compute_center(const ConstraintSystem& vs, CenterKind kind) {
  return kind == CenterKind::chebyshev ? chebyshev_center(vs) : minkowski_center(vs);
}

struct CutRange {
  double min = 0.0;
  double max = 0.0;
  /// The hyperplane q-perp strictly crosses the version space.
  bool intersects(double eps = 1e-9) const { return min < -eps && max > eps; }
};

inline CutRange cut_check(const ConstraintSystem& vs, std::span<const double> q) {
  if (q.size() != vs.dim) throw Error("cut_check: dimension mismatch");
  Vec obj(q.begin(), q.end());
  const lp::Solution hi = solve_lp(vs, obj);
  if (hi.status != lp::Status::optimal) detail::raise_status(hi.status, "cut_check");
  for (double& v : obj) v = -v;
  const lp::Solution lo = solve_lp(vs, obj);
  if (lo.status != lp::Status::optimal) detail::raise_status(lo.status, "cut_check");
  return {-lo.value, hi.value};
}

}  // namespace vsrank
