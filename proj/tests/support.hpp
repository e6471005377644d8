#pragma once

// Shared helpers for the test binaries.

#include <random>

#include "vsrank/choquet.hpp"
#include "vsrank/lp.hpp"

namespace vsrank::test {

/// Random point of the capacity polytope: a Dirichlet mixture of vertices
/// reached by maximizing random objectives.
inline MobiusCapacity random_feasible_capacity(const SubsetIndex& idx, std::mt19937_64& rng) {
  const auto cs = capacity_constraints(idx);
  lp::Problem p;
  p.num_vars = idx.size();
  for (const auto& r : cs.equalities) p.add_equality(r.coeffs, r.rhs);
  for (const auto& r : cs.inequalities) p.add_inequality(r.coeffs, r.rhs);
  std::normal_distribution<double> N(0.0, 1.0);
  std::gamma_distribution<double> G(1.0, 1.0);
  MobiusCapacity m{idx, Vec(idx.size(), 0.0)};
  double total = 0.0;
  for (std::size_t v = 0; v < 4; ++v) {
    p.objective.resize(idx.size());
    for (double& c : p.objective) c = N(rng);
    const auto s = lp::solve(p);
    if (s.status != lp::Status::optimal) continue;
    const double weight = G(rng);
    total += weight;
    for (std::size_t j = 0; j < m.coeffs.size(); ++j) m.coeffs[j] += weight * s.x[j];
  }
  for (double& c : m.coeffs) c /= total;
  return m;
}

inline Vec uniform_point(std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec v(dim);
  for (double& x : v) x = U(rng);
  return v;
}

}  // namespace vsrank::test
