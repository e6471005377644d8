#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>

#include "support.hpp"
#include "vsrank/choquet.hpp"

using namespace vsrank;
using Catch::Approx;

namespace {

// Moebius sum evaluated from scratch: every subset of {1..d} as a sorted id
// list, coefficients looked up by their "i,j" key.
double brute_force_mobius(const MobiusCapacity& m, const Vec& f) {
  std::map<std::string, double> by_key;
  for (std::size_t p = 0; p < m.index.size(); ++p) by_key[m.index.key(p)] = m.coeffs[p];
  const int d = m.index.criteria();
  double total = 0.0;
  std::vector<int> subset;
  auto rec = [&](auto&& self, int next) -> void {
    if (!subset.empty() && static_cast<int>(subset.size()) <= m.index.order()) {
      std::string key;
      double mn = 1e300;
      for (int e : subset) {
        if (!key.empty()) key += ',';
        key += std::to_string(e + 1);
        mn = std::min(mn, f[static_cast<std::size_t>(e)]);
      }
      total += by_key.at(key) * mn;
    }
    for (int e = next; e < d; ++e) {
      subset.push_back(e);
      self(self, e + 1);
      subset.pop_back();
    }
  };
  rec(rec, 0);
  return total;
}

}  // namespace

TEST_CASE("subset index ordering", "[choquet]") {
  const SubsetIndex idx(3, 2);
  REQUIRE(idx.size() == 6);
  CHECK(idx.key(0) == "1");
  CHECK(idx.key(2) == "3");
  CHECK(idx.key(3) == "1,2");
  CHECK(idx.key(4) == "1,3");
  CHECK(idx.key(5) == "2,3");
  CHECK(SubsetIndex(5, 2).size() == 15);
  CHECK(SubsetIndex(5, 3).size() == 25);
  CHECK(SubsetIndex(6, 3).size() == 41);
  CHECK_FALSE(SubsetIndex(5, 3).beyond_tested_order());
  CHECK(SubsetIndex(5, 4).beyond_tested_order());
  CHECK_THROWS_AS(SubsetIndex(3, 0), Error);
  CHECK_THROWS_AS(SubsetIndex(3, 4), Error);
}

TEST_CASE("augment", "[choquet]") {
  const SubsetIndex idx(3, 2);
  const Vec psi = augment(Vec{0.2, 0.7, 0.5}, idx);
  CHECK(psi == Vec{0.2, 0.7, 0.5, 0.2, 0.2, 0.5});
  CHECK(augment(Vec{0.2, 0.7, 0.5}, SubsetIndex(3, 1)) == Vec{0.2, 0.7, 0.5});
  const Vec flat = augment(Vec{0.4, 0.4, 0.4}, SubsetIndex(3, 3));
  CHECK(std::all_of(flat.begin(), flat.end(), [](double v) { return v == 0.4; }));
  CHECK_THROWS_AS(augment(Vec{0.1, 0.2}, idx), Error);
}

TEST_CASE("choquet_eval", "[choquet]") {
  MobiusCapacity m{SubsetIndex(2, 2), {0.3, 0.3, 0.4}};
  CHECK(choquet_eval(m, Vec{0.5, 1.0}) == Approx(0.65).margin(1e-15));
  CHECK(choquet_eval(m, Vec{1.0, 1.0}) == Approx(1.0).margin(1e-15));
  MobiusCapacity mean{SubsetIndex(2, 1), {0.5, 0.5}};
  CHECK(choquet_eval(mean, Vec{0.2, 0.8}) == Approx(0.5).margin(1e-15));
  CHECK_THROWS_AS(choquet_eval(m, Vec{1.0}), Error);
}

TEST_CASE("capacity constraints for d=2, k=2", "[choquet]") {
  const auto cs = capacity_constraints(SubsetIndex(2, 2));
  REQUIRE(cs.equalities.size() == 1);
  CHECK(cs.equalities[0].coeffs == Vec{1, 1, 1});
  CHECK(cs.equalities[0].rhs == 1.0);
  std::set<Vec> rows;
  for (const auto& r : cs.inequalities) {
    CHECK(r.rhs == 0.0);
    rows.insert(r.coeffs);
  }
  CHECK(rows == std::set<Vec>{{-1, 0, 0}, {-1, 0, -1}, {0, -1, 0}, {0, -1, -1}});
}

TEST_CASE("capacity constraints collapse to the simplex at k=1", "[choquet]") {
  auto cs = capacity_constraints(SubsetIndex(2, 1));
  CHECK(cs.inequalities.size() == 2);
  // d=3, k=1: 3 items x 4 choices of S = 12 raw rows, 3 distinct
  cs = capacity_constraints(SubsetIndex(3, 1));
  CHECK(cs.inequalities.size() == 3);
}

TEST_CASE("deduplicated rows keep the feasible set", "[choquet][property]") {
  std::mt19937_64 rng(5);
  for (auto [d, k] : std::vector<std::pair<int, int>>{{3, 1}, {3, 2}, {4, 2}, {4, 3}, {5, 2}}) {
    const SubsetIndex idx(d, k);
    const auto cs = capacity_constraints(idx);
    // raw (i, S) rows, built independently from subset keys
    std::vector<Vec> raw;
    for (int i = 0; i < d; ++i)
      for (std::uint32_t s = 0; s < (1u << d); ++s) {
        if (s & (1u << i)) continue;
        Vec row(idx.size(), 0.0);
        for (std::uint32_t t = 0; t < (1u << d); ++t) {
          if ((t & s) != t || std::popcount(t) > k - 1) continue;
          row[static_cast<std::size_t>(idx.position(t | (1u << i)))] += 1.0;
        }
        raw.push_back(row);
      }
    CHECK(raw.size() == static_cast<std::size_t>(d) << (d - 1));
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
      Vec w(idx.size());
      for (double& v : w) v = std::abs(N(rng)) * (trial % 3 == 0 ? 1.0 : 0.2) + N(rng) * 0.15;
      bool raw_ok = true;
      for (const auto& r : raw) raw_ok = raw_ok && dot(r, w) >= 0.0;
      bool dedup_ok = true;
      for (const auto& r : cs.inequalities) dedup_ok = dedup_ok && dot(r.coeffs, w) <= r.rhs;
      CHECK(raw_ok == dedup_ok);
    }
  }
}

TEST_CASE("preference constraint", "[choquet]") {
  auto row = preference_constraint(Vec{1, 0}, Vec{0, 1}, +1, 3);
  // w1 - w2 >= 0  <=>  -w1 + w2 <= 0
  CHECK(row.coeffs == Vec{-1, 1});
  CHECK(row.rhs == 0.0);
  CHECK(row.provenance.kind == Provenance::Kind::preference);
  CHECK(row.provenance.iteration == 3);
  row = preference_constraint(Vec{1, 0}, Vec{0, 1}, -1);
  CHECK(row.coeffs == Vec{1, -1});
  CHECK_THROWS_AS(preference_constraint(Vec{1, 0}, Vec{1, 0}, +1), Error);
  CHECK_THROWS_AS(preference_constraint(Vec{1, 0}, Vec{0, 1}, 0), Error);
}

TEST_CASE("dot evaluation equals brute-force Moebius sum", "[choquet][property]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 6);
    const int k = 1 + static_cast<int>(rng() % std::min(3, d));
    MobiusCapacity m{SubsetIndex(d, k), {}};
    m.coeffs.resize(m.index.size());
    for (double& c : m.coeffs) c = U(rng) * 2.0 - 1.0;
    Vec f(static_cast<std::size_t>(d));
    for (double& v : f) v = U(rng);
    CHECK(std::abs(choquet_eval(m, f) - brute_force_mobius(m, f)) <= 1e-12);
  }
}

TEST_CASE("feasible capacities give monotone, normalized integrals", "[choquet][property]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (auto [d, k] : std::vector<std::pair<int, int>>{{3, 2}, {4, 2}, {4, 3}, {5, 2}}) {
    const SubsetIndex idx(d, k);
    const auto cs = capacity_constraints(idx);
    for (int trial = 0; trial < 10; ++trial) {
      const MobiusCapacity m = test::random_feasible_capacity(idx, rng);
      REQUIRE(cs.max_violation(m.coeffs) <= 1e-9);
      CHECK(choquet_eval(m, Vec(static_cast<std::size_t>(d), 1.0)) == Approx(1.0).margin(1e-9));
      for (int pair = 0; pair < 50; ++pair) {
        Vec f(static_cast<std::size_t>(d)), g(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < f.size(); ++i) {
          f[i] = U(rng);
          g[i] = f[i] + (U(rng) < 0.5 ? 0.0 : U(rng) * (1.0 - f[i]));
        }
        CHECK(choquet_eval(m, f) <= choquet_eval(m, g) + 1e-9);
      }
    }
  }
}
