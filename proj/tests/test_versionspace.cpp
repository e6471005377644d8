#include <catch_amalgamated.hpp>

#include <random>

#include "support.hpp"
#include "vsrank/versionspace.hpp"

using namespace vsrank;
using Catch::Approx;

namespace {

ConstraintSystem box(std::size_t dim) {
  ConstraintSystem cs;
  cs.dim = dim;
  for (std::size_t i = 0; i < dim; ++i) {
    Vec up(dim, 0.0), lo(dim, 0.0);
    up[i] = 1.0;
    lo[i] = -1.0;
    cs.add_inequality({up, 1.0, {}});
    cs.add_inequality({lo, 0.0, {}});
  }
  return cs;
}

ConstraintSystem triangle() {
  ConstraintSystem cs;
  cs.dim = 2;
  cs.add_inequality({{-1, 0}, 0.0, {}});
  cs.add_inequality({{0, -1}, 0.0, {}});
  cs.add_inequality({{1, 1}, 1.0, {}});
  return cs;
}

// Symmetry of x inside {c_i . y <= d_i} given facet minima delta_i (taken from
// the known vertices): min_i (d_i - c_i x) / (c_i x - delta_i).
double symmetry_at(const std::vector<Vec>& rows, const Vec& rhs, const std::vector<Vec>& vertices,
                   const Vec& x) {
  double lam = 1e300;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double delta = 1e300;
    for (const auto& v : vertices) delta = std::min(delta, dot(rows[i], v));
    const double num = rhs[i] - dot(rows[i], x);
    const double den = dot(rows[i], x) - delta;
    if (den > 1e-15) lam = std::min(lam, num / den);
  }
  return lam;
}

}  // namespace

TEST_CASE("init version space", "[versionspace]") {
  auto vs = init_version_space(SubsetIndex(2, 1));
  CHECK(vs.dim == 2);
  CHECK(vs.inequalities.size() == 2);
  CHECK(vs.equalities.size() == 1);
  CHECK(init_version_space(SubsetIndex(5, 2)).dim == 15);
  const auto v22 = init_version_space(SubsetIndex(2, 2));
  CHECK(v22.inequalities.size() == 4);
}

TEST_CASE("add_preference appends with provenance", "[versionspace]") {
  auto vs = init_version_space(SubsetIndex(2, 1));
  const auto before = vs.inequalities;
  auto row = preference_constraint(Vec{1, 0}, Vec{0, 1}, +1);
  vs = add_preference(vs, row, 1);
  vs = add_preference(vs, row, 2);
  REQUIRE(vs.inequalities.size() == before.size() + 2);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(vs.inequalities[i].coeffs == before[i].coeffs);
  CHECK(vs.inequalities.back().provenance.iteration == 2);
  CHECK(vs.preference_count() == 2);
  // half simplex: chebyshev center moves into w1 >= w2
  const auto c = chebyshev_center(vs);
  CHECK(c.point[0] >= c.point[1] - 1e-9);
}

TEST_CASE("contradictory preferences are infeasible", "[versionspace]") {
  auto vs = init_version_space(SubsetIndex(2, 1));
  vs = add_preference(vs, preference_constraint(Vec{1, 0}, Vec{0, 1}, +1, 1, 0.1), 1);
  vs = add_preference(vs, preference_constraint(Vec{1, 0}, Vec{0, 1}, -1, 2, 0.1), 2);
  CHECK_THROWS_AS(chebyshev_center(vs), InfeasibleVersionSpace);
  CHECK_THROWS_AS(minkowski_center(vs), InfeasibleVersionSpace);
}

TEST_CASE("chebyshev center of squares and the simplex", "[versionspace]") {
  const auto c = chebyshev_center(box(2));
  CHECK(c.kind == CenterKind::chebyshev);
  CHECK(c.point[0] == Approx(0.5).margin(1e-9));
  CHECK(c.point[1] == Approx(0.5).margin(1e-9));
  CHECK(c.radius == Approx(0.5).margin(1e-9));

  // max r s.t. w1 + w2 = 1, r <= w1, r <= w2  =>  r = 0.5 at (0.5, 0.5)
  const auto s = chebyshev_center(init_version_space(SubsetIndex(2, 1)));
  CHECK(s.point[0] == Approx(0.5).margin(1e-9));
  CHECK(s.point[1] == Approx(0.5).margin(1e-9));
  CHECK(s.radius == Approx(0.5).margin(1e-9));

  auto bad = box(2);
  bad.add_inequality({{-1, 0}, -2.0, {}});
  CHECK_THROWS_AS(chebyshev_center(bad), InfeasibleVersionSpace);
}

TEST_CASE("minkowski center of the triangle and the square", "[versionspace]") {
  const auto t = minkowski_center(triangle());
  REQUIRE(t.symmetry.has_value());
  CHECK(*t.symmetry == Approx(0.5).margin(1e-9));
  CHECK(t.point[0] == Approx(1.0 / 3.0).margin(1e-9));
  CHECK(t.point[1] == Approx(1.0 / 3.0).margin(1e-9));
  CHECK(t.radius == Approx(inscribed_radius(triangle(), t.point)).margin(1e-12));

  const auto sq = minkowski_center(box(2));
  CHECK(*sq.symmetry == Approx(1.0).margin(1e-9));
  CHECK(sq.point[0] == Approx(0.5).margin(1e-9));

  auto bad = box(2);
  bad.add_inequality({{-1, 0}, -2.0, {}});
  CHECK_THROWS_AS(minkowski_center(bad), InfeasibleVersionSpace);
}

TEST_CASE("minkowski symmetry agrees with a grid search", "[versionspace]") {
  const auto tri = triangle();
  std::vector<Vec> rows;
  Vec rhs;
  for (const auto& r : tri.inequalities) {
    rows.push_back(r.coeffs);
    rhs.push_back(r.rhs);
  }
  const std::vector<Vec> verts = {{0, 0}, {1, 0}, {0, 1}};
  double best = -1.0;
  Vec arg;
  const int n = 300;
  for (int i = 1; i < n; ++i)
    for (int j = 1; i + j < n; ++j) {
      const Vec x = {static_cast<double>(i) / n, static_cast<double>(j) / n};
      const double s = symmetry_at(rows, rhs, verts, x);
      if (s > best) {
        best = s;
        arg = x;
      }
    }
  const auto t = minkowski_center(tri);
  CHECK(*t.symmetry == Approx(best).margin(1e-6));
  CHECK(arg[0] == Approx(t.point[0]).margin(1.0 / n));
}

TEST_CASE("inscribed radius", "[versionspace]") {
  const auto sq = box(2);
  CHECK(inscribed_radius(sq, Vec{0.5, 0.5}) == Approx(0.5));
  CHECK(inscribed_radius(sq, Vec{0.9, 0.5}) == Approx(0.1));
  CHECK(inscribed_radius(sq, Vec{1.0, 0.5}) == 0.0);
  CHECK_THROWS_AS(inscribed_radius(sq, Vec{1.5, 0.5}), Error);
}

TEST_CASE("cut check", "[versionspace]") {
  const auto simplex = init_version_space(SubsetIndex(2, 1));
  auto r = cut_check(simplex, Vec{1, -1});
  CHECK(r.min == Approx(-1.0).margin(1e-9));
  CHECK(r.max == Approx(1.0).margin(1e-9));
  CHECK(r.intersects());
  r = cut_check(simplex, Vec{1, 1});
  CHECK(r.min == Approx(1.0).margin(1e-9));
  CHECK(r.max == Approx(1.0).margin(1e-9));
  CHECK_FALSE(r.intersects());
  const auto half = add_preference(simplex, preference_constraint(Vec{1, 0}, Vec{0, 1}, +1), 1);
  r = cut_check(half, Vec{1, -1});
  CHECK(r.min == Approx(0.0).margin(1e-9));
  CHECK(r.max == Approx(1.0).margin(1e-9));
  CHECK_FALSE(r.intersects());
}

TEST_CASE("centers stay inside the capacity polytope", "[versionspace][property]") {
  std::mt19937_64 rng(3);
  for (auto [d, k] : std::vector<std::pair<int, int>>{{3, 1}, {3, 2}, {4, 2}, {5, 2}, {4, 3}}) {
    const SubsetIndex idx(d, k);
    auto vs = init_version_space(idx);
    const MobiusCapacity hidden = test::random_feasible_capacity(idx, rng);
    double last_r = 1e300;
    for (int it = 1; it <= 8; ++it) {
      const Vec a = augment(test::uniform_point(static_cast<std::size_t>(d), rng), idx);
      const Vec b = augment(test::uniform_point(static_cast<std::size_t>(d), rng), idx);
      const int ans = dot(hidden.coeffs, a) >= dot(hidden.coeffs, b) ? 1 : -1;
      vs = add_preference(vs, preference_constraint(a, b, ans, it), it);
      const auto cheb = chebyshev_center(vs);
      CHECK(vs.max_violation(cheb.point) <= 1e-7);
      CHECK(cheb.radius <= last_r + 1e-12);
      last_r = cheb.radius;
      CHECK(inscribed_radius(vs, cheb.point) == Approx(cheb.radius).margin(1e-9));
      if (it % 4 == 0) {
        const auto mink = minkowski_center(vs);
        CHECK(vs.max_violation(mink.point) <= 1e-7);
        CHECK(*mink.symmetry >= 0.0);
        CHECK(*mink.symmetry <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("minkowski reflection stays inside", "[versionspace][property]") {
  std::mt19937_64 rng(4);
  const SubsetIndex idx(3, 2);
  auto vs = init_version_space(idx);
  const auto hidden = test::random_feasible_capacity(idx, rng);
  for (int it = 1; it <= 3; ++it) {
    const Vec a = augment(test::uniform_point(3, rng), idx);
    const Vec b = augment(test::uniform_point(3, rng), idx);
    vs = add_preference(vs, preference_constraint(a, b, dot(hidden.coeffs, a) >= dot(hidden.coeffs, b) ? 1 : -1, it), it);
  }
  const auto mc = minkowski_center(vs);
  const double lam = *mc.symmetry;
  // feasible points: convex mixtures of LP vertices
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<Vec> verts;
  for (int v = 0; v < 40; ++v) {
    Vec obj(idx.size());
    for (double& c : obj) c = N(rng);
    const auto s = solve_lp(vs, obj);
    REQUIRE(s.status == lp::Status::optimal);
    verts.push_back(s.x);
  }
  std::gamma_distribution<double> G(0.3, 1.0);
  for (int sample = 0; sample < 1000; ++sample) {
    Vec p(idx.size(), 0.0);
    double tot = 0.0;
    for (const auto& v : verts) {
      const double g = G(rng);
      tot += g;
      for (std::size_t j = 0; j < p.size(); ++j) p[j] += g * v[j];
    }
    for (double& x : p) x /= tot;
    Vec refl(idx.size());
    for (std::size_t j = 0; j < p.size(); ++j)
      refl[j] = (1 - lam) * mc.point[j] + lam * (2 * mc.point[j] - p[j]);
    CHECK(vs.max_violation(refl) <= 1e-6);
  }
}

TEST_CASE("centrally symmetric bodies have symmetry one", "[versionspace][property]") {
  for (std::size_t dim = 2; dim <= 5; ++dim) {
    auto b = box(dim);
    CHECK(*minkowski_center(b).symmetry >= 1.0 - 1e-6);
  }
  // cross-polytope |x| + |y| <= 1
  ConstraintSystem cross;
  cross.dim = 2;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) cross.add_inequality({{sx, sy}, 1.0, {}});
  CHECK(*minkowski_center(cross).symmetry >= 1.0 - 1e-6);
}
