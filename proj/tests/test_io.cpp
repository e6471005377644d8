#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "support.hpp"
#include "vsrank/io.hpp"

using namespace vsrank;

TEST_CASE("capacity JSON round trip and layout", "[io]") {
  const SubsetIndex idx(3, 2);
  MobiusCapacity m{idx, {0.5, 0.25, 0.25, 0.1, -0.05, -0.05}};
  const auto j = capacity_to_json(m);
  CHECK(j.dump() ==
        R"({"d":3,"k":2,"coeffs":{"1":0.5,"2":0.25,"3":0.25,"1,2":0.1,"1,3":-0.05,"2,3":-0.05}})");
  const auto back = capacity_from_json(j);
  CHECK(back.index == idx);
  CHECK(back.coeffs == m.coeffs);

  std::mt19937_64 rng(4);
  const SubsetIndex idx2(5, 3);
  const auto r = test::random_feasible_capacity(idx2, rng);
  CHECK(capacity_from_json(ojson::parse(capacity_to_json(r).dump())).coeffs == r.coeffs);
}

TEST_CASE("capacity JSON validation", "[io]") {
  CHECK_THROWS_AS(capacity_from_json(ojson::parse(R"({"d":2,"k":1,"coeffs":{"1":1}})")), Error);
  CHECK_THROWS_AS(capacity_from_json(ojson::parse(R"({"d":2,"k":1,"coeffs":{"1":1,"2":0,"3":0}})")), Error);
  CHECK_THROWS_AS(capacity_from_json(ojson::parse(R"({"d":2,"k":3,"coeffs":{}})")), Error);
  CHECK_THROWS_AS(capacity_from_json(ojson::parse(R"({"k":1})")), Error);
  CHECK_THROWS_AS(load_capacity_file("/nonexistent/capacity.json"), Error);
}

TEST_CASE("constraint dump carries provenance", "[io]") {
  const SubsetIndex idx(2, 1);
  auto vs = init_version_space(idx);
  vs = add_preference(vs, preference_constraint(Vec{1.0, 0.0}, Vec{0.0, 1.0}, 1), 4);
  const auto j = constraints_to_json(vs);
  CHECK(j["dim"] == 2);
  CHECK(j["equalities"].size() == 1);
  const auto& last = j["inequalities"].back();
  CHECK(last["provenance"]["kind"] == "preference");
  CHECK(last["provenance"]["iteration"] == 4);
  CHECK(j["inequalities"][0]["provenance"]["kind"] == "capacity");
}

TEST_CASE("session log round trip keeps full precision", "[io]") {
  IterationRecord r;
  r.iteration = 3;
  r.i = 5;
  r.j = 9;
  r.answer = -1;
  r.r_max = 0.123456789012345678;
  r.center = {1.0 / 3.0, 2.0 / 3.0};
  r.duration_ms = 1.5;
  r.outcome = "bnb";
  std::stringstream s;
  write_log(s, {r, r}, {7, 1, 3});
  const auto back = read_log(s);
  REQUIRE(back.size() == 2);
  CHECK(back[0].record.r_max == r.r_max);
  CHECK(back[0].record.center == r.center);
  CHECK(back[1].record.outcome == "bnb");
  CHECK(back[0].context.seed == 7);
  CHECK(back[0].context.fold == 1);
  CHECK(back[0].context.folds == 3);

  std::istringstream bad("{\"iteration\":1}\nnot json\n");
  CHECK_THROWS_AS(read_log(bad), ParseError);
}
