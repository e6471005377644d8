#include <catch_amalgamated.hpp>

#include <set>

#include "vsrank/pipeline.hpp"

using namespace vsrank;

TEST_CASE("fold split partitions the rules", "[pipeline]") {
  for (int folds : {2, 3, 5}) {
    std::multiset<std::size_t> tested;
    for (int f = 0; f < folds; ++f) {
      const auto s = fold_split(23, folds, f, 11);
      CHECK(s.train.size() + s.test.size() == 23);
      CHECK(std::is_sorted(s.train.begin(), s.train.end()));
      std::vector<std::size_t> both;
      std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(both));
      CHECK(both.empty());
      CHECK(s.test.size() >= 23u / static_cast<std::size_t>(folds));
      CHECK(s.test.size() <= 23u / static_cast<std::size_t>(folds) + 1);
      tested.insert(s.test.begin(), s.test.end());
    }
    CHECK(tested.size() == 23);
    CHECK(std::set<std::size_t>(tested.begin(), tested.end()).size() == 23);
  }
  const auto one = fold_split(4, 1, 0, 0);
  CHECK(one.train == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(one.test == one.train);
  CHECK(fold_split(30, 3, 1, 5).test == fold_split(30, 3, 1, 5).test);
  CHECK(fold_split(30, 3, 1, 5).test != fold_split(30, 3, 1, 6).test);
  CHECK_THROWS_AS(fold_split(2, 3, 0, 0), Error);
  CHECK_THROWS_AS(fold_split(10, 3, 3, 0), Error);
  CHECK_THROWS_AS(fold_split(10, 0, 0, 0), Error);
}

TEST_CASE("oracle specs", "[pipeline]") {
  CHECK(parse_oracle_spec("phi")->kind == OracleKind::phi);
  CHECK(parse_oracle_spec("surprise")->kind == OracleKind::surprise);
  const auto c = parse_oracle_spec("choquet:/tmp/m.json");
  REQUIRE(c);
  CHECK(c->kind == OracleKind::hidden_choquet);
  CHECK(c->capacity_path == "/tmp/m.json");
  CHECK_FALSE(parse_oracle_spec("choquet:"));
  CHECK_FALSE(parse_oracle_spec("PHI"));
  CHECK_FALSE(parse_oracle_spec(""));
}

TEST_CASE("orders over subsets", "[pipeline]") {
  const std::vector<double> scores{0.1, 0.9, 0.5, 0.9, 0.3};
  CHECK(order_by_scores(scores, {0, 1, 2, 3, 4}) == std::vector<std::size_t>{1, 3, 2, 4, 0});
  CHECK(order_by_scores(scores, {4, 2, 0}) == std::vector<std::size_t>{1, 0, 2});
  CHECK(select_rows(std::vector<int>{7, 8, 9}, {2, 0}) == std::vector<int>{9, 7});
}

TEST_CASE("additivity from augmented dimension", "[pipeline]") {
  CHECK(order_for_dimension(5, 5) == 1);
  CHECK(order_for_dimension(5, 15) == 2);
  CHECK(order_for_dimension(5, 25) == 3);
  CHECK(order_for_dimension(5, 31) == 5);
  CHECK_FALSE(order_for_dimension(5, 14));
}

TEST_CASE("choquet oracle dimension must match the rules", "[pipeline]") {
  RuleTable t;
  t.measure_names = {"a", "b", "c"};
  t.rules = {Rule{{1}, {2}, {10, 5, 5, 3}}, Rule{{2}, {1}, {10, 5, 5, 4}}};
  t.values = {{0.1, 0.2, 0.3}, {0.3, 0.2, 0.1}};
  const auto ft = normalize_features(t.values, t.measure_names);
  const auto good = Oracle::hidden_choquet(MobiusCapacity{SubsetIndex(3, 1), {0.5, 0.25, 0.25}});
  const auto s = oracle_scores(good, t, ft);
  REQUIRE(s.size() == ft.rows());
  const auto bad = Oracle::hidden_choquet(MobiusCapacity{SubsetIndex(2, 1), {0.5, 0.5}});
  CHECK_THROWS_AS(oracle_scores(bad, t, ft), Error);
}
