#include <doctest.h>

#include <sstream>

#include "nesyvit/labeller.hpp"
#include "nesyvit/rules.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace nesyvit;

TEST_CASE("two-class rule-set parses") {
  auto rs = parse_rules(fixtures::kRooms2);
  REQUIRE(rs.rules.size() == 2);
  for (const auto& r : rs.rules) {
    CHECK(r.rule.body.size() == 1);
    CHECK(r.rule.exceptions.empty());
  }
  CHECK(rs.class_names == std::vector<std::string>{"bathroom", "bedroom"});
  CHECK(rs.neuron_names == std::vector<std::string>{"bathroom_tiles1_shower_screen1", "bed1_duvet1"});
}

TEST_CASE("multi-line bodies and negation parse") {
  auto rs = parse_rules(fixtures::kRooms3);
  REQUIRE(rs.rules.size() == 3);
  CHECK(rs.rules[1].rule.body.size() == 1);
  CHECK(rs.rules[1].rule.body[0].negated);
  CHECK(rs.neuron_names[rs.rules[1].rule.body[0].neuron] ==
        "refrigerator1_kitchen_island1_range1_countertop1_person1_wall1_air_conditioning1");
}

TEST_CASE("raw numeric predicates map to their columns") {
  auto rs = parse_rules(fixtures::kRooms10Raw);
  CHECK(rs.neuron_names.size() == 123);
  CHECK(rs.rules[0].rule.body[0].neuron == 14);
  CHECK(rs.rules[0].rule.body[1] == Literal{83, true});
  auto n = parse_rules("target(X,'a') :- n3(X).\n");
  CHECK(n.neuron_names.size() == 4);
  CHECK(n.rules[0].rule.body[0].neuron == 3);
}

TEST_CASE("renaming the raw ten-class rules gives the labelled ones") {
  std::istringstream names(fixtures::kRooms10Names);
  auto renamed = rename_ruleset(parse_rules(fixtures::kRooms10Raw), read_name_map(names));
  CHECK(same_rules(renamed, parse_rules(fixtures::kRooms10)));
  CHECK_FALSE(same_rules(renamed, parse_rules(fixtures::kRooms5)));
}

TEST_CASE("parse errors carry positions") {
  SUBCASE("dangling exception") {
    CHECK_THROWS_AS(parse_rules("target(X,'c') :- n0(X), not ab1(X).\n"), FormatError);
  }
  SUBCASE("missing period") {
    try {
      parse_rules("target(X,'a') :- n0(X).\ntarget(X,'b') :- n1(X)\n");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.line() >= 2);
    }
  }
  SUBCASE("garbage") {
    try {
      parse_rules("target(X,'a') :- n0(X) n1(X).\n");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.line() == 1);
      CHECK(e.column() > 1);
    }
  }
  SUBCASE("cycle through exceptions") {
    CHECK_THROWS_AS(parse_rules("target(X,'a') :- n0(X), not ab1(X).\n"
                                "ab1(X) :- n1(X), not ab2(X).\n"
                                "ab2(X) :- n0(X), not ab1(X).\n"),
                    FormatError);
  }
  SUBCASE("duplicate body predicate") {
    CHECK_THROWS_AS(parse_rules("target(X,'a') :- n0(X), not n0(X).\n"), FormatError);
  }
  SUBCASE("positive ab literal") {
    CHECK_THROWS_AS(parse_rules("target(X,'a') :- n0(X), ab1(X).\nab1(X) :- n1(X).\n"), FormatError);
  }
}

TEST_CASE("comments and label heads are accepted") {
  auto rs = parse_rules("% a comment\nlabel(X,'a') :- n0(X). % trailing\n");
  CHECK(rs.rules.size() == 1);
  CHECK(rs.class_names == std::vector<std::string>{"a"});
}

TEST_CASE("serialize then parse is the identity on random rule-sets") {
  Rng rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    auto rs = oracle::random_ruleset(rng, 2 + rng.below(5), 1 + rng.below(8), 1 + rng.below(4), rng.below(3));
    REQUIRE_NOTHROW(rs.validate());
    auto back = parse_rules(serialize(rs, {"random"}));
    CHECK(back == rs);
    CHECK(same_rules(back, rs));
  }
}

TEST_CASE("rendered rules") {
  auto rs = parse_rules("target(X,'a') :- n0(X), not n1(X), not ab1(X).\nab1(X) :- n1(X).\n");
  CHECK(render_rule(rs, rs.rules[0]) == "target(X,'a') :- n0(X), not n1(X), not ab1(X).");
  CHECK(render_ab_rule(rs, 1, rs.abnormal.at(1)[0]) == "ab1(X) :- n1(X).");
}

TEST_CASE("predicate names") {
  CHECK(is_predicate_name("bed1"));
  CHECK(is_predicate_name("43"));
  CHECK_FALSE(is_predicate_name("not"));
  CHECK_FALSE(is_predicate_name("ab3"));
  CHECK_FALSE(is_predicate_name("a-b"));
  CHECK_FALSE(is_predicate_name(""));
  CHECK(is_ab_name("ab12"));
  CHECK_FALSE(is_ab_name("abc"));
  CHECK(ab_name(4) == "ab4");
}

TEST_CASE("stratified order puts dependencies first") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    auto rs = oracle::random_ruleset(rng, 5, 6, 3, 2);
    auto order = rs.stratified_order();
    CHECK(order.size() == rs.abnormal.size());
    std::map<AbId, std::size_t> at;
    for (std::size_t i = 0; i < order.size(); ++i) at[order[i]] = i;
    for (const auto& [id, defs] : rs.abnormal) {
      for (const auto& r : defs) {
        for (AbId dep : r.exceptions) CHECK(at[dep] < at[id]);
      }
    }
  }
}
