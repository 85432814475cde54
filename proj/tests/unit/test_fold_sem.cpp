#include <doctest.h>

#include <cmath>

#include "nesyvit/asp_runtime.hpp"
#include "nesyvit/fold_sem.hpp"
#include "nesyvit/random.hpp"

using namespace nesyvit;

namespace {

// rows as strings of '0'/'1', one label per row
BinaryConceptTable table_of(const std::vector<std::string>& rows, const std::vector<ClassId>& labels,
                            std::size_t classes = 2) {
  BinaryConceptTable t;
  t.rows = rows.size();
  t.neuron_names = default_neuron_names(rows.empty() ? 0 : rows[0].size());
  for (ClassId c = 0; c < classes; ++c) t.class_names.push_back(std::string(1, static_cast<char>('a' + c)));
  for (const auto& r : rows) {
    for (char ch : r) t.bits.push_back(ch == '1');
  }
  t.labels = labels;
  return t;
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

double entropy_bits(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
}

BinaryConceptTable random_table(Rng& rng, std::size_t n, std::size_t d, std::size_t classes) {
  BinaryConceptTable t;
  t.rows = n;
  t.neuron_names = default_neuron_names(d);
  for (ClassId c = 0; c < classes; ++c) t.class_names.push_back("k" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    const ClassId c = rng.below(classes);
    t.labels.push_back(c);
    for (std::size_t j = 0; j < d; ++j) {
      // column j leans toward class j % classes
      const double p = j % classes == c ? 0.85 : 0.2;
      t.bits.push_back(rng.uniform() < p);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("information gain against a direct formula") {
  CHECK(information_gain(2, 0, 2, 2) == doctest::Approx(1.0));
  CHECK(information_gain(1, 1, 2, 2) == doctest::Approx(0.0));
  for (std::size_t tp = 0; tp <= 4; ++tp) {
    for (std::size_t fp = 0; fp <= 5; ++fp) {
      const double pos = 4, neg = 5, n = 9;
      const double in = tp + fp, out = n - in;
      double expected = entropy_bits(pos / n);
      if (in > 0) expected -= in / n * entropy_bits(tp / in);
      if (out > 0) expected -= out / n * entropy_bits((pos - tp) / out);
      CHECK(information_gain(tp, fp, 4, 5) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("best_literal examples") {
  auto perfect = table_of({"10", "10", "01", "00"}, {0, 0, 1, 1});
  std::vector<bool> unused(2, false);
  auto pos = range(0, 2), neg = range(2, 4);
  auto pick = best_literal(perfect, pos, neg, unused);
  REQUIRE(pick);
  CHECK(pick->literal == Literal{0, false});
  CHECK(pick->gain == doctest::Approx(1.0));

  auto hand = table_of({"10", "11", "01", "00"}, {0, 0, 1, 1});
  pick = best_literal(hand, pos, neg, unused);
  REQUIRE(pick);
  CHECK(pick->literal == Literal{0, false});

  auto same = table_of({"10", "01", "10", "01"}, {0, 0, 1, 1});
  CHECK_FALSE(best_literal(same, pos, neg, unused));

  std::vector<bool> used{true, false};
  pick = best_literal(hand, pos, neg, used);
  CHECK((!pick || pick->literal.neuron == 1));
}

TEST_CASE("learn_rule builds an exception") {
  auto t = table_of({"10", "10", "10", "10", "11", "00", "00", "00"}, {0, 0, 0, 0, 1, 1, 1, 1});
  RuleSet defs;
  defs.neuron_names = t.neuron_names;
  defs.class_names = t.class_names;
  FoldParams p;
  auto rule = learn_rule(t, range(0, 4), range(4, 8), p, 0, defs);
  REQUIRE(rule);
  CHECK(rule->body == std::vector<Literal>{{0, false}});
  REQUIRE(rule->exceptions.size() == 1);
  const AbId ab = rule->exceptions[0];
  CHECK(ab == 1);
  REQUIRE(defs.abnormal.count(ab));
  REQUIRE(defs.abnormal.at(ab).size() == 1);
  CHECK(defs.abnormal.at(ab)[0].body == std::vector<Literal>{{1, false}});
  CHECK(defs.abnormal.at(ab)[0].exceptions.empty());
}

TEST_CASE("learn_rule trivial cases") {
  FoldParams p;
  auto sep = table_of({"01", "01", "10", "00"}, {0, 0, 1, 1});
  RuleSet defs;
  auto rule = learn_rule(sep, range(0, 2), range(2, 4), p, 0, defs);
  REQUIRE(rule);
  CHECK(rule->body == std::vector<Literal>{{1, false}});
  CHECK(rule->exceptions.empty());

  auto same = table_of({"10", "10"}, {0, 1});
  RuleSet none;
  CHECK_FALSE(learn_rule(same, range(0, 1), range(1, 2), p, 0, none));
  CHECK(none.abnormal.empty());
}

TEST_CASE("exceptions stop at the depth bound") {
  auto t = table_of({"10", "10", "10", "10", "11", "00", "00", "00"}, {0, 0, 0, 0, 1, 1, 1, 1});
  FoldParams p;
  p.max_exception_depth = 0;
  RuleSet defs;
  auto rule = learn_rule(t, range(0, 4), range(4, 8), p, 0, defs);
  if (rule) CHECK(rule->exceptions.empty());
}

TEST_CASE("learn on the two-class toy table") {
  auto t = table_of({"10", "10", "10", "01", "01", "01"}, {0, 0, 0, 1, 1, 1});
  auto rs = learn(t, {});
  REQUIRE(rs.rules.size() == 2);
  CHECK(rs.rules[0] == ClassRule{0, Rule{{{0, false}}, {}}});
  CHECK(rs.rules[1] == ClassRule{1, Rule{{{1, false}}, {}}});
  CHECK(stats(rs) == RuleSetStats{2, 2, 2});
  CHECK(serialize(rs).find("target(X,'a') :- n0(X).\ntarget(X,'b') :- n1(X).\n") != std::string::npos);
}

TEST_CASE("tail at or above N prunes everything") {
  auto t = table_of({"10", "10", "10", "01", "01", "01"}, {0, 0, 0, 1, 1, 1});
  FoldParams p;
  p.tail = 1.0;
  CHECK(p.tail_threshold(6) == doctest::Approx(6.0));
  CHECK(learn(t, p).rules.empty());
  p.tail = 7;
  CHECK(learn(t, p).rules.empty());
  p.tail = 0.5;
  CHECK(p.tail_threshold(6) == doctest::Approx(3.0));
}

TEST_CASE("exception table is learned exactly") {
  auto t = table_of({"10", "10", "10", "10", "11", "00", "00", "00"}, {0, 0, 0, 0, 1, 1, 1, 1});
  auto rs = learn(t, {});
  CHECK_NOTHROW(rs.validate());
  CHECK(evaluate(rs, t).accuracy == 1.0);
}

TEST_CASE("one-hot tables give one rule per class") {
  for (std::size_t k : {2, 3, 5}) {
    std::vector<std::string> rows;
    std::vector<ClassId> labels;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < 3 + c; ++i) {
        std::string r(k, '0');
        r[c] = '1';
        rows.push_back(r);
        labels.push_back(c);
      }
    }
    auto t = table_of(rows, labels, k);
    auto rs = learn(t, {});
    CHECK(rs.rules.size() == k);
    CHECK(evaluate(rs, t).accuracy == 1.0);
  }
}

TEST_CASE("rejected inputs") {
  CHECK_THROWS_AS(learn(table_of({"1", "0"}, {0, 0}), {}), std::invalid_argument);
  FoldParams p;
  p.ratio = -0.1;
  CHECK_THROWS(p.validate());
  p = {};
  p.tail = -1;
  CHECK_THROWS(p.validate());
  FoldParams def;
  CHECK(def.ratio == 0.8);
  CHECK(def.tail == 5e-3);
}

TEST_CASE("learned rule-sets on random tables keep their invariants") {
  Rng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t classes = 2 + rng.below(2), d = 2 + rng.below(5), n = 8 + rng.below(57);
    auto t = random_table(rng, n, d, classes);
    std::vector<bool> present(classes, false);
    for (auto c : t.labels) present[c] = true;
    if (std::count(present.begin(), present.end(), true) < 2) continue;
    FoldParams p;
    p.tail = 0.05;
    auto rs = learn(t, p);
    CHECK_NOTHROW(rs.validate());
    CHECK(learn(t, p) == rs);

    // Replay the covering loop: each rule's default part respects the ratio
    // on the rows left when it was learned, and it covers enough positives.
    std::vector<std::size_t> remaining = range(0, n);
    for (const auto& cr : rs.rules) {
      std::size_t tp = 0, fp = 0, covered_pos = 0;
      Rule plain{cr.rule.body, {}};
      for (auto r : remaining) {
        if (rule_holds(rs, plain, t.row(r))) (t.labels[r] == cr.head ? tp : fp) += 1;
        if (t.labels[r] == cr.head && rule_holds(rs, cr.rule, t.row(r))) ++covered_pos;
      }
      CHECK(static_cast<double>(fp) <= p.ratio * static_cast<double>(tp) + 1e-12);
      CHECK(static_cast<double>(covered_pos) >= p.tail_threshold(n));
      std::erase_if(remaining, [&](std::size_t r) { return rule_holds(rs, cr.rule, t.row(r)); });
    }

    // Greedy result at least matches the best single-literal rule.
    double best_single = 0.0;
    for (ClassId c = 0; c < classes; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        for (bool neg : {false, true}) {
          RuleSet one;
          one.neuron_names = t.neuron_names;
          one.class_names = t.class_names;
          one.rules.push_back({c, Rule{{{j, neg}}, {}}});
          best_single = std::max(best_single, evaluate(one, t).accuracy);
        }
      }
    }
    CHECK(evaluate(rs, t).accuracy >= best_single - 1e-12);
  }
}
