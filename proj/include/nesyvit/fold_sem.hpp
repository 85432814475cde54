#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nesyvit/concept_core.hpp"
#include "nesyvit/rules.hpp"

namespace nesyvit {

struct FoldParams {
  /// Largest false-positive / true-positive ratio a default part may keep.
  double ratio = 0.8;
  /// Minimum coverage of a rule: a fraction of the table when <= 1, a count otherwise.
  double tail = 5e-3;
  std::size_t max_exception_depth = 4;

  void validate() const;

  /// Smallest number of covered training examples a rule needs for `rows` rows.
  double tail_threshold(std::size_t rows) const;
};

struct LiteralChoice {
  Literal literal;
  double gain = 0.0;
};

/// Information gain (bits) of splitting pos/neg by a literal that covers
/// tp positives and fp negatives.
double information_gain(std::size_t tp, std::size_t fp, std::size_t pos, std::size_t neg);

/// Best literal over unused columns. A candidate must cover at least one
/// positive and raise the positive rate above the base rate; the highest
/// information gain wins, ties going to positive literals and then to the
/// lower column. With no negatives the literal covering most positives wins.
std::optional<LiteralChoice> best_literal(const BinaryConceptTable& table,
                                          std::span<const std::size_t> pos,
                                          std::span<const std::size_t> neg,
                                          const std::vector<bool>& used);

/// Learns one default rule separating pos from neg. The default part grows
/// until it covers no negatives or its FP/TP ratio falls to params.ratio;
/// remaining false positives become the positives of a recursive exception
/// learner whose rules are stored in `defs` under a fresh `abN`. Returns
/// nothing when no literal helps or the ratio is still violated after the
/// search stalls.
std::optional<Rule> learn_rule(const BinaryConceptTable& table, std::span<const std::size_t> pos,
                               std::span<const std::size_t> neg, const FoldParams& params,
                               std::size_t depth, RuleSet& defs);

/// Sequential covering over all classes with first-match semantics: the class
/// with the most uncovered rows learns the next rule, covered rows drop out,
/// and rules below the tail threshold are discarded.
RuleSet learn(const BinaryConceptTable& table, const FoldParams& params);

}  // namespace nesyvit
