#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nesyvit/concept_core.hpp"

namespace nesyvit {

/// Numeric part of an exception predicate `abN`.
using AbId = std::size_t;

/// A neuron predicate in the default part, optionally under negation-as-failure.
struct Literal {
  std::size_t neuron = 0;
  bool negated = false;

  bool operator==(const Literal&) const = default;
};

/// `head :- default_body, not ab_1, ..., not ab_m.`
struct Rule {
  std::vector<Literal> body;
  std::vector<AbId> exceptions;

  bool operator==(const Rule&) const = default;
};

struct ClassRule {
  ClassId head = 0;
  Rule rule;

  bool operator==(const ClassRule&) const = default;
};

/// Ordered class rules (first match wins) plus the `abN` definitions they use.
struct RuleSet {
  std::vector<std::string> neuron_names;
  std::vector<std::string> class_names;
  std::vector<ClassRule> rules;
  std::map<AbId, std::vector<Rule>> abnormal;

  bool operator==(const RuleSet&) const = default;

  /// Throws FormatError on dangling `abN` references, cycles through the
  /// exception predicates, out-of-range neurons/classes or duplicate body
  /// predicates.
  void validate() const;

  /// `abN` ids with every id after the ones it depends on.
  std::vector<AbId> stratified_order() const;
};

/// `abN(X)` predicate name.
std::string ab_name(AbId id);

/// True for names of the form `ab<digits>`.
bool is_ab_name(std::string_view name);

/// True if `name` can be written as a predicate: [A-Za-z0-9_]+, not `not`, not `abN`.
bool is_predicate_name(std::string_view name);

/// Top-down truth of a rule body for one bit vector. `abN` goals are proved
/// by trying their defining rules in order (negation as failure).
bool rule_holds(const RuleSet& rs, const Rule& rule, std::span<const std::uint8_t> bits);
bool ab_holds(const RuleSet& rs, AbId id, std::span<const std::uint8_t> bits);

/// Text form of one rule, e.g. `target(X,'a') :- n0(X), not ab1(X).`
std::string render_rule(const RuleSet& rs, const ClassRule& rule);
std::string render_ab_rule(const RuleSet& rs, AbId id, const Rule& rule);

/// Rule-set text. Class rules come first, then `abN` definitions by id.
/// `%! classes` and `%! neurons` directives record the class order and the
/// neuron columns so a later parse reproduces the same RuleSet.
std::string serialize(const RuleSet& rs, const std::vector<std::string>& header_comments = {});

/// Parses rule-set text. Heads may be `target(X,'c')` or `label(X,'c')`.
/// Without a `%! neurons` directive, neuron columns are taken from the
/// predicate names: all `nJ` or all `J` names map to column J, anything else
/// is numbered by first appearance. Throws FormatError with line and column.
RuleSet parse_rules(std::string_view text);

/// Same, resolving predicates against the given column names.
RuleSet parse_rules(std::string_view text, const std::vector<std::string>& neuron_names);

/// Rules compared by class name, predicate name and polarity, ignoring the
/// neuron column list and `abN` numbering.
bool same_rules(const RuleSet& a, const RuleSet& b);

}  // namespace nesyvit
