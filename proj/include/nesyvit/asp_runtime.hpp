#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nesyvit/concept_core.hpp"
#include "nesyvit/rules.hpp"

namespace nesyvit {

struct Prediction {
  std::optional<ClassId> cls;               // empty when no rule fires
  std::optional<std::size_t> fired_rule;    // 0-based index into RuleSet::rules

  bool abstained() const noexcept { return !cls.has_value(); }
  bool operator==(const Prediction&) const = default;
};

struct RuleTrace;

struct LiteralTrace {
  std::string text;  // e.g. `not ab1(X)`
  bool holds = false;
  std::vector<RuleTrace> subgoal;  // defining rules tried for an `abN` goal
};

struct RuleTrace {
  std::string rule;
  std::vector<LiteralTrace> literals;  // evaluated left to right until one fails
  bool fired = false;
};

struct Justification {
  Prediction prediction;
  std::vector<RuleTrace> rules;  // every class rule inspected, in order
};

struct RuleSetStats {
  std::size_t rules = 0;
  std::size_t unique_predicates = 0;
  std::size_t size = 0;

  bool operator==(const RuleSetStats&) const = default;
};

struct Evaluation {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t abstained = 0;
  double accuracy = 0.0;
  std::vector<std::string> class_names;
  // confusion[actual][predicted]; the last column counts abstentions.
  std::vector<std::vector<std::size_t>> confusion;

  double precision(ClassId c) const;
  double recall(ClassId c) const;
  std::size_t support(ClassId c) const;
};

/// First class rule whose body holds decides the class.
Prediction classify(const RuleSet& rs, std::span<const std::uint8_t> bits);

Justification justify(const RuleSet& rs, std::span<const std::uint8_t> bits);

/// One line per rule and literal, nested by indentation.
std::string render(const Justification& j, const RuleSet& rs);

/// Abstentions count as errors. Table classes are matched to rule-set classes by name.
Evaluation evaluate(const RuleSet& rs, const BinaryConceptTable& table);

/// Counts include the `abN` rules; `not abN` goals are body predicates too.
RuleSetStats stats(const RuleSet& rs);

/// `class,precision,recall,support` rows followed by a `# accuracy=...` summary line.
void write_report(std::ostream& out, const Evaluation& ev);

}  // namespace nesyvit
