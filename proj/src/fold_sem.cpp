#include "nesyvit/fold_sem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nesyvit {

void FoldParams::validate() const {
  if (!(ratio >= 0.0)) throw std::invalid_argument("ratio must be non-negative");
  if (!(tail >= 0.0)) throw std::invalid_argument("tail must be non-negative");
}

double FoldParams::tail_threshold(std::size_t rows) const {
  return tail <= 1.0 ? tail * static_cast<double>(rows) : tail;
}

namespace {

double entropy2(double a, double b) {
  const double n = a + b;
  double h = 0.0;
  if (a > 0) h -= a / n * std::log2(a / n);
  if (b > 0) h -= b / n * std::log2(b / n);
  return h;
}

// Gains closer than this are ties.
constexpr double kGainTolerance = 1e-12;

}  // namespace

double information_gain(std::size_t tp, std::size_t fp, std::size_t pos, std::size_t neg) {
  const double total = static_cast<double>(pos + neg);
  if (total == 0) return 0.0;
  const double fn = static_cast<double>(pos - tp);
  const double tn = static_cast<double>(neg - fp);
  const double covered = static_cast<double>(tp + fp);
  const double rest = fn + tn;
  double children = 0.0;
  if (covered > 0) children += covered / total * entropy2(static_cast<double>(tp), static_cast<double>(fp));
  if (rest > 0) children += rest / total * entropy2(fn, tn);
  return entropy2(static_cast<double>(pos), static_cast<double>(neg)) - children;
}

std::optional<LiteralChoice> best_literal(const BinaryConceptTable& table,
                                          std::span<const std::size_t> pos,
                                          std::span<const std::size_t> neg,
                                          const std::vector<bool>& used) {
  const std::size_t d = table.columns();
  std::vector<std::size_t> pos_ones(d, 0), neg_ones(d, 0);
  for (std::size_t r : pos) {
    auto row = table.row(r);
    for (std::size_t c = 0; c < d; ++c) pos_ones[c] += row[c];
  }
  for (std::size_t r : neg) {
    auto row = table.row(r);
    for (std::size_t c = 0; c < d; ++c) neg_ones[c] += row[c];
  }

  const std::size_t p = pos.size();
  const std::size_t n = neg.size();
  std::optional<LiteralChoice> best;
  std::size_t best_tp = 0;
  // Positive literals are scanned before negated ones so equal scores keep
  // the positive literal, then the lower column.
  for (bool negated : {false, true}) {
    for (std::size_t c = 0; c < d; ++c) {
      if (c < used.size() && used[c]) continue;
      const std::size_t tp = negated ? p - pos_ones[c] : pos_ones[c];
      const std::size_t fp = negated ? n - neg_ones[c] : neg_ones[c];
      if (tp == 0) continue;
      if (n == 0) {
        if (!best || tp > best_tp) {
          best = LiteralChoice{{c, negated}, 0.0};
          best_tp = tp;
        }
        continue;
      }
      // Covered positive rate must beat the base rate: tp/(tp+fp) > p/(p+n).
      if (tp * (p + n) <= p * (tp + fp)) continue;
      const double gain = information_gain(tp, fp, p, n);
      if (!(gain > kGainTolerance)) continue;
      if (!best || gain > best->gain + kGainTolerance) {
        best = LiteralChoice{{c, negated}, gain};
      }
    }
  }
  return best;
}

namespace {

class Learner {
 public:
  Learner(const BinaryConceptTable& table, const FoldParams& params, RuleSet& defs)
      : table_(table), params_(params), defs_(defs), threshold_(params.tail_threshold(table.rows)) {}

  std::optional<Rule> learn_rule(std::span<const std::size_t> pos, std::span<const std::size_t> neg,
                                 std::size_t depth, std::vector<bool> used) {
    Rule rule;
    std::vector<std::size_t> tp(pos.begin(), pos.end());
    std::vector<std::size_t> fp(neg.begin(), neg.end());
    while (true) {
      auto choice = best_literal(table_, tp, fp, used);
      if (!choice) break;
      const Literal lit = choice->literal;
      rule.body.push_back(lit);
      used[lit.neuron] = true;
      auto keep = [&](std::size_t r) { return (table_.bit(r, lit.neuron)) != lit.negated; };
      std::erase_if(tp, [&](std::size_t r) { return !keep(r); });
      std::erase_if(fp, [&](std::size_t r) { return !keep(r); });
      if (fp.empty() || within_ratio(fp.size(), tp.size())) break;
    }
    if (rule.body.empty()) return std::nullopt;
    if (fp.empty()) return rule;
    if (!within_ratio(fp.size(), tp.size())) return std::nullopt;
    if (depth >= params_.max_exception_depth) return rule;

    const AbId id = next_id();
    defs_.abnormal[id];
    auto exceptions = cover(fp, tp, depth + 1, used);
    if (exceptions.empty()) {
      defs_.abnormal.erase(id);
    } else {
      defs_.abnormal[id] = std::move(exceptions);
      rule.exceptions.push_back(id);
    }
    return rule;
  }

  // Sequential covering of `pos` against `neg`; used for exception predicates.
  std::vector<Rule> cover(std::span<const std::size_t> pos, std::span<const std::size_t> neg,
                          std::size_t depth, const std::vector<bool>& used) {
    std::vector<Rule> rules;
    std::vector<std::size_t> remaining(pos.begin(), pos.end());
    while (!remaining.empty() && static_cast<double>(remaining.size()) >= threshold_) {
      const AbId mark = next_id();
      auto rule = learn_rule(remaining, neg, depth, used);
      if (!rule) break;
      std::vector<std::size_t> covered;
      for (std::size_t r : remaining) {
        if (rule_holds(defs_, *rule, table_.row(r))) covered.push_back(r);
      }
      if (covered.empty() || static_cast<double>(covered.size()) < threshold_) {
        rollback(mark);
        break;
      }
      std::erase_if(remaining, [&](std::size_t r) { return rule_holds(defs_, *rule, table_.row(r)); });
      rules.push_back(std::move(*rule));
    }
    return rules;
  }

  AbId next_id() const { return defs_.abnormal.empty() ? 1 : defs_.abnormal.rbegin()->first + 1; }

  void rollback(AbId mark) {
    defs_.abnormal.erase(defs_.abnormal.lower_bound(mark), defs_.abnormal.end());
  }

  double threshold() const { return threshold_; }

 private:
  bool within_ratio(std::size_t fp, std::size_t tp) const {
    return static_cast<double>(fp) <= params_.ratio * static_cast<double>(tp);
  }

  const BinaryConceptTable& table_;
  const FoldParams& params_;
  RuleSet& defs_;
  double threshold_;
};

}  // namespace

std::optional<Rule> learn_rule(const BinaryConceptTable& table, std::span<const std::size_t> pos,
                               std::span<const std::size_t> neg, const FoldParams& params,
                               std::size_t depth, RuleSet& defs) {
  params.validate();
  if (pos.empty()) throw std::invalid_argument("learn_rule needs at least one positive example");
  Learner learner(table, params, defs);
  return learner.learn_rule(pos, neg, depth, std::vector<bool>(table.columns(), false));
}

RuleSet learn(const BinaryConceptTable& table, const FoldParams& params) {
  params.validate();
  table.validate();
  if (table.rows == 0) throw std::invalid_argument("cannot learn rules from an empty table");
  std::vector<bool> present(table.class_names.size(), false);
  for (ClassId c : table.labels) present[c] = true;
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw std::invalid_argument("rule learning needs examples of at least two classes");
  }

  RuleSet rs;
  rs.neuron_names = table.neuron_names;
  rs.class_names = table.class_names;
  Learner learner(table, params, rs);
  const double threshold = learner.threshold();

  std::vector<std::size_t> remaining(table.rows);
  for (std::size_t r = 0; r < table.rows; ++r) remaining[r] = r;

  while (!remaining.empty() && static_cast<double>(remaining.size()) >= threshold) {
    std::vector<std::size_t> counts(table.class_names.size(), 0);
    for (std::size_t r : remaining) ++counts[table.labels[r]];
    std::vector<ClassId> order;
    for (ClassId c = 0; c < counts.size(); ++c) {
      if (counts[c] > 0) order.push_back(c);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](ClassId a, ClassId b) { return counts[a] > counts[b]; });

    bool progressed = false;
    for (ClassId c : order) {
      if (static_cast<double>(counts[c]) < threshold) continue;
      std::vector<std::size_t> pos, neg;
      for (std::size_t r : remaining) (table.labels[r] == c ? pos : neg).push_back(r);
      const AbId mark = learner.next_id();
      auto rule = learner.learn_rule(pos, neg, 0, std::vector<bool>(table.columns(), false));
      if (!rule) continue;
      std::size_t covered = 0;
      for (std::size_t r : pos) covered += rule_holds(rs, *rule, table.row(r)) ? 1 : 0;
      if (covered == 0 || static_cast<double>(covered) < threshold) {
        learner.rollback(mark);
        continue;
      }
      std::erase_if(remaining, [&](std::size_t r) { return rule_holds(rs, *rule, table.row(r)); });
      rs.rules.push_back({c, std::move(*rule)});
      progressed = true;
      break;
    }
    if (!progressed) break;
  }
  return rs;
}

}  // namespace nesyvit
