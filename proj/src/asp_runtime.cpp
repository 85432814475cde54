#include "nesyvit/asp_runtime.hpp"

#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "nesyvit/io.hpp"

namespace nesyvit {

namespace {

void check_width(const RuleSet& rs, std::span<const std::uint8_t> bits) {
  if (bits.size() != rs.neuron_names.size()) {
    throw DimensionError("bit vector has " + std::to_string(bits.size()) +
                         " entries but the rule-set has " + std::to_string(rs.neuron_names.size()) +
                         " neurons");
  }
}

RuleTrace trace_rule(const RuleSet& rs, const Rule& rule, std::string text,
                     std::span<const std::uint8_t> bits);

std::vector<RuleTrace> trace_ab(const RuleSet& rs, AbId id, std::span<const std::uint8_t> bits,
                                bool& holds) {
  std::vector<RuleTrace> out;
  holds = false;
  for (const Rule& r : rs.abnormal.at(id)) {
    out.push_back(trace_rule(rs, r, render_ab_rule(rs, id, r), bits));
    if (out.back().fired) {
      holds = true;
      break;
    }
  }
  return out;
}

RuleTrace trace_rule(const RuleSet& rs, const Rule& rule, std::string text,
                     std::span<const std::uint8_t> bits) {
  RuleTrace t{std::move(text), {}, true};
  for (const Literal& l : rule.body) {
    LiteralTrace lt;
    lt.text = (l.negated ? "not " : "") + rs.neuron_names[l.neuron] + "(X)";
    lt.holds = (bits[l.neuron] != 0) != l.negated;
    t.literals.push_back(std::move(lt));
    if (!t.literals.back().holds) {
      t.fired = false;
      return t;
    }
  }
  for (AbId id : rule.exceptions) {
    LiteralTrace lt;
    lt.text = "not " + ab_name(id) + "(X)";
    bool ab = false;
    lt.subgoal = trace_ab(rs, id, bits, ab);
    lt.holds = !ab;
    t.literals.push_back(std::move(lt));
    if (!t.literals.back().holds) {
      t.fired = false;
      return t;
    }
  }
  return t;
}

void render_rule_trace(std::ostringstream& out, const RuleTrace& t, int indent, const std::string& tag) {
  out << std::string(indent, ' ') << tag << t.rule << "  [" << (t.fired ? "fires" : "fails") << "]\n";
  for (const auto& l : t.literals) {
    out << std::string(indent + 4, ' ') << l.text << ": " << (l.holds ? "true" : "false") << '\n';
    for (const auto& sub : l.subgoal) render_rule_trace(out, sub, indent + 8, "");
  }
}

}  // namespace

Prediction classify(const RuleSet& rs, std::span<const std::uint8_t> bits) {
  check_width(rs, bits);
  for (std::size_t k = 0; k < rs.rules.size(); ++k) {
    if (rule_holds(rs, rs.rules[k].rule, bits)) return {rs.rules[k].head, k};
  }
  return {};
}

Justification justify(const RuleSet& rs, std::span<const std::uint8_t> bits) {
  check_width(rs, bits);
  Justification j;
  for (std::size_t k = 0; k < rs.rules.size(); ++k) {
    j.rules.push_back(trace_rule(rs, rs.rules[k].rule, render_rule(rs, rs.rules[k]), bits));
    if (j.rules.back().fired) {
      j.prediction = {rs.rules[k].head, k};
      break;
    }
  }
  return j;
}

std::string render(const Justification& j, const RuleSet& rs) {
  std::ostringstream out;
  for (std::size_t k = 0; k < j.rules.size(); ++k) {
    render_rule_trace(out, j.rules[k], 0, "rule " + std::to_string(k + 1) + ": ");
  }
  if (j.prediction.cls) {
    out << "prediction: " << rs.class_names[*j.prediction.cls] << " (rule "
        << *j.prediction.fired_rule + 1 << ")\n";
  } else {
    out << "prediction: none (no rule fires)\n";
  }
  return out.str();
}

double Evaluation::precision(ClassId c) const {
  std::size_t predicted = 0;
  for (const auto& row : confusion) predicted += row[c];
  return predicted == 0 ? 0.0 : static_cast<double>(confusion[c][c]) / static_cast<double>(predicted);
}

double Evaluation::recall(ClassId c) const {
  const std::size_t s = support(c);
  return s == 0 ? 0.0 : static_cast<double>(confusion[c][c]) / static_cast<double>(s);
}

std::size_t Evaluation::support(ClassId c) const {
  std::size_t s = 0;
  for (std::size_t v : confusion[c]) s += v;
  return s;
}

Evaluation evaluate(const RuleSet& rs, const BinaryConceptTable& table) {
  if (table.rows == 0) throw std::invalid_argument("cannot evaluate on an empty table");
  if (table.columns() != rs.neuron_names.size()) {
    throw DimensionError("table has " + std::to_string(table.columns()) +
                         " columns but the rule-set has " + std::to_string(rs.neuron_names.size()) +
                         " neurons");
  }
  std::map<std::string, ClassId> table_class;
  for (ClassId c = 0; c < table.class_names.size(); ++c) table_class[table.class_names[c]] = c;
  std::vector<ClassId> to_table(rs.class_names.size());
  for (ClassId c = 0; c < rs.class_names.size(); ++c) {
    auto it = table_class.find(rs.class_names[c]);
    if (it == table_class.end()) {
      throw DimensionError("rule-set class '" + rs.class_names[c] + "' does not occur in the table");
    }
    to_table[c] = it->second;
  }

  const std::size_t k = table.class_names.size();
  Evaluation ev;
  ev.class_names = table.class_names;
  ev.total = table.rows;
  ev.confusion.assign(k, std::vector<std::size_t>(k + 1, 0));
  for (std::size_t r = 0; r < table.rows; ++r) {
    const Prediction p = classify(rs, table.row(r));
    const ClassId actual = table.labels[r];
    if (!p.cls) {
      ++ev.abstained;
      ++ev.confusion[actual][k];
      continue;
    }
    const ClassId predicted = to_table[*p.cls];
    ++ev.confusion[actual][predicted];
    if (predicted == actual) ++ev.correct;
  }
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

RuleSetStats stats(const RuleSet& rs) {
  RuleSetStats s;
  std::set<std::string> names;
  auto count = [&](const Rule& r) {
    ++s.rules;
    for (const Literal& l : r.body) {
      ++s.size;
      names.insert(rs.neuron_names[l.neuron]);
    }
    for (AbId id : r.exceptions) {
      ++s.size;
      names.insert(ab_name(id));
    }
  };
  for (const auto& r : rs.rules) count(r.rule);
  for (const auto& [id, defs] : rs.abnormal) {
    for (const Rule& r : defs) count(r);
  }
  s.unique_predicates = names.size();
  return s;
}

void write_report(std::ostream& out, const Evaluation& ev) {
  out << "class,precision,recall,support\n";
  for (ClassId c = 0; c < ev.class_names.size(); ++c) {
    out << ev.class_names[c] << ',' << format_real(ev.precision(c)) << ','
        << format_real(ev.recall(c)) << ',' << ev.support(c) << '\n';
  }
  out << "# accuracy=" << format_real(ev.accuracy) << " correct=" << ev.correct
      << " total=" << ev.total << " abstained=" << ev.abstained << '\n';
}

}  // namespace nesyvit
