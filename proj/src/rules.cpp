#include "nesyvit/rules.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

#include "nesyvit/io.hpp"

namespace nesyvit {

std::string ab_name(AbId id) { return "ab" + std::to_string(id); }

bool is_ab_name(std::string_view name) {
  if (name.size() < 3 || name.substr(0, 2) != "ab") return false;
  return std::all_of(name.begin() + 2, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_predicate_name(std::string_view name) {
  if (name.empty() || name == "not" || is_ab_name(name)) return false;
  if (std::isupper(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<AbId> RuleSet::stratified_order() const {
  enum class Mark { none, active, done };
  std::map<AbId, Mark> mark;
  std::vector<AbId> order;
  std::vector<AbId> path;
  std::function<void(AbId)> visit = [&](AbId id) {
    auto def = abnormal.find(id);
    if (def == abnormal.end()) throw FormatError(ab_name(id) + " is used but never defined");
    Mark& m = mark[id];
    if (m == Mark::done) return;
    if (m == Mark::active) {
      std::string cycle;
      auto start = std::find(path.begin(), path.end(), id);
      for (auto it = start; it != path.end(); ++it) cycle += ab_name(*it) + " -> ";
      throw FormatError("exception predicates are not stratified: " + cycle + ab_name(id));
    }
    m = Mark::active;
    path.push_back(id);
    for (const Rule& r : def->second) {
      for (AbId dep : r.exceptions) visit(dep);
    }
    path.pop_back();
    mark[id] = Mark::done;
    order.push_back(id);
  };
  for (const auto& [id, rules] : abnormal) visit(id);
  return order;
}

void RuleSet::validate() const {
  auto check_rule = [&](const Rule& r, const std::string& where) {
    std::set<std::size_t> seen;
    for (const Literal& l : r.body) {
      if (l.neuron >= neuron_names.size()) {
        throw FormatError(where + " refers to neuron " + std::to_string(l.neuron) +
                          " but only " + std::to_string(neuron_names.size()) + " exist");
      }
      if (!seen.insert(l.neuron).second) {
        throw FormatError(where + " uses " + neuron_names[l.neuron] + " twice");
      }
    }
    std::set<AbId> abs;
    for (AbId id : r.exceptions) {
      if (!abnormal.count(id)) throw FormatError(where + " refers to undefined " + ab_name(id));
      if (!abs.insert(id).second) throw FormatError(where + " uses " + ab_name(id) + " twice");
    }
  };
  for (std::size_t k = 0; k < rules.size(); ++k) {
    if (rules[k].head >= class_names.size()) {
      throw FormatError("rule " + std::to_string(k + 1) + " concludes an unknown class");
    }
    check_rule(rules[k].rule, "rule " + std::to_string(k + 1));
  }
  for (const auto& [id, defs] : abnormal) {
    for (const Rule& r : defs) check_rule(r, ab_name(id));
  }
  std::set<std::string> names;
  for (const auto& n : neuron_names) {
    if (!is_predicate_name(n)) throw FormatError("'" + n + "' is not a valid predicate name");
    if (!names.insert(n).second) throw FormatError("neuron name '" + n + "' is not unique");
  }
  stratified_order();
}

bool ab_holds(const RuleSet& rs, AbId id, std::span<const std::uint8_t> bits) {
  auto it = rs.abnormal.find(id);
  if (it == rs.abnormal.end()) return false;
  for (const Rule& r : it->second) {
    if (rule_holds(rs, r, bits)) return true;
  }
  return false;
}

bool rule_holds(const RuleSet& rs, const Rule& rule, std::span<const std::uint8_t> bits) {
  for (const Literal& l : rule.body) {
    if ((bits[l.neuron] != 0) == l.negated) return false;
  }
  for (AbId id : rule.exceptions) {
    if (ab_holds(rs, id, bits)) return false;
  }
  return true;
}

namespace {

std::string render_body(const RuleSet& rs, const Rule& rule) {
  std::string out;
  auto add = [&](const std::string& lit) {
    out += out.empty() ? " :- " : ", ";
    out += lit;
  };
  for (const Literal& l : rule.body) {
    add((l.negated ? "not " : "") + rs.neuron_names[l.neuron] + "(X)");
  }
  for (AbId id : rule.exceptions) add("not " + ab_name(id) + "(X)");
  return out + ".";
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

}  // namespace

std::string render_rule(const RuleSet& rs, const ClassRule& rule) {
  return "target(X," + quote(rs.class_names[rule.head]) + ")" + render_body(rs, rule.rule);
}

std::string render_ab_rule(const RuleSet& rs, AbId id, const Rule& rule) {
  return ab_name(id) + "(X)" + render_body(rs, rule);
}

std::string serialize(const RuleSet& rs, const std::vector<std::string>& header_comments) {
  rs.validate();
  std::ostringstream out;
  for (const auto& c : header_comments) out << "% " << c << '\n';
  out << "%! classes";
  for (const auto& c : rs.class_names) {
    if (c.find('\'') != std::string::npos || c.find('\n') != std::string::npos) {
      throw std::invalid_argument("class name '" + c + "' cannot be quoted");
    }
    out << ' ' << quote(c);
  }
  out << "\n%! neurons";
  for (const auto& n : rs.neuron_names) out << ' ' << n;
  out << '\n';
  for (const auto& r : rs.rules) out << render_rule(rs, r) << '\n';
  for (const auto& [id, defs] : rs.abnormal) {
    for (const Rule& r : defs) out << render_ab_rule(rs, id, r) << '\n';
  }
  return out.str();
}

namespace {

enum class Tok { ident, quoted, lparen, rparen, comma, implies, dot, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    const std::size_t line = line_;
    const std::size_t col = col_;
    if (pos_ >= text_.size()) return {Tok::end, "", line, col};
    const char c = text_[pos_];
    if (c == '(') return single(Tok::lparen);
    if (c == ')') return single(Tok::rparen);
    if (c == ',') return single(Tok::comma);
    if (c == '.') return single(Tok::dot);
    if (c == ':') {
      if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        advance();
        advance();
        return {Tok::implies, ":-", line, col};
      }
      throw FormatError("expected ':-'", line, col);
    }
    if (c == '\'' || c == '"' || c == '`') {
      const char close = c == '`' ? '\'' : c;
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != close) {
        if (text_[pos_] == '\n') throw FormatError("unterminated quoted name", line, col);
        s += text_[pos_];
        advance();
      }
      if (pos_ >= text_.size()) throw FormatError("unterminated quoted name", line, col);
      advance();
      return {Tok::quoted, s, line, col};
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        s += text_[pos_];
        advance();
      }
      return {Tok::ident, s, line, col};
    }
    throw FormatError(std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  Token single(Tok kind) {
    Token t{kind, std::string(1, text_[pos_]), line_, col_};
    advance();
    return t;
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

struct RawLiteral {
  std::string name;
  bool negated;
  std::size_t line;
  std::size_t column;
};

struct RawRule {
  bool is_ab = false;
  AbId ab = 0;
  std::string cls;
  std::vector<RawLiteral> body;
  std::size_t line = 0;
  std::size_t column = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { advance(); }

  std::vector<RawRule> rules() {
    std::vector<RawRule> out;
    while (cur_.kind != Tok::end) out.push_back(rule());
    return out;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(what, cur_.line, cur_.column);
  }

  Token expect(Tok kind, const char* what) {
    if (cur_.kind != kind) {
      fail(std::string("expected ") + what +
           (cur_.kind == Tok::end ? ", found end of input" : ", found '" + cur_.text + "'"));
    }
    Token t = cur_;
    advance();
    return t;
  }

  void variable() {
    Token v = expect(Tok::ident, "a variable");
    if (!std::isupper(static_cast<unsigned char>(v.text.front()))) {
      throw FormatError("expected a variable, found '" + v.text + "'", v.line, v.column);
    }
  }

  RawRule rule() {
    RawRule r;
    r.line = cur_.line;
    r.column = cur_.column;
    Token head = expect(Tok::ident, "a rule head");
    expect(Tok::lparen, "'('");
    variable();
    if (head.text == "target" || head.text == "label") {
      expect(Tok::comma, "','");
      if (cur_.kind != Tok::quoted && cur_.kind != Tok::ident) fail("expected a class name");
      r.cls = cur_.text;
      if (r.cls.empty()) fail("empty class name");
      advance();
    } else if (is_ab_name(head.text)) {
      r.is_ab = true;
      r.ab = std::stoull(head.text.substr(2));
    } else {
      throw FormatError("rule head must be target/2, label/2 or abN/1, found '" + head.text + "'",
                        head.line, head.column);
    }
    expect(Tok::rparen, "')'");
    if (cur_.kind == Tok::implies) {
      advance();
      while (true) {
        r.body.push_back(literal());
        if (cur_.kind == Tok::comma) {
          advance();
          continue;
        }
        break;
      }
    }
    expect(Tok::dot, "'.' to end the rule");
    return r;
  }

  RawLiteral literal() {
    RawLiteral l{"", false, cur_.line, cur_.column};
    Token name = expect(Tok::ident, "a predicate");
    if (name.text == "not") {
      l.negated = true;
      name = expect(Tok::ident, "a predicate after 'not'");
    }
    if (name.text == "not" || std::isupper(static_cast<unsigned char>(name.text.front()))) {
      throw FormatError("'" + name.text + "' is not a predicate name", name.line, name.column);
    }
    l.name = name.text;
    expect(Tok::lparen, "'('");
    variable();
    expect(Tok::rparen, "')'");
    return l;
  }

  Lexer lex_;
  Token cur_{Tok::end, "", 0, 0};
};

struct Directives {
  std::optional<std::vector<std::string>> classes;
  std::optional<std::vector<std::string>> neurons;
};

Directives read_directives(std::string_view text) {
  Directives d;
  std::size_t number = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++number;
    auto line = detail::trim(raw);
    if (line.substr(0, 2) != "%!") continue;
    std::istringstream words{std::string(line.substr(2))};
    std::string kind;
    words >> kind;
    std::vector<std::string> items;
    if (kind == "classes") {
      Lexer lex(line.substr(2 + line.substr(2).find("classes") + 7));
      for (Token t = lex.next(); t.kind != Tok::end; t = lex.next()) {
        if (t.kind != Tok::quoted && t.kind != Tok::ident) {
          throw FormatError("malformed classes directive", number);
        }
        items.push_back(t.text);
      }
      d.classes = std::move(items);
    } else if (kind == "neurons") {
      std::string w;
      while (words >> w) items.push_back(w);
      d.neurons = std::move(items);
    } else {
      throw FormatError("unknown directive '" + kind + "'", number);
    }
  }
  return d;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

// Neuron columns inferred from the predicate names in the text.
std::vector<std::string> infer_neurons(const std::vector<RawRule>& raw) {
  std::vector<std::string> seen;
  std::set<std::string> unique;
  for (const auto& r : raw) {
    for (const auto& l : r.body) {
      if (!is_ab_name(l.name) && unique.insert(l.name).second) seen.push_back(l.name);
    }
  }
  const bool plain = std::all_of(seen.begin(), seen.end(), [](const std::string& s) { return all_digits(s); });
  const bool prefixed = std::all_of(seen.begin(), seen.end(), [](const std::string& s) {
    return s.size() > 1 && s[0] == 'n' && all_digits(std::string_view(s).substr(1));
  });
  if (seen.empty() || !(plain || prefixed)) return seen;
  std::size_t count = 0;
  for (const auto& s : seen) count = std::max<std::size_t>(count, std::stoull(plain ? s : s.substr(1)) + 1);
  std::vector<std::string> names(count);
  for (std::size_t j = 0; j < count; ++j) names[j] = (plain ? "" : "n") + std::to_string(j);
  return names;
}

RuleSet build(const std::vector<RawRule>& raw, const Directives& dirs,
              const std::vector<std::string>& neuron_names) {
  RuleSet rs;
  rs.neuron_names = neuron_names;
  std::map<std::string, std::size_t> neuron_index;
  for (std::size_t j = 0; j < neuron_names.size(); ++j) {
    if (!neuron_index.emplace(neuron_names[j], j).second) {
      throw FormatError("neuron name '" + neuron_names[j] + "' is listed twice");
    }
  }
  std::map<std::string, ClassId> class_index;
  if (dirs.classes) {
    for (const auto& c : *dirs.classes) {
      if (!class_index.emplace(c, rs.class_names.size()).second) {
        throw FormatError("class '" + c + "' is listed twice");
      }
      rs.class_names.push_back(c);
    }
  }

  auto convert = [&](const RawRule& r) {
    Rule out;
    std::set<std::string> used;
    for (const auto& l : r.body) {
      if (!used.insert(l.name).second) {
        throw FormatError("predicate '" + l.name + "' appears twice in one body", l.line, l.column);
      }
      if (is_ab_name(l.name)) {
        if (!l.negated) {
          throw FormatError(l.name + " may only appear negated", l.line, l.column);
        }
        out.exceptions.push_back(std::stoull(l.name.substr(2)));
        continue;
      }
      auto it = neuron_index.find(l.name);
      if (it == neuron_index.end()) {
        throw FormatError("unknown predicate '" + l.name + "'", l.line, l.column);
      }
      out.body.push_back({it->second, l.negated});
    }
    return out;
  };

  for (const auto& r : raw) {
    if (r.is_ab) {
      rs.abnormal[r.ab].push_back(convert(r));
      continue;
    }
    auto it = class_index.find(r.cls);
    if (it == class_index.end()) {
      if (dirs.classes) throw FormatError("unknown class '" + r.cls + "'", r.line, r.column);
      it = class_index.emplace(r.cls, rs.class_names.size()).first;
      rs.class_names.push_back(r.cls);
    }
    rs.rules.push_back({it->second, convert(r)});
  }

  for (const auto& r : raw) {
    for (const auto& l : r.body) {
      if (is_ab_name(l.name) && !rs.abnormal.count(std::stoull(l.name.substr(2)))) {
        throw FormatError(l.name + " is used but never defined", l.line, l.column);
      }
    }
  }
  rs.validate();
  return rs;
}

}  // namespace

RuleSet parse_rules(std::string_view text) {
  Directives dirs = read_directives(text);
  auto raw = Parser(text).rules();
  std::vector<std::string> neurons = dirs.neurons ? *dirs.neurons : infer_neurons(raw);
  return build(raw, dirs, neurons);
}

RuleSet parse_rules(std::string_view text, const std::vector<std::string>& neuron_names) {
  Directives dirs = read_directives(text);
  auto raw = Parser(text).rules();
  return build(raw, dirs, neuron_names);
}

namespace {

std::string canonical(const RuleSet& rs, const Rule& r) {
  std::string out;
  for (const Literal& l : r.body) out += (l.negated ? "~" : "") + rs.neuron_names[l.neuron] + ",";
  for (AbId id : r.exceptions) {
    out += "~{";
    for (const Rule& sub : rs.abnormal.at(id)) out += canonical(rs, sub) + ";";
    out += "},";
  }
  return out;
}

}  // namespace

bool same_rules(const RuleSet& a, const RuleSet& b) {
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t k = 0; k < a.rules.size(); ++k) {
    if (a.class_names[a.rules[k].head] != b.class_names[b.rules[k].head]) return false;
    if (canonical(a, a.rules[k].rule) != canonical(b, b.rules[k].rule)) return false;
  }
  return true;
}

}  // namespace nesyvit
