#pragma once

// Text format for problem specifications.
//
//   % comment
//   relation R(A, B).
//   fact R(i1; a4, a3).                 NULL is reserved for null cells
//   dc k : S(x), R(x, y), S(y).         bare identifiers in bodies are variables,
//   query q(x) : S(x), x != "a1".       constants are quoted strings or numbers
//   query qk() : S(x), R(x, y), S(y).
//   view secret v(x, y) : S(x), R(x, y), S(y).
//   feature f1 : {0, 1}.
//   classifier (1, 0) -> 1.
//   classifier default 0.               fills every row not listed
//   entity e1 : (1, 1).

#include <cctype>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "repairkit/error.hpp"
#include "repairkit/relational.hpp"
#include "repairkit/spec.hpp"

namespace repairkit {

namespace detail {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLocation where;
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::vector<Token> tokenize_spec(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    SourceLocation here{line, col};
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), here});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({Tok::Number, std::string(text.substr(i, j - i)), here});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size()) {
        if (text[j] == '\\' && j + 1 < text.size()) {
          value += text[j + 1];
          j += 2;
          continue;
        }
        if (text[j] == '"') {
          closed = true;
          break;
        }
        if (text[j] == '\n') break;
        value += text[j++];
      }
      if (!closed) throw Error(ErrorKind::SyntaxError, "unterminated string", here);
      out.push_back({Tok::String, value, here});
      advance(j + 1 - i);
      continue;
    }
    if (text.substr(i, 3) == "\xE2\x89\xA0") {  // ≠
      out.push_back({Tok::Punct, "!=", here});
      i += 3;
      ++col;
      continue;
    }
    if (text.substr(i, 2) == "!=" || text.substr(i, 2) == "->") {
      out.push_back({Tok::Punct, std::string(text.substr(i, 2)), here});
      advance(2);
      continue;
    }
    if (std::string_view("().,;:{}=").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), here});
      advance(1);
      continue;
    }
    throw Error(ErrorKind::SyntaxError, std::string("unexpected character '") + c + "'", here);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

// Raw statements, resolved against the schema once the whole text is read.
struct RawFact {
  std::string relation;
  std::string tid;
  std::vector<Value> values;
  SourceLocation where;
};

struct RawRule {
  std::string name;
  std::vector<std::string> head;
  RuleBody body;
  SourceLocation where;
};

struct RawRow {
  bool is_default = false;
  std::vector<std::string> values;
  int label = 0;
  SourceLocation where;
};

struct RawEntity {
  EntityRecord record;
  SourceLocation where;
};

struct RawFeature {
  Feature feature;
  SourceLocation where;
};

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : toks_(tokenize_spec(text)) {}

  void parse_all() {
    while (peek().kind != Tok::End) statement();
  }

  std::vector<std::pair<RelationSchema, SourceLocation>> relations;
  std::vector<RawFact> facts;
  std::vector<RawRule> dcs;
  std::vector<RawRule> queries;
  std::vector<RawRule> views;
  std::vector<RawFeature> features;
  std::vector<RawRow> rows;
  std::vector<RawEntity> entities;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }

  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  bool accept(std::string_view punct) {
    if (peek().kind == Tok::Punct && peek().text == punct) {
      next();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) {
      throw Error(ErrorKind::SyntaxError,
                  "expected '" + std::string(punct) + "' but found " + describe(peek()), peek().where);
    }
  }

  Token expect_ident(std::string_view what) {
    if (peek().kind != Tok::Ident) {
      throw Error(ErrorKind::SyntaxError,
                  "expected " + std::string(what) + " but found " + describe(peek()), peek().where);
    }
    return next();
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::String: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  // Values of facts, features and entities; identifiers are constants here.
  Value value() {
    const Token t = next();
    switch (t.kind) {
      case Tok::Ident:
        if (t.text == "NULL") return Value::null();
        return Value::constant(t.text);
      case Tok::Number:
      case Tok::String:
        return Value::constant(t.text);
      default:
        throw Error(ErrorKind::SyntaxError, "expected a value but found " + describe(t), t.where);
    }
  }

  std::string symbol(std::string_view what) {
    const Token t = peek();
    Value v = value();
    if (v.is_null()) throw Error(ErrorKind::SyntaxError, "NULL is not allowed in " + std::string(what), t.where);
    return v.symbol();
  }

  Term term() {
    const Token t = next();
    switch (t.kind) {
      case Tok::Ident:
        if (t.text == "NULL") {
          throw Error(ErrorKind::SyntaxError, "NULL cannot appear in a rule body", t.where);
        }
        return Term::variable(t.text);
      case Tok::Number:
      case Tok::String:
        return Term::constant(t.text);
      default:
        throw Error(ErrorKind::SyntaxError, "expected a term but found " + describe(t), t.where);
    }
  }

  void literal(RuleBody& body) {
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "(") {
      Atom atom;
      atom.relation = next().text;
      expect("(");
      do {
        atom.args.push_back(term());
      } while (accept(","));
      expect(")");
      body.atoms.push_back(std::move(atom));
      return;
    }
    const Token start = peek();
    Comparison cmp;
    cmp.left = term();
    if (accept("=")) {
      cmp.op = CompareOp::Equal;
    } else if (accept("!=")) {
      cmp.op = CompareOp::NotEqual;
    } else {
      throw Error(ErrorKind::SyntaxError, "expected an atom or a comparison", start.where);
    }
    cmp.right = term();
    if (!cmp.left.is_variable() && !cmp.right.is_variable()) {
      const bool same = cmp.left.name == cmp.right.name;
      const bool holds = cmp.op == CompareOp::Equal ? same : !same;
      if (!holds) body.contradictory = true;
      return;
    }
    body.comparisons.push_back(std::move(cmp));
  }

  RuleBody body() {
    RuleBody out;
    do {
      literal(out);
    } while (accept(","));
    expect(".");
    return out;
  }

  RuleBody body_until_end() {
    RuleBody out;
    do {
      literal(out);
    } while (accept(","));
    accept(".");
    if (peek().kind != Tok::End) {
      throw Error(ErrorKind::SyntaxError, "unexpected " + describe(peek()), peek().where);
    }
    return out;
  }

  std::vector<std::string> head_vars() {
    std::vector<std::string> out;
    if (!accept("(")) return out;
    if (accept(")")) return out;
    do {
      const Token t = expect_ident("a head variable");
      out.push_back(t.text);
    } while (accept(","));
    expect(")");
    return out;
  }

  RawRule named_rule(const Token& keyword, bool with_head) {
    RawRule r;
    r.where = keyword.where;
    r.name = expect_ident("a name").text;
    if (with_head) r.head = head_vars();
    expect(":");
    r.body = body();
    return r;
  }

  void statement() {
    const Token kw = expect_ident("a statement keyword");
    if (kw.text == "relation") {
      RelationSchema rel;
      rel.name = expect_ident("a relation name").text;
      expect("(");
      do {
        rel.attributes.push_back(expect_ident("an attribute name").text);
      } while (accept(","));
      expect(")");
      expect(".");
      relations.emplace_back(std::move(rel), kw.where);
    } else if (kw.text == "fact") {
      RawFact f;
      f.where = kw.where;
      f.relation = expect_ident("a relation name").text;
      expect("(");
      f.tid = expect_ident("a tuple id").text;
      expect(";");
      do {
        f.values.push_back(value());
      } while (accept(","));
      expect(")");
      expect(".");
      facts.push_back(std::move(f));
    } else if (kw.text == "dc") {
      dcs.push_back(named_rule(kw, false));
    } else if (kw.text == "query") {
      queries.push_back(named_rule(kw, true));
    } else if (kw.text == "view") {
      const Token s = expect_ident("'secret'");
      if (s.text != "secret") throw Error(ErrorKind::SyntaxError, "expected 'secret' after 'view'", s.where);
      views.push_back(named_rule(kw, true));
    } else if (kw.text == "feature") {
      RawFeature f;
      f.where = kw.where;
      f.feature.name = expect_ident("a feature name").text;
      expect(":");
      expect("{");
      do {
        f.feature.domain.push_back(symbol("a feature domain"));
      } while (accept(","));
      expect("}");
      expect(".");
      features.push_back(std::move(f));
    } else if (kw.text == "classifier") {
      RawRow row;
      row.where = kw.where;
      if (peek().kind == Tok::Ident && peek().text == "default") {
        next();
        row.is_default = true;
      } else {
        expect("(");
        do {
          row.values.push_back(symbol("a classifier row"));
        } while (accept(","));
        expect(")");
        expect("->");
      }
      const Token label = next();
      if (label.kind != Tok::Number || (label.text != "0" && label.text != "1")) {
        throw Error(ErrorKind::SyntaxError, "classifier labels are 0 or 1", label.where);
      }
      row.label = label.text == "1" ? 1 : 0;
      expect(".");
      rows.push_back(std::move(row));
    } else if (kw.text == "entity") {
      RawEntity e;
      e.where = kw.where;
      e.record.id = expect_ident("an entity id").text;
      expect(":");
      expect("(");
      do {
        e.record.values.push_back(symbol("an entity"));
      } while (accept(","));
      expect(")");
      expect(".");
      entities.push_back(std::move(e));
    } else {
      throw Error(ErrorKind::SyntaxError, "unknown statement '" + kw.text + "'", kw.where);
    }
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline void check_body(const RuleBody& body, const Schema& schema, const std::string& owner,
                       SourceLocation where) {
  if (body.atoms.empty()) {
    throw Error(ErrorKind::SyntaxError, owner + " needs at least one relational atom", where);
  }
  for (const auto& a : body.atoms) {
    const auto* rel = schema.find(a.relation);
    if (rel == nullptr) throw Error(ErrorKind::UnknownRelation, "unknown relation '" + a.relation + "' in " + owner, where);
    if (rel->arity() != a.args.size()) {
      throw Error(ErrorKind::ArityMismatch,
                  "'" + a.relation + "' has arity " + std::to_string(rel->arity()) + " but is used with " +
                      std::to_string(a.args.size()) + " arguments in " + owner,
                  where);
    }
  }
  const auto vars = body.occurrences();
  for (const auto& v : body.comparison_variables()) {
    if (!vars.count(v)) {
      throw Error(ErrorKind::UnsafeRule, "variable '" + v + "' of a comparison in " + owner +
                                             " does not occur in a relational atom",
                  where);
    }
  }
}

inline ConjunctiveQuery resolve_query(const RawRule& raw, const Schema& schema, bool secret) {
  const std::string owner = (secret ? "view '" : "query '") + raw.name + "'";
  check_body(raw.body, schema, owner, raw.where);
  const auto vars = raw.body.occurrences();
  for (const auto& h : raw.head) {
    if (!vars.count(h)) {
      throw Error(ErrorKind::UnsafeRule, "head variable '" + h + "' of " + owner + " does not occur in its body",
                  raw.where);
    }
  }
  return ConjunctiveQuery{raw.name, raw.head, raw.body, secret};
}

inline void for_each_vector(const std::vector<Feature>& features,
                            const std::function<void(const std::vector<std::string>&)>& fn) {
  if (features.empty()) return;
  std::vector<std::size_t> idx(features.size(), 0);
  std::vector<std::string> current(features.size());
  while (true) {
    for (std::size_t i = 0; i < features.size(); ++i) current[i] = features[i].domain[idx[i]];
    fn(current);
    std::size_t k = features.size();
    while (k > 0) {
      --k;
      if (++idx[k] < features[k].domain.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

inline bool in_domains(const std::vector<Feature>& features, const std::vector<std::string>& values) {
  if (values.size() != features.size()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& d = features[i].domain;
    if (std::find(d.begin(), d.end(), values[i]) == d.end()) return false;
  }
  return true;
}

inline bool is_plain_identifier(const std::string& s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

inline bool is_number(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Facts, domains and entities: identifiers and numbers are written bare.
inline std::string render_value(const Value& v) {
  if (v.is_null()) return "NULL";
  const auto& s = v.symbol();
  if ((is_plain_identifier(s) && s != "NULL") || is_number(s)) return s;
  return quote(s);
}

// Rule bodies: only numbers are bare, since identifiers denote variables.
inline std::string render_term(const Term& t) {
  if (t.is_variable()) return t.name;
  return is_number(t.name) ? t.name : quote(t.name);
}

inline std::string render_body(const RuleBody& body) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += ", ";
  };
  for (const auto& a : body.atoms) {
    sep();
    out += a.relation + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) out += ", ";
      out += render_term(a.args[i]);
    }
    out += ")";
  }
  for (const auto& c : body.comparisons) {
    sep();
    out += render_term(c.left) + (c.op == CompareOp::Equal ? " = " : " != ") + render_term(c.right);
  }
  if (body.contradictory) {
    sep();
    out += "0 != 0";
  }
  return out;
}

}  // namespace detail

/// Parses and resolves a whole specification.
/// Errors: SyntaxError, UnknownRelation, ArityMismatch, UnsafeRule,
/// DuplicateName, DuplicateTid, OutOfDomain, InvalidSchema.
inline ProblemSpec parse_spec(std::string_view text) {
  detail::SpecParser p(text);
  p.parse_all();

  Schema schema;
  for (auto& [rel, where] : p.relations) {
    try {
      schema.add_relation(rel);
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail(), where);
    }
  }

  ProblemSpec spec;
  Instance instance(schema);
  for (const auto& f : p.facts) {
    try {
      instance = insert(instance, Tuple{Tid{f.tid}, f.relation, f.values});
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail(), f.where);
    }
  }
  spec.instance = std::move(instance);

  std::set<std::string> dc_names;
  for (const auto& raw : p.dcs) {
    if (!dc_names.insert(raw.name).second) {
      throw Error(ErrorKind::DuplicateName, "denial constraint '" + raw.name + "' declared twice", raw.where);
    }
    detail::check_body(raw.body, schema, "dc '" + raw.name + "'", raw.where);
    spec.constraints.push_back(DenialConstraint{raw.name, raw.body});
  }

  std::set<std::string> query_names;
  for (const auto& raw : p.queries) {
    if (!query_names.insert(raw.name).second) {
      throw Error(ErrorKind::DuplicateName, "query '" + raw.name + "' declared twice", raw.where);
    }
    spec.queries.push_back(detail::resolve_query(raw, schema, false));
  }
  for (const auto& raw : p.views) {
    if (!query_names.insert(raw.name).second) {
      throw Error(ErrorKind::DuplicateName, "view '" + raw.name + "' reuses a query or view name", raw.where);
    }
    spec.views.push_back(detail::resolve_query(raw, schema, true));
  }

  auto& cls = spec.classifier;
  std::set<std::string> feature_names;
  for (const auto& f : p.features) {
    if (!feature_names.insert(f.feature.name).second) {
      throw Error(ErrorKind::DuplicateName, "feature '" + f.feature.name + "' declared twice", f.where);
    }
    std::set<std::string> seen;
    for (const auto& v : f.feature.domain) {
      if (!seen.insert(v).second) {
        throw Error(ErrorKind::DuplicateName, "value '" + v + "' repeated in the domain of '" + f.feature.name + "'",
                    f.where);
      }
    }
    cls.features.push_back(f.feature);
  }

  std::optional<int> default_label;
  for (const auto& row : p.rows) {
    if (cls.features.empty()) {
      throw Error(ErrorKind::SyntaxError, "classifier rows need declared features", row.where);
    }
    if (row.is_default) {
      if (default_label) throw Error(ErrorKind::DuplicateName, "second classifier default", row.where);
      default_label = row.label;
      continue;
    }
    if (row.values.size() != cls.features.size()) {
      throw Error(ErrorKind::ArityMismatch,
                  "classifier row has " + std::to_string(row.values.size()) + " values for " +
                      std::to_string(cls.features.size()) + " features",
                  row.where);
    }
    if (!detail::in_domains(cls.features, row.values)) {
      throw Error(ErrorKind::OutOfDomain, "classifier row lies outside the feature domains", row.where);
    }
    if (!cls.table.emplace(row.values, row.label).second) {
      throw Error(ErrorKind::DuplicateName, "classifier row listed twice", row.where);
    }
  }
  if (!cls.table.empty() || default_label) {
    SourceLocation where = p.rows.empty() ? SourceLocation{} : p.rows.front().where;
    detail::for_each_vector(cls.features, [&](const std::vector<std::string>& v) {
      if (cls.table.count(v)) return;
      if (!default_label) {
        std::string shown;
        for (const auto& s : v) shown += (shown.empty() ? "" : ", ") + s;
        throw Error(ErrorKind::SyntaxError, "classifier table is not total: no label for (" + shown + ")", where);
      }
      cls.table.emplace(v, *default_label);
    });
  }

  std::set<std::string> entity_ids;
  for (const auto& e : p.entities) {
    if (!entity_ids.insert(e.record.id).second) {
      throw Error(ErrorKind::DuplicateName, "entity '" + e.record.id + "' declared twice", e.where);
    }
    if (!detail::in_domains(cls.features, e.record.values)) {
      throw Error(ErrorKind::OutOfDomain, "entity '" + e.record.id + "' lies outside the feature domains", e.where);
    }
    cls.entities.push_back(e.record);
  }
  return spec;
}

/// Parses a query given on its own, either `name(X) : body` or a bare body
/// whose variables, in order of first occurrence, become the head.
inline ConjunctiveQuery parse_inline_query(std::string_view text, const Schema& schema) {
  detail::SpecParser p(text);
  detail::RawRule raw;
  raw.where = p.peek().where;
  const bool named = p.peek().kind == detail::Tok::Ident &&
                     ((p.peek(1).kind == detail::Tok::Punct && p.peek(1).text == ":") ||
                      text.find(':') != std::string_view::npos);
  if (named) {
    raw.name = p.expect_ident("a query name").text;
    raw.head = p.head_vars();
    p.expect(":");
    raw.body = p.body_until_end();
  } else {
    raw.name = "inline";
    raw.body = p.body_until_end();
    raw.head = raw.body.atom_variables();
  }
  return detail::resolve_query(raw, schema, false);
}

/// Canonical text of a specification; `parse_spec(render_spec(s)) == s`.
inline std::string render_spec(const ProblemSpec& spec) {
  using detail::render_value;
  std::string out = "% repairkit problem specification\n";
  for (const auto& rel : spec.schema().relations()) {
    out += "relation " + rel.name + "(";
    for (std::size_t i = 0; i < rel.attributes.size(); ++i) {
      out += (i ? ", " : "") + rel.attributes[i];
    }
    out += ").\n";
  }
  for (const auto& t : spec.instance.tuples()) {
    out += "fact " + t.relation + "(" + t.tid.label + ";";
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      out += (i ? ", " : " ") + render_value(t.values[i]);
    }
    out += ").\n";
  }
  for (const auto& dc : spec.constraints) {
    out += "dc " + dc.name + " : " + detail::render_body(dc.body) + ".\n";
  }
  auto render_query = [&](const ConjunctiveQuery& q) {
    std::string s = q.secret ? "view secret " : "query ";
    s += q.name + "(";
    for (std::size_t i = 0; i < q.head.size(); ++i) s += (i ? ", " : "") + q.head[i];
    s += ") : " + detail::render_body(q.body) + ".\n";
    return s;
  };
  for (const auto& q : spec.queries) out += render_query(q);
  for (const auto& v : spec.views) out += render_query(v);

  const auto& cls = spec.classifier;
  for (const auto& f : cls.features) {
    out += "feature " + f.name + " : {";
    for (std::size_t i = 0; i < f.domain.size(); ++i) {
      out += (i ? ", " : "") + render_value(Value::constant(f.domain[i]));
    }
    out += "}.\n";
  }
  for (const auto& [row, label] : cls.table) {
    out += "classifier (";
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? ", " : "") + render_value(Value::constant(row[i]));
    out += ") -> " + std::to_string(label) + ".\n";
  }
  for (const auto& e : cls.entities) {
    out += "entity " + e.id + " : (";
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      out += (i ? ", " : "") + render_value(Value::constant(e.values[i]));
    }
    out += ").\n";
  }
  return out;
}

}  // namespace repairkit
