#pragma once

// Annotated answer-set programs: a small AST, an ASP-Core-2 style renderer,
// and a parser for the same surface syntax.

#include <algorithm>
#include <compare>
#include <cctype>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "repairkit/error.hpp"

namespace repairkit::asp {

struct Term {
  enum class Kind { Variable, Constant, Null };

  Kind kind = Kind::Constant;
  std::string name;  // unused for Null

  static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
  static Term null() { return {Kind::Null, {}}; }

  bool is_variable() const { return kind == Kind::Variable; }

  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool negated = false;

  bool operator==(const Literal&) const = default;
};

enum class CompareOp { Equal, NotEqual };

struct Comparison {
  Term left;
  CompareOp op = CompareOp::NotEqual;
  Term right;

  bool operator==(const Comparison&) const = default;
};

/// `head_1 | ... | head_n :- body.`; an empty head is a hard constraint.
struct Rule {
  std::vector<Atom> head;
  std::vector<Literal> body;
  std::vector<Comparison> comparisons;
  std::vector<std::string> comments;  // emitted as `%` lines before the rule

  bool operator==(const Rule& o) const {
    return head == o.head && body == o.body && comparisons == o.comparisons;
  }
};

/// `:~ body. [weight@level, terms]`
struct WeakConstraint {
  std::vector<Literal> body;
  std::vector<Comparison> comparisons;
  long weight = 1;
  int level = 1;
  std::vector<Term> terms;

  bool operator==(const WeakConstraint&) const = default;
};

struct AnnotatedProgram {
  std::vector<std::string> comments;
  std::vector<Atom> facts;
  std::vector<Rule> rules;
  std::vector<WeakConstraint> weak_constraints;

  bool empty() const { return comments.empty() && facts.empty() && rules.empty() && weak_constraints.empty(); }

  void append(const AnnotatedProgram& other) {
    comments.insert(comments.end(), other.comments.begin(), other.comments.end());
    facts.insert(facts.end(), other.facts.begin(), other.facts.end());
    rules.insert(rules.end(), other.rules.begin(), other.rules.end());
    weak_constraints.insert(weak_constraints.end(), other.weak_constraints.begin(), other.weak_constraints.end());
  }

  bool operator==(const AnnotatedProgram& o) const {
    return facts == o.facts && rules == o.rules && weak_constraints == o.weak_constraints;
  }
};

/// Ground atom as it appears in a model; arguments are in rendered form.
struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  bool operator==(const GroundAtom&) const = default;
  auto operator<=>(const GroundAtom&) const = default;

  std::string to_string() const {
    std::string out = predicate;
    if (args.empty()) return out;
    out += "(";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i];
    return out + ")";
  }
};

using Model = std::set<GroundAtom>;

/// The symbol behind a rendered constant (strips quotes).
inline std::string symbol_of(const std::string& rendered) {
  if (rendered.size() < 2 || rendered.front() != '"') return rendered;
  std::string out;
  for (std::size_t i = 1; i + 1 < rendered.size(); ++i) {
    if (rendered[i] == '\\' && i + 2 < rendered.size()) ++i;
    out += rendered[i];
  }
  return out;
}

inline bool is_symbolic_constant(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return s != "not" && s != "null";
}

inline bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

/// Constants print bare when the solver reads them as symbols or integers,
/// quoted otherwise; NULL prints as the reserved symbol `null`.
inline std::string render(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Variable: return t.name;
    case Term::Kind::Null: return "null";
    case Term::Kind::Constant: break;
  }
  if (is_symbolic_constant(t.name) || is_integer(t.name)) return t.name;
  std::string out = "\"";
  for (char c : t.name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string render(const Atom& a) {
  std::string out = a.predicate;
  if (a.args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) out += (i ? "," : "") + render(a.args[i]);
  return out + ")";
}

inline std::string render(const Literal& l) { return (l.negated ? "not " : "") + render(l.atom); }

inline std::string render(const Comparison& c) {
  return render(c.left) + (c.op == CompareOp::Equal ? " = " : " != ") + render(c.right);
}

namespace detail {

inline std::string render_body(const std::vector<Literal>& body, const std::vector<Comparison>& cmps) {
  std::string out;
  for (const auto& l : body) out += (out.empty() ? "" : ", ") + render(l);
  for (const auto& c : cmps) out += (out.empty() ? "" : ", ") + render(c);
  return out;
}

}  // namespace detail

inline std::string render(const Rule& r) {
  std::string out;
  for (std::size_t i = 0; i < r.head.size(); ++i) out += (i ? " | " : "") + render(r.head[i]);
  const std::string body = detail::render_body(r.body, r.comparisons);
  if (body.empty()) return out + ".";
  if (!out.empty()) out += " ";
  return out + ":- " + body + ".";
}

inline std::string render(const WeakConstraint& w) {
  std::string out = ":~ " + detail::render_body(w.body, w.comparisons) + ". [" + std::to_string(w.weight) + "@" +
                    std::to_string(w.level);
  for (const auto& t : w.terms) out += ", " + render(t);
  return out + "]";
}

/// Deterministic program text: comments, facts, rules, weak constraints.
inline std::string render_asp(const AnnotatedProgram& p) {
  std::string out;
  for (const auto& c : p.comments) out += "% " + c + "\n";
  for (const auto& f : p.facts) out += render(f) + ".\n";
  for (const auto& r : p.rules) {
    for (const auto& c : r.comments) out += "% " + c + "\n";
    out += render(r) + "\n";
  }
  for (const auto& w : p.weak_constraints) out += render(w) + "\n";
  return out;
}

namespace detail {

enum class AspTok { Ident, Variable, Number, String, Punct, End };

struct AspToken {
  AspTok kind = AspTok::End;
  std::string text;
  SourceLocation where;
};

inline std::vector<AspToken> tokenize_asp(std::string_view text) {
  std::vector<AspToken> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto step = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      step(1);
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') step(1);
      continue;
    }
    const SourceLocation here{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && word(text[j])) ++j;
      const bool var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
      out.push_back({var ? AspTok::Variable : AspTok::Ident, std::string(text.substr(i, j - i)), here});
      step(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({AspTok::Number, std::string(text.substr(i, j - i)), here});
      step(j - i);
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size() && text[j] != '\n') {
        if (text[j] == '\\' && j + 1 < text.size()) {
          value += text[j + 1];
          j += 2;
          continue;
        }
        if (text[j] == '"') {
          closed = true;
          break;
        }
        value += text[j++];
      }
      if (!closed) throw Error(ErrorKind::SyntaxError, "unterminated string", here);
      out.push_back({AspTok::String, value, here});
      step(j + 1 - i);
      continue;
    }
    for (std::string_view p : {":-", ":~", "!="}) {
      if (text.substr(i, 2) == p) {
        out.push_back({AspTok::Punct, std::string(p), here});
        step(2);
        goto next_token;
      }
    }
    if (std::string_view("(),.|[]@=").find(c) != std::string_view::npos) {
      out.push_back({AspTok::Punct, std::string(1, c), here});
      step(1);
      continue;
    }
    throw Error(ErrorKind::SyntaxError, std::string("unexpected character '") + c + "'", here);
  next_token:;
  }
  out.push_back({AspTok::End, "", {line, col}});
  return out;
}

class AspParser {
 public:
  explicit AspParser(std::string_view text) : toks_(tokenize_asp(text)) {}

  AnnotatedProgram parse() {
    AnnotatedProgram p;
    while (peek().kind != AspTok::End) statement(p);
    return p;
  }

 private:
  const AspToken& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }

  AspToken next() {
    AspToken t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  bool accept(std::string_view p) {
    if (peek().kind == AspTok::Punct && peek().text == p) {
      next();
      return true;
    }
    return false;
  }

  void expect(std::string_view p) {
    if (!accept(p)) {
      throw Error(ErrorKind::SyntaxError, "expected '" + std::string(p) + "' near '" + peek().text + "'",
                  peek().where);
    }
  }

  Term term() {
    const AspToken t = next();
    switch (t.kind) {
      case AspTok::Variable: return Term::variable(t.text);
      case AspTok::Number:
      case AspTok::String: return Term::constant(t.text);
      case AspTok::Ident: return t.text == "null" ? Term::null() : Term::constant(t.text);
      default: throw Error(ErrorKind::SyntaxError, "expected a term near '" + t.text + "'", t.where);
    }
  }

  Atom atom() {
    const AspToken t = next();
    if (t.kind != AspTok::Ident || t.text == "not") {
      throw Error(ErrorKind::SyntaxError, "expected a predicate near '" + t.text + "'", t.where);
    }
    Atom a{t.text, {}};
    if (accept("(")) {
      do {
        a.args.push_back(term());
      } while (accept(","));
      expect(")");
    }
    return a;
  }

  bool comparison_ahead() const {
    const auto& t = peek();
    const auto& n = peek(1);
    const bool opener = t.kind == AspTok::Variable || t.kind == AspTok::Number || t.kind == AspTok::String ||
                        (t.kind == AspTok::Ident && t.text != "not" && !(n.kind == AspTok::Punct && n.text == "("));
    return opener && n.kind == AspTok::Punct && (n.text == "=" || n.text == "!=");
  }

  void body(std::vector<Literal>& lits, std::vector<Comparison>& cmps) {
    do {
      if (comparison_ahead()) {
        Comparison c;
        c.left = term();
        c.op = next().text == "=" ? CompareOp::Equal : CompareOp::NotEqual;
        c.right = term();
        cmps.push_back(std::move(c));
        continue;
      }
      Literal l;
      if (peek().kind == AspTok::Ident && peek().text == "not" &&
          !(peek(1).kind == AspTok::Punct && (peek(1).text == "(" || peek(1).text == "," || peek(1).text == "."))) {
        next();
        l.negated = true;
      }
      l.atom = atom();
      lits.push_back(std::move(l));
    } while (accept(","));
  }

  void statement(AnnotatedProgram& p) {
    if (accept(":~")) {
      WeakConstraint w;
      body(w.body, w.comparisons);
      expect(".");
      expect("[");
      const AspToken weight = next();
      if (weight.kind != AspTok::Number) throw Error(ErrorKind::SyntaxError, "expected a weight", weight.where);
      w.weight = std::stol(weight.text);
      w.level = 0;
      if (accept("@")) {
        const AspToken level = next();
        if (level.kind != AspTok::Number) throw Error(ErrorKind::SyntaxError, "expected a level", level.where);
        w.level = std::stoi(level.text);
      }
      while (accept(",")) w.terms.push_back(term());
      expect("]");
      p.weak_constraints.push_back(std::move(w));
      return;
    }
    Rule r;
    if (!(peek().kind == AspTok::Punct && peek().text == ":-")) {
      do {
        r.head.push_back(atom());
      } while (accept("|"));
    }
    if (accept(":-")) body(r.body, r.comparisons);
    expect(".");
    const bool ground_fact = r.head.size() == 1 && r.body.empty() && r.comparisons.empty() &&
                             std::none_of(r.head[0].args.begin(), r.head[0].args.end(),
                                          [](const Term& t) { return t.is_variable(); });
    if (ground_fact) {
      p.facts.push_back(std::move(r.head[0]));
    } else {
      p.rules.push_back(std::move(r));
    }
  }

  std::vector<AspToken> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses program text in the rendered syntax. Comments are dropped.
/// Errors: SyntaxError.
inline AnnotatedProgram parse_asp(std::string_view text) { return detail::AspParser(text).parse(); }

}  // namespace repairkit::asp
