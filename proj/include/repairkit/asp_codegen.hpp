#pragma once

// Compiles repair, causality, secrecy and counterfactual problems into
// annotated answer-set programs.
//
// Every annotated atom carries the tuple id as its first argument. Relation
// R becomes predicate `r`, its annotated copy `rP`; annotation constants are
// d (deleted), s (stays / stopped), o (original), star (in transition) and
// do (intervened).

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "repairkit/asp_program.hpp"
#include "repairkit/relational.hpp"
#include "repairkit/spec.hpp"

namespace repairkit::asp {

inline const std::set<std::string>& reserved_predicates() {
  static const std::set<std::string> names{"cause", "cont", "e", "cl", "not", "null"};
  return names;
}

/// Solver-safe predicate names for the relations of a schema.
class PredicateNames {
 public:
  explicit PredicateNames(const Schema& schema) {
    std::set<std::string> used;
    for (const auto& rel : schema.relations()) {
      std::string base;
      for (char c : rel.name) {
        base += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_';
      }
      if (!std::islower(static_cast<unsigned char>(base[0]))) base = "r_" + base;
      auto clashes = [&](const std::string& s) {
        return used.count(s) || reserved_predicates().count(s) ||
               (s.rfind("dom", 0) == 0 && s.size() > 3 && std::isdigit(static_cast<unsigned char>(s[3])));
      };
      std::string name = base;
      for (int k = 2; clashes(name); ++k) name = base + "_" + std::to_string(k);
      used.insert(name);
      base_[rel.name] = name;
      order_.push_back(rel.name);
    }
  }

  const std::string& base(const std::string& relation) const { return base_.at(relation); }
  std::string primed(const std::string& relation) const { return base_.at(relation) + "P"; }

  std::vector<std::string> comments() const {
    std::vector<std::string> out;
    for (const auto& r : order_) out.push_back(base(r) + " = " + r + ", " + primed(r) + " = " + r + "'");
    return out;
  }

 private:
  std::map<std::string, std::string> base_;
  std::vector<std::string> order_;
};

namespace detail {

/// Maps spec variables to ASP variables, avoiding names already taken.
class VariableNames {
 public:
  explicit VariableNames(std::set<std::string> taken) : taken_(std::move(taken)) {}

  const std::string& operator()(const std::string& spec_name) {
    auto it = map_.find(spec_name);
    if (it != map_.end()) return it->second;
    std::string name;
    for (char c : spec_name) name += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    if (std::isalpha(static_cast<unsigned char>(name[0]))) {
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    } else {
      name = "V" + name;
    }
    while (taken_.count(name)) name += "_";
    taken_.insert(name);
    return map_.emplace(spec_name, name).first->second;
  }

 private:
  std::set<std::string> taken_;
  std::map<std::string, std::string> map_;
};

inline Term term_of(const Value& v) { return v.is_null() ? Term::null() : Term::constant(v.symbol()); }

inline Term term_of(const repairkit::Term& t, VariableNames& vars) {
  return t.is_variable() ? Term::variable(vars(t.name)) : Term::constant(t.name);
}

inline std::vector<Term> positional_vars(std::size_t n, const std::string& prefix = "") {
  static const char* small[] = {"X", "Y", "Z"};
  std::vector<Term> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (prefix.empty() && n <= 3) {
      out.push_back(Term::variable(small[i]));
    } else {
      out.push_back(Term::variable((prefix.empty() ? std::string("X") : prefix) + std::to_string(i + 1)));
    }
  }
  return out;
}

inline std::vector<Atom> fact_atoms(const Instance& instance, const PredicateNames& names) {
  std::vector<Atom> out;
  for (const auto& t : instance.tuples()) {
    Atom a{names.base(t.relation), {Term::constant(t.tid.label)}};
    for (const auto& v : t.values) a.args.push_back(term_of(v));
    out.push_back(std::move(a));
  }
  return out;
}

struct CompiledBody {
  std::vector<Atom> atoms;           // original-relation atoms, tid first
  std::vector<Comparison> comparisons;
  std::vector<std::vector<Term>> args;  // per atom, the non-tid arguments
};

// Body atoms `r(Ti, ...)`. With `guard_nulls`, join and comparison variables
// get `!= null` guards so that ASP symbol equality behaves like SQL.
inline CompiledBody compile_body(const RuleBody& body, const PredicateNames& names, bool guard_nulls) {
  std::set<std::string> tid_vars;
  for (std::size_t i = 0; i < body.atoms.size(); ++i) tid_vars.insert("T" + std::to_string(i + 1));
  VariableNames vars(tid_vars);
  CompiledBody out;
  for (std::size_t i = 0; i < body.atoms.size(); ++i) {
    const auto& a = body.atoms[i];
    Atom atom{names.base(a.relation), {Term::variable("T" + std::to_string(i + 1))}};
    std::vector<Term> args;
    for (const auto& t : a.args) args.push_back(term_of(t, vars));
    atom.args.insert(atom.args.end(), args.begin(), args.end());
    out.atoms.push_back(std::move(atom));
    out.args.push_back(std::move(args));
  }
  for (const auto& c : body.comparisons) {
    out.comparisons.push_back(Comparison{term_of(c.left, vars),
                                         c.op == repairkit::CompareOp::Equal ? CompareOp::Equal : CompareOp::NotEqual,
                                         term_of(c.right, vars)});
  }
  if (guard_nulls) {
    const auto occ = body.occurrences();
    const auto cmp = body.comparison_variables();
    for (const auto& v : body.atom_variables()) {
      if (occ.at(v) > 1 || cmp.count(v)) out.comparisons.push_back({Term::variable(vars(v)), CompareOp::NotEqual, Term::null()});
    }
  }
  return out;
}

inline std::vector<Literal> positive(const std::vector<Atom>& atoms) {
  std::vector<Literal> out;
  for (const auto& a : atoms) out.push_back({a, false});
  return out;
}

}  // namespace detail

/// The repair program of an instance and its denial constraints.
///
/// Per constraint one disjunctive rule offering the deletion (annotation d)
/// of any tuple in a violation; per relation one rule keeping (annotation s)
/// every tuple not deleted; optionally per relation one weak constraint
/// charging each deletion at weight 1, level 1.
inline AnnotatedProgram emit_repair_program(const Instance& instance, const std::vector<DenialConstraint>& dcs,
                                            bool with_weak_constraints) {
  const PredicateNames names(instance.schema());
  const bool guard = instance.has_nulls();
  AnnotatedProgram p;
  p.comments = names.comments();
  p.facts = detail::fact_atoms(instance, names);

  for (const auto& dc : dcs) {
    if (dc.body.contradictory) continue;
    const auto body = detail::compile_body(dc.body, names, guard);
    Rule r;
    r.comments.push_back("violations of " + dc.name);
    for (std::size_t i = 0; i < dc.body.atoms.size(); ++i) {
      Atom h{names.primed(dc.body.atoms[i].relation), {Term::variable("T" + std::to_string(i + 1))}};
      h.args.insert(h.args.end(), body.args[i].begin(), body.args[i].end());
      h.args.push_back(Term::constant("d"));
      r.head.push_back(std::move(h));
    }
    r.body = detail::positive(body.atoms);
    r.comparisons = body.comparisons;
    p.rules.push_back(std::move(r));
  }

  for (const auto& rel : instance.schema().relations()) {
    const auto xs = detail::positional_vars(rel.arity());
    Atom orig{names.base(rel.name), {Term::variable("T")}};
    orig.args.insert(orig.args.end(), xs.begin(), xs.end());
    Atom stays{names.primed(rel.name), orig.args};
    stays.args.push_back(Term::constant("s"));
    Atom deleted{names.primed(rel.name), orig.args};
    deleted.args.push_back(Term::constant("d"));
    Rule r;
    r.head = {stays};
    r.body = {{orig, false}, {deleted, true}};
    p.rules.push_back(std::move(r));
    if (with_weak_constraints) {
      p.weak_constraints.push_back(WeakConstraint{{{orig, false}, {deleted, false}}, {}, 1, 1, {Term::variable("T")}});
    }
  }
  return p;
}

/// `cause(T)` per relation of the query and `cont(T,T2)` per ordered pair of
/// those relations, read off the deletions of a repair program for the
/// constraint that forbids the query body.
inline std::vector<Rule> emit_cause_rules(const ConjunctiveQuery& query, const Schema& schema) {
  const PredicateNames names(schema);
  std::vector<std::string> rels;
  for (const auto& rel : schema.relations()) {
    for (const auto& a : query.body.atoms) {
      if (a.relation == rel.name) {
        rels.push_back(rel.name);
        break;
      }
    }
  }
  auto deleted = [&](const std::string& rel, const std::string& tid, const std::string& prefix) {
    Atom a{names.primed(rel), {Term::variable(tid)}};
    const auto xs = prefix.empty() ? detail::positional_vars(schema.at(rel).arity())
                                   : detail::positional_vars(schema.at(rel).arity(), prefix);
    a.args.insert(a.args.end(), xs.begin(), xs.end());
    a.args.push_back(Term::constant("d"));
    return a;
  };
  std::vector<Rule> out;
  for (const auto& r : rels) {
    Rule rule;
    rule.head = {Atom{"cause", {Term::variable("T")}}};
    rule.body = {{deleted(r, "T", ""), false}};
    out.push_back(std::move(rule));
  }
  for (const auto& r1 : rels) {
    for (const auto& r2 : rels) {
      Rule rule;
      rule.head = {Atom{"cont", {Term::variable("T"), Term::variable("T2")}}};
      rule.body = {{deleted(r1, "T", "X"), false}, {deleted(r2, "T2", "U"), false}};
      rule.comparisons = {{Term::variable("T"), CompareOp::NotEqual, Term::variable("T2")}};
      out.push_back(std::move(rule));
    }
  }
  return out;
}

/// The repair program of the query's denial constraint plus its cause rules.
inline AnnotatedProgram emit_cause_program(const Instance& instance, const ConjunctiveQuery& query) {
  auto p = emit_repair_program(instance, {DenialConstraint{query.name, query.body}}, false);
  auto rules = emit_cause_rules(query, instance.schema());
  p.rules.insert(p.rules.end(), rules.begin(), rules.end());
  return p;
}

/// Secrecy program for a view: disjunctive rules whose disjuncts null one
/// argument position of one body atom (`rP(T,null,Y)`), and per relation
/// one rule keeping (annotation s) tuples none of whose cells were nulled.
///
/// Nulling a constant, join or comparison position destroys a match. When
/// every head variable occurs once, a match also stops revealing once all
/// head positions are null; then each head variable gets its own rule,
/// offering the destroying positions plus its own position. A Boolean view
/// with nothing to null becomes a constraint.
inline AnnotatedProgram emit_secrecy_program(const Instance& instance, const ConjunctiveQuery& view) {
  const PredicateNames names(instance.schema());
  const bool guard = instance.has_nulls();
  AnnotatedProgram p;
  p.comments = names.comments();
  p.facts = detail::fact_atoms(instance, names);

  const auto occ = view.body.occurrences();
  const auto cmp = view.body.comparison_variables();
  auto destroys = [&](const repairkit::Term& t) {
    return !t.is_variable() || occ.at(t.name) > 1 || cmp.count(t.name) > 0;
  };
  std::set<std::string> head_only(view.head.begin(), view.head.end());
  bool always_reveals = view.is_boolean();
  for (const auto& h : view.head) {
    if (destroys(repairkit::Term::variable(h))) always_reveals = true;
  }
  const auto body = detail::compile_body(view.body, names, guard);

  // One rule per entry: the head variable it is responsible for, if any.
  std::vector<std::optional<std::string>> groups;
  if (always_reveals) {
    groups.push_back(std::nullopt);
  } else {
    for (const auto& h : head_only) groups.push_back(h);
  }
  for (const auto& group : groups) {
    if (view.body.contradictory) break;
    Rule r;
    r.comments.push_back("hide view " + view.name + (group ? " through " + *group : ""));
    std::optional<Term> group_var;
    for (std::size_t i = 0; i < view.body.atoms.size(); ++i) {
      const auto& a = view.body.atoms[i];
      for (std::size_t k = 0; k < a.args.size(); ++k) {
        const auto& t = a.args[k];
        const bool mine = group && t.is_variable() && t.name == *group;
        if (mine) group_var = body.args[i][k];
        if (!destroys(t) && !mine) continue;
        Atom h{names.primed(a.relation), {Term::variable("T" + std::to_string(i + 1))}};
        for (std::size_t j = 0; j < a.args.size(); ++j) h.args.push_back(j == k ? Term::null() : body.args[i][j]);
        r.head.push_back(std::move(h));
      }
    }
    r.body = detail::positive(body.atoms);
    r.comparisons = body.comparisons;
    if (guard && group_var) r.comparisons.push_back({*group_var, CompareOp::NotEqual, Term::null()});
    p.rules.push_back(std::move(r));
  }

  for (const auto& rel : instance.schema().relations()) {
    const auto xs = detail::positional_vars(rel.arity());
    Atom orig{names.base(rel.name), {Term::variable("T")}};
    orig.args.insert(orig.args.end(), xs.begin(), xs.end());
    Atom stays{names.primed(rel.name), orig.args};
    stays.args.push_back(Term::constant("s"));
    Rule r;
    r.head = {stays};
    r.body = {{orig, false}};
    for (std::size_t k = 0; k < rel.arity(); ++k) {
      Atom nulled{names.primed(rel.name), {Term::variable("T")}};
      for (std::size_t j = 0; j < rel.arity(); ++j) nulled.args.push_back(j == k ? Term::null() : xs[j]);
      r.body.push_back({nulled, true});
    }
    p.rules.push_back(std::move(r));
  }
  return p;
}

/// Counterfactual intervention program for one entity.
///
/// `choice(X̄; Y_i)` has no ASP-Core-2 counterpart. It is kept as a comment
/// above the intervention rule, whose disjunction then over-approximates the
/// nondeterministic single change; the native explanation engine is the
/// reference evaluator.
inline AnnotatedProgram emit_counterfactual_program(const ClassifierSpec& spec, const EntityRecord& entity) {
  const std::size_t n = spec.features.size();
  AnnotatedProgram p;
  for (std::size_t i = 0; i < n; ++i) {
    p.comments.push_back("dom" + std::to_string(i + 1) + " = domain of feature " + spec.features[i].name);
  }
  p.comments.push_back("e(T,X1..Xn,A): entity T with feature values X1..Xn and annotation A in {o,star,do,s}");
  if (spec.table.empty()) {
    p.comments.push_back("cl(X1..Xn,L) facts must be supplied by the external classifier");
  } else {
    p.comments.push_back("cl(X1..Xn,L): label L of a feature vector");
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& v : spec.features[i].domain) {
      p.facts.push_back(Atom{"dom" + std::to_string(i + 1), {Term::constant(v)}});
    }
  }
  for (const auto& [row, label] : spec.table) {
    Atom a{"cl", {}};
    for (const auto& v : row) a.args.push_back(Term::constant(v));
    a.args.push_back(Term::constant(std::to_string(label)));
    p.facts.push_back(std::move(a));
  }
  {
    Atom e{"e", {Term::constant(entity.id)}};
    for (const auto& v : entity.values) e.args.push_back(Term::constant(v));
    e.args.push_back(Term::constant("o"));
    p.facts.push_back(std::move(e));
  }

  const auto xs = detail::positional_vars(n, "X");
  const auto ys = detail::positional_vars(n, "Y");
  auto entity_atom = [&](const std::vector<Term>& values, const char* annotation) {
    Atom a{"e", {Term::variable("T")}};
    a.args.insert(a.args.end(), values.begin(), values.end());
    a.args.push_back(Term::constant(annotation));
    return a;
  };
  auto label_atom = [&](const std::vector<Term>& values, const char* label) {
    Atom a{"cl", values};
    a.args.push_back(Term::constant(label));
    return a;
  };

  p.rules.push_back(Rule{{entity_atom(xs, "star")}, {{entity_atom(xs, "o"), false}}, {}, {}});
  p.rules.push_back(Rule{{entity_atom(xs, "star")}, {{entity_atom(xs, "do"), false}}, {}, {}});

  Rule intervene;
  std::string choice;
  std::string tuple;
  for (std::size_t i = 0; i < n; ++i) tuple += (i ? "," : "") + xs[i].name;
  for (std::size_t i = 0; i < n; ++i) choice += (i ? ", " : "") + std::string("choice((") + tuple + ")," + ys[i].name + ")";
  intervene.comments.push_back(choice);
  intervene.comments.push_back("choice-free approximation: one disjunct per feature, changing only that feature");
  for (std::size_t i = 0; i < n; ++i) {
    auto vals = xs;
    vals[i] = ys[i];
    intervene.head.push_back(entity_atom(vals, "do"));
  }
  intervene.body.push_back({entity_atom(xs, "star"), false});
  intervene.body.push_back({label_atom(xs, "1"), false});
  for (std::size_t i = 0; i < n; ++i) {
    intervene.body.push_back({Atom{"dom" + std::to_string(i + 1), {ys[i]}}, false});
  }
  for (std::size_t i = 0; i < n; ++i) intervene.comparisons.push_back({ys[i], CompareOp::NotEqual, xs[i]});
  p.rules.push_back(std::move(intervene));

  Rule stop;
  stop.comments.push_back("stop once the label has switched");
  stop.head = {entity_atom(xs, "s")};
  stop.body = {{entity_atom(xs, "do"), false}, {label_atom(xs, "0"), false}};
  p.rules.push_back(std::move(stop));
  return p;
}

/// Tids annotated `d` in a model of a repair program.
inline TidSet deleted_tids(const Model& model, const Schema& schema) {
  const PredicateNames names(schema);
  TidSet out;
  for (const auto& rel : schema.relations()) {
    const auto primed = names.primed(rel.name);
    for (const auto& a : model) {
      if (a.predicate == primed && a.args.size() == rel.arity() + 2 && a.args.back() == "d") {
        out.insert(Tid{symbol_of(a.args.front())});
      }
    }
  }
  return out;
}

/// Atoms annotated `s` in a model of a repair or secrecy program.
inline std::set<GroundAtom> staying_atoms(const Model& model, const Schema& schema) {
  const PredicateNames names(schema);
  std::set<GroundAtom> out;
  for (const auto& rel : schema.relations()) {
    const auto primed = names.primed(rel.name);
    for (const auto& a : model) {
      if (a.predicate == primed && a.args.size() == rel.arity() + 2 && a.args.back() == "s") out.insert(a);
    }
  }
  return out;
}

inline TidSet cause_tids(const Model& model) {
  TidSet out;
  for (const auto& a : model) {
    if (a.predicate == "cause" && a.args.size() == 1) out.insert(Tid{symbol_of(a.args[0])});
  }
  return out;
}

inline std::set<std::pair<Tid, Tid>> contingency_pairs(const Model& model) {
  std::set<std::pair<Tid, Tid>> out;
  for (const auto& a : model) {
    if (a.predicate == "cont" && a.args.size() == 2) {
      out.emplace(Tid{symbol_of(a.args[0])}, Tid{symbol_of(a.args[1])});
    }
  }
  return out;
}

/// Cells nulled in a model of a secrecy program; cells that were NULL in
/// `original` already are not changes.
inline std::set<CellChange> nulled_cells(const Model& model, const Instance& original) {
  const Schema& schema = original.schema();
  const PredicateNames names(schema);
  std::set<CellChange> out;
  for (const auto& rel : schema.relations()) {
    const auto primed = names.primed(rel.name);
    for (const auto& a : model) {
      if (a.predicate != primed || a.args.size() != rel.arity() + 1) continue;
      const Tuple* t = original.find(Tid{symbol_of(a.args[0])});
      if (t == nullptr) continue;
      for (std::size_t k = 0; k < rel.arity(); ++k) {
        if (a.args[k + 1] == "null" && !t->values[k].is_null()) out.insert(CellChange{t->tid, rel.attributes[k]});
      }
    }
  }
  return out;
}

}  // namespace repairkit::asp
