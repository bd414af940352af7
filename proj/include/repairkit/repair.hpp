#pragma once

// Conjunctive matching under SQL null semantics, conflict hypergraphs,
// subset and cardinality repairs, and consistent query answering.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "repairkit/hitting_set.hpp"
#include "repairkit/relational.hpp"
#include "repairkit/spec.hpp"

namespace repairkit {

/// One homomorphism of a rule body into an instance.
struct Match {
  std::map<std::string, Value> assignment;
  std::vector<Tid> witness;  // one tid per body atom, in body order

  TidSet witness_set() const { return TidSet(witness.begin(), witness.end()); }
};

namespace detail {

inline const Value* lookup(const std::map<std::string, Value>& env, const Term& t, Value& scratch) {
  if (!t.is_variable()) {
    scratch = Value::constant(t.name);
    return &scratch;
  }
  auto it = env.find(t.name);
  return it == env.end() ? nullptr : &it->second;
}

// Comparisons whose variables are all bound must hold; unbound ones wait.
inline bool comparisons_hold(const RuleBody& body, const std::map<std::string, Value>& env) {
  for (const auto& c : body.comparisons) {
    Value l_scratch, r_scratch;
    const Value* l = lookup(env, c.left, l_scratch);
    const Value* r = lookup(env, c.right, r_scratch);
    if (l == nullptr || r == nullptr) continue;
    const bool ok = c.op == CompareOp::Equal ? sql_equal(*l, *r) : sql_not_equal(*l, *r);
    if (!ok) return false;
  }
  return true;
}

class Matcher {
 public:
  Matcher(const RuleBody& body, const Instance& instance) : body_(body) {
    for (const auto& a : body.atoms) {
      if (!by_relation_.count(a.relation)) by_relation_[a.relation] = instance.tuples_of(a.relation);
    }
  }

  void run(const std::function<void(const Match&)>& emit) {
    if (body_.contradictory) return;
    Match m;
    m.witness.reserve(body_.atoms.size());
    descend(0, m, emit);
  }

 private:
  void descend(std::size_t i, Match& m, const std::function<void(const Match&)>& emit) {
    if (i == body_.atoms.size()) {
      emit(m);
      return;
    }
    const Atom& atom = body_.atoms[i];
    for (const Tuple* t : by_relation_[atom.relation]) {
      std::vector<std::string> bound_here;
      bool ok = true;
      for (std::size_t k = 0; k < atom.args.size() && ok; ++k) {
        const Term& term = atom.args[k];
        const Value& v = t->values[k];
        if (!term.is_variable()) {
          ok = !v.is_null() && v.symbol() == term.name;
          continue;
        }
        auto it = m.assignment.find(term.name);
        if (it == m.assignment.end()) {
          // A first occurrence binds anything, NULL included; NULL then fails
          // every later join or comparison on this variable.
          m.assignment.emplace(term.name, v);
          bound_here.push_back(term.name);
        } else {
          ok = sql_equal(it->second, v);
        }
      }
      if (ok && comparisons_hold(body_, m.assignment)) {
        m.witness.push_back(t->tid);
        descend(i + 1, m, emit);
        m.witness.pop_back();
      }
      for (const auto& name : bound_here) m.assignment.erase(name);
    }
  }

  const RuleBody& body_;
  std::map<std::string, std::vector<const Tuple*>> by_relation_;
};

}  // namespace detail

/// All matches of `body` in `instance`, in tuple order per atom.
inline std::vector<Match> find_matches(const RuleBody& body, const Instance& instance) {
  std::vector<Match> out;
  detail::Matcher(body, instance).run([&](const Match& m) { out.push_back(m); });
  return out;
}

using AnswerTuple = std::vector<Value>;
using AnswerSet = std::set<AnswerTuple>;

struct QueryResult {
  /// answer tuple -> witness tid-sets producing it
  std::map<AnswerTuple, std::set<TidSet>> answers;

  bool holds() const { return !answers.empty(); }

  AnswerSet tuples() const {
    AnswerSet out;
    for (const auto& [t, _] : answers) out.insert(t);
    return out;
  }
};

inline AnswerTuple head_tuple(const ConjunctiveQuery& query, const Match& m) {
  AnswerTuple t;
  t.reserve(query.head.size());
  for (const auto& v : query.head) t.push_back(m.assignment.at(v));
  return t;
}

/// Certain answers of a conjunctive query. Matches whose head carries a NULL
/// are not reported as answers; a Boolean query yields the empty tuple iff
/// it has at least one match.
inline QueryResult evaluate(const ConjunctiveQuery& query, const Instance& instance) {
  QueryResult out;
  detail::Matcher(query.body, instance).run([&](const Match& m) {
    AnswerTuple t = head_tuple(query, m);
    if (std::any_of(t.begin(), t.end(), [](const Value& v) { return v.is_null(); })) return;
    out.answers[std::move(t)].insert(m.witness_set());
  });
  return out;
}

inline bool satisfies(const Instance& instance, const std::vector<DenialConstraint>& dcs) {
  for (const auto& dc : dcs) {
    bool violated = false;
    detail::Matcher(dc.body, instance).run([&](const Match&) { violated = true; });
    if (violated) return false;
  }
  return true;
}

struct ConflictHypergraph {
  TidSet nodes;              // tids occurring in some edge
  std::set<TidSet> edges;    // inclusion-minimal violation witness sets
};

inline ConflictHypergraph conflict_hypergraph(const Instance& instance,
                                              const std::vector<DenialConstraint>& dcs) {
  std::set<TidSet> raw;
  for (const auto& dc : dcs) {
    detail::Matcher(dc.body, instance).run([&](const Match& m) { raw.insert(m.witness_set()); });
  }
  ConflictHypergraph g;
  g.edges = minimize_edges(raw);
  for (const auto& e : g.edges) g.nodes.insert(e.begin(), e.end());
  return g;
}

struct Repair {
  Instance instance;
  TidSet deleted;
};

enum class RepairClass { Subset, Cardinality };

/// Subset repairs: complements of the minimal hitting sets of the conflict
/// hypergraph, ordered lexicographically by their sorted deleted tids.
inline std::vector<Repair> s_repairs(const Instance& instance, const std::vector<DenialConstraint>& dcs) {
  const auto graph = conflict_hypergraph(instance, dcs);
  std::vector<Repair> out;
  for (auto& hs : minimal_hitting_sets(graph.edges)) {
    out.push_back(Repair{delete_tids(instance, hs), hs});
  }
  return out;
}

/// Cardinality repairs: the subset repairs with fewest deletions.
inline std::vector<Repair> c_repairs(const Instance& instance, const std::vector<DenialConstraint>& dcs) {
  auto all = s_repairs(instance, dcs);
  if (all.empty()) return all;
  std::size_t best = all.front().deleted.size();
  for (const auto& r : all) best = std::min(best, r.deleted.size());
  std::vector<Repair> out;
  for (auto& r : all) {
    if (r.deleted.size() == best) out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Repair> repairs(const Instance& instance, const std::vector<DenialConstraint>& dcs,
                                   RepairClass cls) {
  return cls == RepairClass::Subset ? s_repairs(instance, dcs) : c_repairs(instance, dcs);
}

/// Answers true in every repair of the chosen class.
inline AnswerSet consistent_answers(const ConjunctiveQuery& query, const Instance& instance,
                                    const std::vector<DenialConstraint>& dcs, RepairClass cls) {
  const auto reps = repairs(instance, dcs, cls);
  AnswerSet certain;
  bool first = true;
  for (const auto& r : reps) {
    const auto here = evaluate(query, r.instance).tuples();
    if (first) {
      certain = here;
      first = false;
      continue;
    }
    AnswerSet kept;
    std::set_intersection(certain.begin(), certain.end(), here.begin(), here.end(),
                          std::inserter(kept, kept.begin()));
    certain = std::move(kept);
  }
  return certain;
}

inline std::string to_string(const AnswerTuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? ", " : "") + t[i].to_string();
  return out + ")";
}

}  // namespace repairkit
