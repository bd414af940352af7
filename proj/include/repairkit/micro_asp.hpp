#pragma once

// A small disjunctive answer-set solver: bottom-up grounding with an atom
// budget, stable models by propagation-guided search with a reduct
// minimality check, and weak-constraint optimization.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "repairkit/asp_program.hpp"
#include "repairkit/error.hpp"

namespace repairkit::asp {

struct SolveOptions {
  /// Upper bound on ground atoms plus ground rules.
  std::size_t atom_budget = 500000;
  /// Upper bound on atoms the search has to guess.
  std::size_t max_universe = 40;
};

struct GroundRule {
  std::vector<std::size_t> head;
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;

  auto operator<=>(const GroundRule&) const = default;
};

struct GroundWeak {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  long weight = 1;
  int level = 0;
  std::vector<std::string> terms;

  auto operator<=>(const GroundWeak&) const = default;
};

struct GroundProgram {
  std::vector<GroundAtom> atoms;  // id -> atom
  std::vector<std::size_t> facts;
  std::vector<GroundRule> rules;
  std::vector<GroundWeak> weak;

  std::size_t size() const { return atoms.size() + rules.size() + weak.size(); }
};

namespace detail {

using Binding = std::map<std::string, std::string>;

inline void require_bound(const Term& t, const std::set<std::string>& bound, const std::string& where) {
  if (t.is_variable() && !bound.count(t.name)) {
    throw Error(ErrorKind::UnsafeRule, "variable " + t.name + " of '" + where + "' does not occur in a positive body atom");
  }
}

inline void check_safety(const std::vector<Atom>& head, const std::vector<Literal>& body,
                         const std::vector<Comparison>& cmps, const std::vector<Term>& extra,
                         const std::string& text) {
  std::set<std::string> bound;
  for (const auto& l : body) {
    if (l.negated) continue;
    for (const auto& t : l.atom.args) {
      if (t.is_variable()) bound.insert(t.name);
    }
  }
  for (const auto& a : head) {
    for (const auto& t : a.args) require_bound(t, bound, text);
  }
  for (const auto& l : body) {
    for (const auto& t : l.atom.args) require_bound(t, bound, text);
  }
  for (const auto& c : cmps) {
    require_bound(c.left, bound, text);
    require_bound(c.right, bound, text);
  }
  for (const auto& t : extra) require_bound(t, bound, text);
}

inline std::optional<std::string> value_of(const Term& t, const Binding& b) {
  if (!t.is_variable()) return render(t);
  auto it = b.find(t.name);
  if (it == b.end()) return std::nullopt;
  return it->second;
}

inline GroundAtom instantiate(const Atom& a, const Binding& b) {
  GroundAtom g{a.predicate, {}};
  for (const auto& t : a.args) g.args.push_back(*value_of(t, b));
  return g;
}

class Grounder {
 public:
  Grounder(const AnnotatedProgram& program, std::size_t budget) : program_(program), budget_(budget) {}

  GroundProgram run() {
    for (const auto& r : program_.rules) check_safety(r.head, r.body, r.comparisons, {}, render(r));
    for (const auto& w : program_.weak_constraints) check_safety({}, w.body, w.comparisons, w.terms, render(w));

    for (const auto& f : program_.facts) {
      for (const auto& t : f.args) {
        if (t.is_variable()) throw Error(ErrorKind::UnsafeRule, "fact '" + render(f) + "' is not ground");
      }
      out_.facts.push_back(intern(instantiate(f, {})));
    }

    // Possible atoms: close under all rules, ignoring negation.
    bool changed = true;
    while (changed) {
      const std::size_t before = out_.atoms.size();
      for (const auto& r : program_.rules) {
        join(r.body, r.comparisons, [&](const Binding& b) {
          for (const auto& h : r.head) intern(instantiate(h, b));
        });
      }
      changed = out_.atoms.size() != before;
    }

    std::set<GroundRule> seen_rules;
    for (const auto& r : program_.rules) {
      join(r.body, r.comparisons, [&](const Binding& b) {
        GroundRule g;
        for (const auto& h : r.head) g.head.push_back(intern(instantiate(h, b)));
        for (const auto& l : r.body) (l.negated ? g.neg : g.pos).push_back(intern(instantiate(l.atom, b)));
        if (seen_rules.insert(g).second) {
          out_.rules.push_back(std::move(g));
          check_budget();
        }
      });
    }

    std::set<GroundWeak> seen_weak;
    for (const auto& w : program_.weak_constraints) {
      join(w.body, w.comparisons, [&](const Binding& b) {
        GroundWeak g;
        for (const auto& l : w.body) (l.negated ? g.neg : g.pos).push_back(intern(instantiate(l.atom, b)));
        g.weight = w.weight;
        g.level = w.level;
        for (const auto& t : w.terms) g.terms.push_back(*value_of(t, b));
        if (seen_weak.insert(g).second) {
          out_.weak.push_back(std::move(g));
          check_budget();
        }
      });
    }
    return std::move(out_);
  }

 private:
  std::size_t intern(const GroundAtom& a) {
    auto [it, inserted] = ids_.emplace(a, out_.atoms.size());
    if (inserted) {
      out_.atoms.push_back(a);
      by_predicate_[a.predicate].push_back(it->second);
      check_budget();
    }
    return it->second;
  }

  void check_budget() const {
    if (out_.size() > budget_) {
      throw Error(ErrorKind::BudgetExceeded, "grounding exceeds the budget of " + std::to_string(budget_) + " atoms and rules");
    }
  }

  static bool comparisons_hold(const std::vector<Comparison>& cmps, const Binding& b, bool partial) {
    for (const auto& c : cmps) {
      const auto l = value_of(c.left, b);
      const auto r = value_of(c.right, b);
      if (!l || !r) {
        if (partial) continue;
        return false;
      }
      if ((*l == *r) != (c.op == CompareOp::Equal)) return false;
    }
    return true;
  }

  void join(const std::vector<Literal>& body, const std::vector<Comparison>& cmps,
            const std::function<void(const Binding&)>& emit) {
    std::vector<const Atom*> positive;
    for (const auto& l : body) {
      if (!l.negated) positive.push_back(&l.atom);
    }
    Binding b;
    std::function<void(std::size_t)> step = [&](std::size_t i) {
      if (!comparisons_hold(cmps, b, true)) return;
      if (i == positive.size()) {
        if (comparisons_hold(cmps, b, false)) emit(b);
        return;
      }
      const Atom& a = *positive[i];
      auto it = by_predicate_.find(a.predicate);
      if (it == by_predicate_.end()) return;
      // Copy: emit() may intern new atoms of the same predicate.
      const std::vector<std::size_t> candidates = it->second;
      for (auto id : candidates) {
        const GroundAtom& g = out_.atoms[id];
        if (g.args.size() != a.args.size()) continue;
        std::vector<std::string> fresh;
        bool ok = true;
        for (std::size_t k = 0; k < a.args.size() && ok; ++k) {
          const Term& t = a.args[k];
          if (!t.is_variable()) {
            ok = render(t) == out_.atoms[id].args[k];
            continue;
          }
          auto bound = b.find(t.name);
          if (bound != b.end()) {
            ok = bound->second == out_.atoms[id].args[k];
          } else {
            b.emplace(t.name, out_.atoms[id].args[k]);
            fresh.push_back(t.name);
          }
        }
        if (ok) step(i + 1);
        for (const auto& v : fresh) b.erase(v);
      }
    };
    step(0);
  }

  const AnnotatedProgram& program_;
  std::size_t budget_;
  GroundProgram out_;
  std::map<GroundAtom, std::size_t> ids_;
  std::map<std::string, std::vector<std::size_t>> by_predicate_;
};

}  // namespace detail

/// Grounds `program` over its own facts. Errors: UnsafeRule, BudgetExceeded.
inline GroundProgram ground(const AnnotatedProgram& program, std::size_t budget = SolveOptions{}.atom_budget) {
  return detail::Grounder(program, budget).run();
}

/// The ground program as an annotated program, for rendering.
inline AnnotatedProgram to_program(const GroundProgram& gp) {
  auto atom = [&](std::size_t id) {
    const auto& g = gp.atoms[id];
    Atom a{g.predicate, {}};
    for (const auto& s : g.args) a.args.push_back(s == "null" ? Term::null() : Term::constant(symbol_of(s)));
    return a;
  };
  AnnotatedProgram p;
  for (auto f : gp.facts) p.facts.push_back(atom(f));
  for (const auto& r : gp.rules) {
    Rule out;
    for (auto h : r.head) out.head.push_back(atom(h));
    for (auto b : r.pos) out.body.push_back({atom(b), false});
    for (auto b : r.neg) out.body.push_back({atom(b), true});
    p.rules.push_back(std::move(out));
  }
  for (const auto& w : gp.weak) {
    WeakConstraint out;
    for (auto b : w.pos) out.body.push_back({atom(b), false});
    for (auto b : w.neg) out.body.push_back({atom(b), true});
    out.weight = w.weight;
    out.level = w.level;
    for (const auto& t : w.terms) out.terms.push_back(t == "null" ? Term::null() : Term::constant(symbol_of(t)));
    p.weak_constraints.push_back(std::move(out));
  }
  return p;
}

namespace detail {

enum Truth : std::int8_t { Unknown = -1, False = 0, True = 1 };

/// Model search over a set of ground rules with unit propagation on rule
/// satisfaction and support.
class ModelSearch {
 public:
  ModelSearch(const std::vector<GroundRule>& rules, std::size_t atoms, const std::vector<std::size_t>& facts)
      : rules_(rules), heads_of_(atoms), fact_(atoms, false) {
    for (auto f : facts) fact_[f] = true;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      for (auto h : rules_[r].head) heads_of_[h].push_back(r);
    }
  }

  /// Calls `leaf` on every total model extending `start`; `leaf` returns
  /// false to stop.
  void run(std::vector<Truth> start, const std::vector<std::size_t>& order,
           const std::function<bool(const std::vector<Truth>&)>& leaf) {
    stop_ = false;
    descend(std::move(start), order, 0, leaf);
  }

 private:
  enum class Body { False, True, Open };

  Body body_state(const GroundRule& r, const std::vector<Truth>& v, std::size_t& open, std::size_t& open_lit,
                  bool& open_is_pos) const {
    open = 0;
    for (auto p : r.pos) {
      if (v[p] == False) return Body::False;
      if (v[p] == Unknown) {
        ++open;
        open_lit = p;
        open_is_pos = true;
      }
    }
    for (auto n : r.neg) {
      if (v[n] == True) return Body::False;
      if (v[n] == Unknown) {
        ++open;
        open_lit = n;
        open_is_pos = false;
      }
    }
    return open == 0 ? Body::True : Body::Open;
  }

  bool propagate(std::vector<Truth>& v) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : rules_) {
        std::size_t open = 0;
        std::size_t lit = 0;
        bool lit_pos = true;
        const Body body = body_state(r, v, open, lit, lit_pos);
        if (body == Body::False) continue;
        std::size_t unknown_heads = 0;
        std::size_t last = 0;
        bool satisfied = false;
        for (auto h : r.head) {
          if (v[h] == True) satisfied = true;
          if (v[h] == Unknown) {
            ++unknown_heads;
            last = h;
          }
        }
        if (satisfied) continue;
        if (body == Body::True) {
          if (unknown_heads == 0) return false;
          if (unknown_heads == 1) {
            v[last] = True;
            changed = true;
          }
        } else if (unknown_heads == 0 && open == 1) {
          v[lit] = lit_pos ? False : True;
          changed = true;
        }
      }
      // Support: a true atom needs a rule that can still fire for it.
      for (std::size_t a = 0; a < v.size(); ++a) {
        if (v[a] == False || fact_[a]) continue;
        bool supported = false;
        for (auto r : heads_of_[a]) {
          std::size_t open = 0;
          std::size_t lit = 0;
          bool lit_pos = true;
          if (body_state(rules_[r], v, open, lit, lit_pos) == Body::False) continue;
          bool other_true = false;
          for (auto h : rules_[r].head) {
            if (h != a && v[h] == True) other_true = true;
          }
          if (!other_true || rules_[r].head.size() == 1) {
            supported = true;
            break;
          }
        }
        if (supported) continue;
        if (v[a] == True) return false;
        v[a] = False;
        changed = true;
      }
    }
    return true;
  }

  void descend(std::vector<Truth> v, const std::vector<std::size_t>& order, std::size_t i,
               const std::function<bool(const std::vector<Truth>&)>& leaf) {
    if (stop_ || !propagate(v)) return;
    while (i < order.size() && v[order[i]] != Unknown) ++i;
    if (i == order.size()) {
      if (!leaf(v)) stop_ = true;
      return;
    }
    for (Truth t : {False, True}) {
      auto next = v;
      next[order[i]] = t;
      descend(std::move(next), order, i + 1, leaf);
      if (stop_) return;
    }
  }

  const std::vector<GroundRule>& rules_;
  std::vector<std::vector<std::size_t>> heads_of_;
  std::vector<bool> fact_;
  bool stop_ = false;
};

// True when no proper subset of `m` is a model of the reduct of `gp`
// with respect to `m`.
inline bool is_minimal_model(const GroundProgram& gp, const std::vector<Truth>& m) {
  std::vector<GroundRule> reduct;
  for (const auto& r : gp.rules) {
    if (std::any_of(r.neg.begin(), r.neg.end(), [&](std::size_t n) { return m[n] == True; })) continue;
    reduct.push_back(GroundRule{r.head, r.pos, {}});
  }
  std::vector<Truth> start(m.size(), False);
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < m.size(); ++a) {
    if (m[a] == True) {
      start[a] = Unknown;
      order.push_back(a);
    }
  }
  for (auto f : gp.facts) start[f] = True;
  bool smaller = false;
  ModelSearch(reduct, m.size(), gp.facts).run(start, order, [&](const std::vector<Truth>& v) {
    for (auto a : order) {
      if (v[a] == False) {
        smaller = true;
        return false;
      }
    }
    return true;
  });
  return !smaller;
}

inline Model to_model(const GroundProgram& gp, const std::vector<Truth>& v) {
  Model m;
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (v[a] == True) m.insert(gp.atoms[a]);
  }
  return m;
}

}  // namespace detail

/// Every stable model of a ground program, in ascending order.
/// Errors: UniverseTooLarge.
inline std::vector<Model> stable_models(const GroundProgram& gp, const SolveOptions& options = {}) {
  std::vector<detail::Truth> start(gp.atoms.size(), detail::Unknown);
  for (auto f : gp.facts) start[f] = detail::True;

  // Atoms derivable from facts by definite rules hold in every model.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : gp.rules) {
      if (r.head.size() != 1 || !r.neg.empty() || start[r.head[0]] == detail::True) continue;
      if (std::all_of(r.pos.begin(), r.pos.end(), [&](std::size_t p) { return start[p] == detail::True; })) {
        start[r.head[0]] = detail::True;
        changed = true;
      }
    }
  }
  // Guessed atoms head a disjunctive or non-monotone rule; everything else
  // follows from them by propagation, except on positive loops, so those
  // atoms come last in the branching order and do not count to the limit.
  std::vector<bool> guessed(start.size(), false);
  for (const auto& r : gp.rules) {
    if (r.head.size() > 1 || !r.neg.empty()) {
      for (auto h : r.head) guessed[h] = true;
    }
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> derived;
  for (std::size_t a = 0; a < start.size(); ++a) {
    if (start[a] != detail::Unknown) continue;
    (guessed[a] ? order : derived).push_back(a);
  }
  if (order.size() > options.max_universe) {
    throw Error(ErrorKind::UniverseTooLarge, std::to_string(order.size()) + " undecided atoms exceed the limit of " +
                                                 std::to_string(options.max_universe));
  }
  order.insert(order.end(), derived.begin(), derived.end());

  std::set<Model> found;
  detail::ModelSearch(gp.rules, gp.atoms.size(), gp.facts).run(start, order, [&](const std::vector<detail::Truth>& v) {
    if (detail::is_minimal_model(gp, v)) found.insert(detail::to_model(gp, v));
    return true;
  });
  return {found.begin(), found.end()};
}

inline std::vector<Model> stable_models(const AnnotatedProgram& program, const SolveOptions& options = {}) {
  return stable_models(ground(program, options.atom_budget), options);
}

/// Weak-constraint cost per level. Violations with equal level, weight and
/// terms count once.
using Cost = std::map<int, long>;

inline Cost cost(const GroundProgram& gp, const Model& model) {
  std::set<std::tuple<int, long, std::vector<std::string>>> violated;
  for (const auto& w : gp.weak) {
    const bool fires =
        std::all_of(w.pos.begin(), w.pos.end(), [&](std::size_t p) { return model.count(gp.atoms[p]) > 0; }) &&
        std::none_of(w.neg.begin(), w.neg.end(), [&](std::size_t n) { return model.count(gp.atoms[n]) > 0; });
    if (fires) violated.emplace(w.level, w.weight, w.terms);
  }
  Cost out;
  for (const auto& [level, weight, terms] : violated) out[level] += weight;
  return out;
}

/// Lexicographic comparison, highest level first.
inline bool cheaper(const Cost& a, const Cost& b) {
  std::set<int> levels;
  for (const auto& [l, w] : a) levels.insert(l);
  for (const auto& [l, w] : b) levels.insert(l);
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    const long x = a.count(*it) ? a.at(*it) : 0;
    const long y = b.count(*it) ? b.at(*it) : 0;
    if (x != y) return x < y;
  }
  return false;
}

inline std::string to_string(const Cost& c) {
  std::string out = "[";
  bool first = true;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    out += (first ? "" : ", ") + std::to_string(it->second) + "@" + std::to_string(it->first);
    first = false;
  }
  return out + "]";
}

/// Stable models of minimum cost.
inline std::vector<Model> optimal_models(const GroundProgram& gp, const SolveOptions& options = {}) {
  const auto all = stable_models(gp, options);
  std::vector<Model> best;
  Cost best_cost;
  for (const auto& m : all) {
    const Cost c = cost(gp, m);
    if (best.empty() || cheaper(c, best_cost)) {
      best = {m};
      best_cost = c;
    } else if (!cheaper(best_cost, c)) {
      best.push_back(m);
    }
  }
  return best;
}

inline std::vector<Model> optimal_models(const AnnotatedProgram& program, const SolveOptions& options = {}) {
  return optimal_models(ground(program, options.atom_budget), options);
}

}  // namespace repairkit::asp
