#pragma once

// Shared by the unit, property and acceptance tests: sample loading,
// seeded random problem generators, and brute-force reference
// implementations that share no code with the engines they check.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "repairkit.hpp"

namespace rk_test {

using namespace repairkit;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sample_path(const std::string& name) { return std::string(REPAIRKIT_SAMPLES_DIR) + "/" + name; }

inline ProblemSpec load_sample(const std::string& name) { return parse_spec(read_file(sample_path(name))); }

inline TidSet tids(std::initializer_list<const char*> labels) {
  TidSet out;
  for (const auto* l : labels) out.insert(Tid{l});
  return out;
}

inline std::set<TidSet> deleted_sets(const std::vector<Repair>& reps) {
  std::set<TidSet> out;
  for (const auto& r : reps) out.insert(r.deleted);
  return out;
}

// ---------------------------------------------------------------------------
// Reference matcher: tries every combination of tuples for the atoms and
// checks the SQL reading directly. NULL satisfies no equality, join or
// comparison; a variable with a single atom occurrence and no comparison
// accepts anything.

struct RefMatch {
  std::vector<Tid> witness;
  std::map<std::string, Value> binding;  // first bound value of each variable
};

inline bool ref_body_holds(const RuleBody& body, const std::vector<const Tuple*>& chosen,
                           std::map<std::string, Value>& binding) {
  if (body.contradictory) return false;
  std::map<std::string, std::vector<Value>> seen;
  for (std::size_t i = 0; i < body.atoms.size(); ++i) {
    const auto& a = body.atoms[i];
    for (std::size_t k = 0; k < a.args.size(); ++k) {
      const Value& v = chosen[i]->values[k];
      if (!a.args[k].is_variable()) {
        if (v.is_null() || v.symbol() != a.args[k].name) return false;
      } else {
        seen[a.args[k].name].push_back(v);
      }
    }
  }
  std::set<std::string> in_comparison;
  for (const auto& c : body.comparisons) {
    if (c.left.is_variable()) in_comparison.insert(c.left.name);
    if (c.right.is_variable()) in_comparison.insert(c.right.name);
  }
  for (const auto& [name, values] : seen) {
    const bool constrained = values.size() > 1 || in_comparison.count(name);
    if (constrained) {
      for (const auto& v : values) {
        if (v.is_null() || v.symbol() != values.front().symbol()) return false;
      }
    }
    binding[name] = values.front();
  }
  for (const auto& c : body.comparisons) {
    auto side = [&](const Term& t) -> std::optional<std::string> {
      if (!t.is_variable()) return t.name;
      const Value& v = binding.at(t.name);
      if (v.is_null()) return std::nullopt;
      return v.symbol();
    };
    const auto l = side(c.left);
    const auto r = side(c.right);
    if (!l || !r) return false;
    if ((*l == *r) != (c.op == CompareOp::Equal)) return false;
  }
  return true;
}

inline std::vector<RefMatch> ref_matches(const RuleBody& body, const Instance& instance) {
  std::vector<RefMatch> out;
  std::vector<std::vector<const Tuple*>> pools;
  for (const auto& a : body.atoms) {
    std::vector<const Tuple*> pool;
    for (const auto& t : instance.tuples()) {
      if (t.relation == a.relation) pool.push_back(instance.find(t.tid));
    }
    pools.push_back(std::move(pool));
  }
  std::vector<std::size_t> pick(pools.size(), 0);
  for (const auto& p : pools) {
    if (p.empty()) return out;
  }
  while (true) {
    std::vector<const Tuple*> chosen;
    for (std::size_t i = 0; i < pools.size(); ++i) chosen.push_back(pools[i][pick[i]]);
    std::map<std::string, Value> binding;
    if (ref_body_holds(body, chosen, binding)) {
      RefMatch m;
      for (const auto* t : chosen) m.witness.push_back(t->tid);
      m.binding = std::move(binding);
      out.push_back(std::move(m));
    }
    std::size_t i = pools.size();
    while (true) {
      if (i == 0) return out;
      --i;
      if (++pick[i] < pools[i].size()) break;
      pick[i] = 0;
    }
  }
}

inline bool ref_consistent(const Instance& instance, const std::vector<DenialConstraint>& dcs) {
  for (const auto& dc : dcs) {
    if (!ref_matches(dc.body, instance).empty()) return false;
  }
  return true;
}

inline std::vector<Tid> all_tids(const Instance& instance) {
  std::vector<Tid> out;
  for (const auto& t : instance.tuples()) out.push_back(t.tid);
  return out;
}

inline TidSet subset_of(const std::vector<Tid>& universe, std::uint32_t mask) {
  TidSet out;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask & (1u << i)) out.insert(universe[i]);
  }
  return out;
}

/// Deletion sets of all subset repairs, by enumerating every sub-instance.
inline std::set<TidSet> ref_s_repairs(const Instance& instance, const std::vector<DenialConstraint>& dcs) {
  const auto universe = all_tids(instance);
  std::vector<TidSet> consistent;
  for (std::uint32_t mask = 0; mask < (1u << universe.size()); ++mask) {
    const TidSet del = subset_of(universe, mask);
    if (ref_consistent(delete_tids(instance, del), dcs)) consistent.push_back(del);
  }
  std::set<TidSet> out;
  for (const auto& d : consistent) {
    bool minimal = true;
    for (const auto& e : consistent) {
      if (e.size() < d.size() && std::includes(d.begin(), d.end(), e.begin(), e.end())) minimal = false;
    }
    if (minimal) out.insert(d);
  }
  return out;
}

inline std::set<TidSet> ref_c_repairs(const Instance& instance, const std::vector<DenialConstraint>& dcs) {
  const auto all = ref_s_repairs(instance, dcs);
  std::size_t best = SIZE_MAX;
  for (const auto& d : all) best = std::min(best, d.size());
  std::set<TidSet> out;
  for (const auto& d : all) {
    if (d.size() == best) out.insert(d);
  }
  return out;
}

inline bool ref_holds(const ConjunctiveQuery& q, const Instance& instance) {
  return !ref_matches(q.body, instance).empty();
}

inline std::set<std::vector<Value>> ref_answers(const ConjunctiveQuery& q, const Instance& instance) {
  std::set<std::vector<Value>> out;
  for (const auto& m : ref_matches(q.body, instance)) {
    std::vector<Value> row;
    bool has_null = false;
    for (const auto& h : q.head) {
      row.push_back(m.binding.at(h));
      has_null = has_null || row.back().is_null();
    }
    if (!has_null) out.insert(row);
  }
  return out;
}

inline std::set<std::vector<Value>> ref_consistent_answers(const ConjunctiveQuery& q, const Instance& instance,
                                                           const std::set<TidSet>& deletions) {
  std::optional<std::set<std::vector<Value>>> acc;
  for (const auto& d : deletions) {
    const auto here = ref_answers(q, delete_tids(instance, d));
    if (!acc) {
      acc = here;
      continue;
    }
    std::set<std::vector<Value>> kept;
    for (const auto& row : *acc) {
      if (here.count(row)) kept.insert(row);
    }
    acc = std::move(kept);
  }
  return acc.value_or(std::set<std::vector<Value>>{});
}

struct RefCause {
  std::size_t gamma_size = 0;
  std::size_t count = 0;
  TidSet first;
};

/// Causes of a Boolean query by trying every contingency set over the whole
/// instance, smallest first.
inline std::map<Tid, RefCause> ref_causes(const ConjunctiveQuery& q, const Instance& instance) {
  const auto universe = all_tids(instance);
  std::map<Tid, RefCause> out;
  for (std::size_t ti = 0; ti < universe.size(); ++ti) {
    const Tid t = universe[ti];
    std::optional<RefCause> found;
    for (std::size_t k = 0; k < universe.size() && !found; ++k) {
      RefCause c{k, 0, {}};
      for (std::uint32_t mask = 0; mask < (1u << universe.size()); ++mask) {
        if ((mask & (1u << ti)) || static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        const TidSet gamma = subset_of(universe, mask);
        if (!ref_holds(q, delete_tids(instance, gamma))) continue;
        TidSet with_t = gamma;
        with_t.insert(t);
        if (ref_holds(q, delete_tids(instance, with_t))) continue;
        if (c.count == 0 || gamma < c.first) c.first = gamma;
        ++c.count;
      }
      if (c.count > 0) found = c;
    }
    if (found) out[t] = *found;
  }
  return out;
}

/// Secrecy instances by trying every set of non-NULL cells.
inline std::set<std::set<CellChange>> ref_secrecy(const Instance& instance, const ConjunctiveQuery& view) {
  std::vector<CellChange> cells;
  for (const auto& t : instance.tuples()) {
    const auto& rel = instance.schema().at(t.relation);
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      if (!t.values[k].is_null()) cells.push_back(CellChange{t.tid, rel.attributes[k]});
    }
  }
  auto hidden = [&](const Instance& inst) {
    for (const auto& m : ref_matches(view.body, inst)) {
      if (view.head.empty()) return false;
      for (const auto& h : view.head) {
        if (!m.binding.at(h).is_null()) return false;
      }
    }
    return true;
  };
  std::vector<std::set<CellChange>> ok;
  for (std::uint32_t mask = 0; mask < (1u << cells.size()); ++mask) {
    std::set<CellChange> changes;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (mask & (1u << i)) changes.insert(cells[i]);
    }
    if (hidden(apply_cell_changes(instance, changes))) ok.push_back(std::move(changes));
  }
  std::set<std::set<CellChange>> out;
  for (const auto& s : ok) {
    bool minimal = true;
    for (const auto& g : ok) {
      if (g.size() < s.size() && std::includes(s.begin(), s.end(), g.begin(), g.end())) minimal = false;
    }
    if (minimal) out.insert(s);
  }
  return out;
}

using Assignment = std::map<std::size_t, std::string>;

/// Minimal label-switching assignments by scanning the whole domain product.
inline std::set<Assignment> ref_counterfactuals(const ClassifierSpec& spec, const std::vector<std::string>& entity) {
  std::vector<Assignment> switching;
  std::vector<std::size_t> pick(spec.features.size(), 0);
  while (true) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < pick.size(); ++i) v.push_back(spec.features[i].domain[pick[i]]);
    if (spec.table.at(v) == 0) {
      Assignment a;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != entity[i]) a[i] = v[i];
      }
      switching.push_back(a);
    }
    std::size_t i = pick.size();
    bool done = true;
    while (i > 0) {
      --i;
      if (++pick[i] < spec.features[i].domain.size()) {
        done = false;
        break;
      }
      pick[i] = 0;
    }
    if (done) break;
  }
  std::set<Assignment> out;
  for (const auto& a : switching) {
    bool minimal = true;
    for (const auto& b : switching) {
      if (b.size() >= a.size()) continue;
      bool inside = true;
      for (const auto& [k, v] : b) {
        auto it = a.find(k);
        if (it == a.end() || it->second != v) inside = false;
      }
      if (inside) minimal = false;
    }
    if (minimal) out.insert(a);
  }
  return out;
}

inline std::vector<Rational> ref_feature_responsibility(const ClassifierSpec& spec,
                                                        const std::vector<std::string>& entity) {
  const auto minimal = ref_counterfactuals(spec, entity);
  std::vector<Rational> out;
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    std::size_t best = 0;
    for (const auto& a : minimal) {
      if (a.count(f) && (best == 0 || a.size() < best)) best = a.size();
    }
    out.push_back(best == 0 ? Rational(0) : Rational(1, static_cast<std::int64_t>(best)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random problems.

struct RandomOptions {
  std::size_t max_tuples = 8;
  std::size_t max_dcs = 2;
  std::size_t max_atoms = 3;
  std::size_t max_arity = 3;
  double null_rate = 0.0;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::size_t uniform(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  Instance instance(const RandomOptions& o) {
    Schema schema;
    const std::size_t relations = uniform(1, 3);
    for (std::size_t r = 0; r < relations; ++r) {
      RelationSchema rel{std::string(1, static_cast<char>('P' + r)), {}};
      const std::size_t arity = uniform(1, o.max_arity);
      for (std::size_t a = 0; a < arity; ++a) rel.attributes.push_back(std::string(1, static_cast<char>('A' + a)));
      schema.add_relation(std::move(rel));
    }
    Instance inst(schema);
    const std::size_t n = uniform(1, o.max_tuples);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rel = schema.relations()[uniform(0, schema.relations().size() - 1)];
      Tuple t{Tid{"t" + std::to_string(i + 1)}, rel.name, {}};
      for (std::size_t k = 0; k < rel.arity(); ++k) {
        t.values.push_back(chance(o.null_rate) ? Value::null() : Value::constant("c" + std::to_string(uniform(1, 3))));
      }
      inst = insert(inst, std::move(t));
    }
    return inst;
  }

  RuleBody body(const Schema& schema, const RandomOptions& o) {
    static const char* vars[] = {"x", "y", "z", "w"};
    RuleBody b;
    const std::size_t atoms = uniform(1, o.max_atoms);
    for (std::size_t i = 0; i < atoms; ++i) {
      const auto& rel = schema.relations()[uniform(0, schema.relations().size() - 1)];
      Atom a{rel.name, {}};
      for (std::size_t k = 0; k < rel.arity(); ++k) {
        if (chance(0.12)) {
          a.args.push_back(Term::constant("c" + std::to_string(uniform(1, 3))));
        } else {
          a.args.push_back(Term::variable(vars[uniform(0, 3)]));
        }
      }
      b.atoms.push_back(std::move(a));
    }
    const auto bound = b.atom_variables();
    if (!bound.empty() && chance(0.25)) {
      Comparison c;
      c.left = Term::variable(bound[uniform(0, bound.size() - 1)]);
      c.op = chance(0.5) ? CompareOp::Equal : CompareOp::NotEqual;
      if (bound.size() > 1 && chance(0.6)) {
        do {
          c.right = Term::variable(bound[uniform(0, bound.size() - 1)]);
        } while (c.right == c.left);
      } else {
        c.right = Term::constant("c" + std::to_string(uniform(1, 3)));
      }
      b.comparisons.push_back(std::move(c));
    }
    return b;
  }

  std::vector<DenialConstraint> dcs(const Schema& schema, const RandomOptions& o) {
    std::vector<DenialConstraint> out;
    const std::size_t n = uniform(1, o.max_dcs);
    for (std::size_t i = 0; i < n; ++i) out.push_back({"k" + std::to_string(i + 1), body(schema, o)});
    return out;
  }

  /// A query over the body; the head takes up to `max_head` of its variables.
  ConjunctiveQuery query(const Schema& schema, const RandomOptions& o, std::size_t max_head) {
    ConjunctiveQuery q{"q", {}, body(schema, o), false};
    const auto vars = q.body.atom_variables();
    for (const auto& v : vars) {
      if (q.head.size() < max_head && chance(0.6)) q.head.push_back(v);
    }
    return q;
  }

  ClassifierSpec classifier() {
    ClassifierSpec spec;
    const std::size_t n = uniform(1, 3);
    for (std::size_t i = 0; i < n; ++i) {
      Feature f{"f" + std::to_string(i + 1), {}};
      const std::size_t d = uniform(2, 3);
      for (std::size_t k = 0; k < d; ++k) f.domain.push_back(std::to_string(k));
      spec.features.push_back(std::move(f));
    }
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<std::string> v;
      for (std::size_t i = 0; i < n; ++i) v.push_back(spec.features[i].domain[pick[i]]);
      spec.table[v] = chance(0.55) ? 1 : 0;
      std::size_t i = n;
      bool done = true;
      while (i > 0) {
        --i;
        if (++pick[i] < spec.features[i].domain.size()) {
          done = false;
          break;
        }
        pick[i] = 0;
      }
      if (done) break;
    }
    return spec;
  }

 private:
  std::mt19937_64 rng_;
};

/// Instance plus constraints, as used by the oracle-agreement checks.
struct RepairCase {
  Instance instance;
  std::vector<DenialConstraint> dcs;
};

/// Deterministic batch of small repair problems (at most 8 tuples, 2
/// constraints of at most 3 atoms); every third case carries NULLs.
inline std::vector<RepairCase> random_repair_cases(std::uint64_t seed, std::size_t count) {
  Generator gen(seed);
  std::vector<RepairCase> out;
  for (std::size_t i = 0; i < count; ++i) {
    RandomOptions o;
    o.null_rate = i % 3 == 2 ? 0.15 : 0.0;
    auto inst = gen.instance(o);
    auto dcs = gen.dcs(inst.schema(), o);
    out.push_back({std::move(inst), std::move(dcs)});
  }
  return out;
}

inline std::set<TidSet> model_deletions(const std::vector<asp::Model>& models, const Schema& schema) {
  std::set<TidSet> out;
  for (const auto& m : models) out.insert(asp::deleted_tids(m, schema));
  return out;
}

}  // namespace rk_test
