#pragma once

// Problem specifications: denial constraints, conjunctive queries, secret
// views and table classifiers over a relational instance.

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repairkit/relational.hpp"

namespace repairkit {

struct Term {
  enum class Kind { Variable, Constant };

  Kind kind = Kind::Variable;
  std::string name;

  static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }

  bool is_variable() const { return kind == Kind::Variable; }

  bool operator==(const Term&) const = default;
  std::strong_ordering operator<=>(const Term&) const = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;

  bool operator==(const Atom&) const = default;
};

enum class CompareOp { Equal, NotEqual };

struct Comparison {
  Term left;
  CompareOp op = CompareOp::Equal;
  Term right;

  bool operator==(const Comparison&) const = default;
};

/// A conjunction of relational atoms and comparisons.
///
/// Ground comparisons are folded by the parser: true ones disappear and a
/// false one sets `contradictory`, after which the body has no matches.
struct RuleBody {
  std::vector<Atom> atoms;
  std::vector<Comparison> comparisons;
  bool contradictory = false;

  /// Variables of the relational atoms, in order of first occurrence.
  std::vector<std::string> atom_variables() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& a : atoms) {
      for (const auto& t : a.args) {
        if (t.is_variable() && seen.insert(t.name).second) out.push_back(t.name);
      }
    }
    return out;
  }

  /// Number of occurrences of each variable across the relational atoms.
  std::map<std::string, int> occurrences() const {
    std::map<std::string, int> out;
    for (const auto& a : atoms) {
      for (const auto& t : a.args) {
        if (t.is_variable()) ++out[t.name];
      }
    }
    return out;
  }

  std::set<std::string> comparison_variables() const {
    std::set<std::string> out;
    for (const auto& c : comparisons) {
      if (c.left.is_variable()) out.insert(c.left.name);
      if (c.right.is_variable()) out.insert(c.right.name);
    }
    return out;
  }

  bool operator==(const RuleBody&) const = default;
};

struct DenialConstraint {
  std::string name;
  RuleBody body;

  bool operator==(const DenialConstraint&) const = default;
};

/// A conjunctive query; an empty head makes it Boolean. Secret views are
/// queries with `secret` set.
struct ConjunctiveQuery {
  std::string name;
  std::vector<std::string> head;
  RuleBody body;
  bool secret = false;

  bool is_boolean() const { return head.empty(); }

  bool operator==(const ConjunctiveQuery&) const = default;
};

struct Feature {
  std::string name;
  std::vector<std::string> domain;

  bool operator==(const Feature&) const = default;
};

struct EntityRecord {
  std::string id;
  std::vector<std::string> values;

  bool operator==(const EntityRecord&) const = default;
};

/// Finite-domain classifier given as a decision table.
///
/// An empty table means the labels come from an external classifier; a
/// non-empty one is total over the product of the feature domains.
struct ClassifierSpec {
  std::vector<Feature> features;
  std::map<std::vector<std::string>, int> table;
  std::vector<EntityRecord> entities;

  bool empty() const { return features.empty() && table.empty() && entities.empty(); }

  const EntityRecord* find_entity(const std::string& id) const {
    for (const auto& e : entities) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  bool operator==(const ClassifierSpec&) const = default;
};

struct ProblemSpec {
  Instance instance;
  std::vector<DenialConstraint> constraints;
  std::vector<ConjunctiveQuery> queries;
  std::vector<ConjunctiveQuery> views;
  ClassifierSpec classifier;

  const Schema& schema() const { return instance.schema(); }

  const ConjunctiveQuery* find_query(const std::string& name) const {
    for (const auto& q : queries) {
      if (q.name == name) return &q;
    }
    return nullptr;
  }

  const ConjunctiveQuery* find_view(const std::string& name) const {
    for (const auto& v : views) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }

  bool operator==(const ProblemSpec&) const = default;
};

}  // namespace repairkit
