#pragma once

// Value model for small relational instances: constants and SQL-style NULL,
// globally identified tuples, schemas, and value-semantic instances.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "repairkit/error.hpp"

namespace repairkit {

/// A cell value: either a constant symbol or NULL.
///
/// `operator==` and `operator<=>` are structural (NULL equals NULL) so values
/// can live in ordered containers. Query evaluation must go through
/// `sql_equal` / `sql_not_equal`, where any comparison involving NULL is
/// unsatisfied.
class Value {
 public:
  Value() = default;

  static Value null() { return Value(); }
  static Value constant(std::string symbol) { return Value(std::move(symbol)); }

  bool is_null() const noexcept { return !symbol_.has_value(); }
  const std::string& symbol() const { return *symbol_; }

  std::string to_string() const { return is_null() ? std::string("NULL") : *symbol_; }

  bool operator==(const Value&) const = default;
  std::strong_ordering operator<=>(const Value&) const = default;

 private:
  explicit Value(std::string symbol) : symbol_(std::move(symbol)) {}
  std::optional<std::string> symbol_;
};

/// SQL equality: true only for two constants with the same symbol.
inline bool sql_equal(const Value& a, const Value& b) {
  return !a.is_null() && !b.is_null() && a.symbol() == b.symbol();
}

/// SQL inequality: true only for two constants with different symbols.
inline bool sql_not_equal(const Value& a, const Value& b) {
  return !a.is_null() && !b.is_null() && a.symbol() != b.symbol();
}

/// Global tuple identifier. Ordering is lexicographic on the label.
struct Tid {
  std::string label;

  bool operator==(const Tid&) const = default;
  std::strong_ordering operator<=>(const Tid&) const = default;
};

using TidSet = std::set<Tid>;

inline std::string to_string(const TidSet& tids) {
  std::string out = "{";
  bool first = true;
  for (const auto& t : tids) {
    if (!first) out += ", ";
    out += t.label;
    first = false;
  }
  return out + "}";
}

struct RelationSchema {
  std::string name;
  std::vector<std::string> attributes;

  std::size_t arity() const { return attributes.size(); }

  std::optional<std::size_t> attribute_index(const std::string& attribute) const {
    auto it = std::find(attributes.begin(), attributes.end(), attribute);
    if (it == attributes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - attributes.begin());
  }

  bool operator==(const RelationSchema&) const = default;
};

/// Ordered list of relations; declaration order is preserved.
class Schema {
 public:
  Schema() = default;

  /// Throws InvalidSchema on empty arity or repeated attribute names and
  /// DuplicateName on a repeated relation name.
  void add_relation(RelationSchema relation) {
    if (find(relation.name) != nullptr) {
      throw Error(ErrorKind::DuplicateName, "relation '" + relation.name + "' declared twice");
    }
    if (relation.attributes.empty()) {
      throw Error(ErrorKind::InvalidSchema, "relation '" + relation.name + "' has arity 0");
    }
    std::set<std::string> seen;
    for (const auto& a : relation.attributes) {
      if (!seen.insert(a).second) {
        throw Error(ErrorKind::InvalidSchema,
                    "attribute '" + a + "' repeated in relation '" + relation.name + "'");
      }
    }
    relations_.push_back(std::move(relation));
  }

  const RelationSchema* find(const std::string& name) const {
    for (const auto& r : relations_) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }

  const RelationSchema& at(const std::string& name) const {
    if (const auto* r = find(name)) return *r;
    throw Error(ErrorKind::UnknownRelation, "unknown relation '" + name + "'");
  }

  const std::vector<RelationSchema>& relations() const { return relations_; }
  bool empty() const { return relations_.empty(); }

  bool operator==(const Schema&) const = default;

 private:
  std::vector<RelationSchema> relations_;
};

struct Tuple {
  Tid tid;
  std::string relation;
  std::vector<Value> values;

  bool operator==(const Tuple&) const = default;
};

/// Canonical tuple order: relation name, then tid label.
inline bool canonical_less(const Tuple& a, const Tuple& b) {
  if (a.relation != b.relation) return a.relation < b.relation;
  return a.tid < b.tid;
}

inline std::string to_string(const Tuple& t) {
  std::string out = t.relation + "(" + t.tid.label + ";";
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    out += (i == 0 ? " " : ", ") + t.values[i].to_string();
  }
  return out + ")";
}

/// Removal of one cell's value, i.e. replacing it by NULL.
struct CellChange {
  Tid tid;
  std::string attribute;

  bool operator==(const CellChange&) const = default;
  std::strong_ordering operator<=>(const CellChange&) const = default;
};

inline std::string to_string(const CellChange& c) { return "(" + c.tid.label + ", " + c.attribute + ")"; }

struct ChangedCell {
  Tid tid;
  std::string attribute;
  Value before;
  Value after;

  bool operator==(const ChangedCell&) const = default;
  std::strong_ordering operator<=>(const ChangedCell&) const = default;
};

struct InstanceDiff {
  TidSet deleted;
  std::set<ChangedCell> changed;

  bool empty() const { return deleted.empty() && changed.empty(); }
  bool operator==(const InstanceDiff&) const = default;
};

/// A set of tuples over a schema, keyed by global tid. Instances are values:
/// the free functions below return new instances and never touch their input.
class Instance {
 public:
  Instance() = default;
  explicit Instance(Schema schema) : schema_(std::move(schema)) {}

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }

  bool contains(const Tid& tid) const { return tuples_.count(tid) != 0; }

  const Tuple* find(const Tid& tid) const {
    auto it = tuples_.find(tid);
    return it == tuples_.end() ? nullptr : &it->second;
  }

  const Tuple& at(const Tid& tid) const {
    if (const auto* t = find(tid)) return *t;
    throw Error(ErrorKind::UnknownTid, "unknown tid '" + tid.label + "'");
  }

  TidSet tids() const {
    TidSet out;
    for (const auto& [tid, _] : tuples_) out.insert(tid);
    return out;
  }

  /// All tuples in canonical order.
  std::vector<Tuple> tuples() const {
    std::vector<Tuple> out;
    out.reserve(tuples_.size());
    for (const auto& [_, t] : tuples_) out.push_back(t);
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
  }

  /// Tuples of one relation, ordered by tid.
  std::vector<const Tuple*> tuples_of(const std::string& relation) const {
    std::vector<const Tuple*> out;
    for (const auto& [_, t] : tuples_) {
      if (t.relation == relation) out.push_back(&t);
    }
    return out;
  }

  bool has_nulls() const {
    for (const auto& [_, t] : tuples_) {
      for (const auto& v : t.values) {
        if (v.is_null()) return true;
      }
    }
    return false;
  }

  bool operator==(const Instance&) const = default;

 private:
  friend Instance insert(const Instance&, Tuple);
  friend Instance delete_tids(const Instance&, const TidSet&);
  friend Instance apply_cell_changes(const Instance&, const std::set<CellChange>&);

  Schema schema_;
  std::map<Tid, Tuple> tuples_;
};

/// Errors: DuplicateTid, UnknownRelation, ArityMismatch.
inline Instance insert(const Instance& instance, Tuple tuple) {
  const auto* rel = instance.schema().find(tuple.relation);
  if (rel == nullptr) {
    throw Error(ErrorKind::UnknownRelation, "unknown relation '" + tuple.relation + "'");
  }
  if (rel->arity() != tuple.values.size()) {
    throw Error(ErrorKind::ArityMismatch,
                "relation '" + tuple.relation + "' has arity " + std::to_string(rel->arity()) +
                    ", tuple " + tuple.tid.label + " has " + std::to_string(tuple.values.size()) +
                    " values");
  }
  if (instance.contains(tuple.tid)) {
    throw Error(ErrorKind::DuplicateTid, "tid '" + tuple.tid.label + "' already present");
  }
  Instance out = instance;
  Tid key = tuple.tid;
  out.tuples_.emplace(std::move(key), std::move(tuple));
  return out;
}

/// Errors: UnknownTid.
inline Instance delete_tids(const Instance& instance, const TidSet& tids) {
  for (const auto& t : tids) {
    if (!instance.contains(t)) throw Error(ErrorKind::UnknownTid, "unknown tid '" + t.label + "'");
  }
  Instance out = instance;
  for (const auto& t : tids) out.tuples_.erase(t);
  return out;
}

/// Errors: UnknownTid, UnknownAttribute.
inline Instance apply_cell_changes(const Instance& instance, const std::set<CellChange>& changes) {
  Instance out = instance;
  for (const auto& c : changes) {
    auto it = out.tuples_.find(c.tid);
    if (it == out.tuples_.end()) {
      throw Error(ErrorKind::UnknownTid, "unknown tid '" + c.tid.label + "'");
    }
    const auto& rel = out.schema_.at(it->second.relation);
    auto pos = rel.attribute_index(c.attribute);
    if (!pos) {
      throw Error(ErrorKind::UnknownAttribute,
                  "relation '" + rel.name + "' has no attribute '" + c.attribute + "'");
    }
    it->second.values[*pos] = Value::null();
  }
  return out;
}

/// Describes `other` as deletions and cell rewrites of `base`.
/// Errors: NotDerivable when `other` holds tids, relations, or relation
/// reassignments that `base` cannot explain.
inline InstanceDiff diff(const Instance& base, const Instance& other) {
  InstanceDiff out;
  for (const auto& t : other.tuples()) {
    const Tuple* b = base.find(t.tid);
    if (b == nullptr) {
      throw Error(ErrorKind::NotDerivable, "tid '" + t.tid.label + "' is absent from the base instance");
    }
    if (b->relation != t.relation || base.schema().find(t.relation) == nullptr) {
      throw Error(ErrorKind::NotDerivable,
                  "tid '" + t.tid.label + "' belongs to relation '" + b->relation + "' in the base instance");
    }
    if (b->values.size() != t.values.size()) {
      throw Error(ErrorKind::NotDerivable, "arity of tid '" + t.tid.label + "' differs");
    }
    const auto& rel = base.schema().at(t.relation);
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      if (b->values[i] != t.values[i]) {
        out.changed.insert({t.tid, rel.attributes[i], b->values[i], t.values[i]});
      }
    }
  }
  for (const auto& tid : base.tids()) {
    if (!other.contains(tid)) out.deleted.insert(tid);
  }
  return out;
}

}  // namespace repairkit
