#pragma once

// Secrecy instances: inclusion-minimal sets of cell-to-NULL changes after
// which a secret view reveals nothing.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "repairkit/relational.hpp"
#include "repairkit/repair.hpp"
#include "repairkit/spec.hpp"

namespace repairkit {

struct SecrecyInstance {
  Instance instance;
  std::set<CellChange> changes;
};

/// A view match reveals data when its head holds some non-NULL value. For a
/// Boolean view every match reveals.
inline bool is_revealing(const ConjunctiveQuery& view, const Match& m) {
  if (view.is_boolean()) return true;
  for (const auto& v : view.head) {
    if (!m.assignment.at(v).is_null()) return true;
  }
  return false;
}

inline std::vector<Match> revealing_matches(const ConjunctiveQuery& view, const Instance& instance) {
  std::vector<Match> out;
  for (auto& m : find_matches(view.body, instance)) {
    if (is_revealing(view, m)) out.push_back(std::move(m));
  }
  return out;
}

/// Argument positions of the view body whose nulling can affect a match:
/// constants, join variables, comparison variables and head variables.
/// A variable occurring once and nowhere else binds NULL just as well.
inline std::vector<std::vector<bool>> sensitive_positions(const ConjunctiveQuery& view) {
  const auto occ = view.body.occurrences();
  const auto cmp = view.body.comparison_variables();
  const std::set<std::string> head(view.head.begin(), view.head.end());
  std::vector<std::vector<bool>> out;
  for (const auto& a : view.body.atoms) {
    std::vector<bool> row;
    for (const auto& t : a.args) {
      row.push_back(!t.is_variable() || occ.at(t.name) > 1 || cmp.count(t.name) || head.count(t.name));
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {

class SecrecySearch {
 public:
  SecrecySearch(const Instance& base, const ConjunctiveQuery& view)
      : base_(base), view_(view), sensitive_(sensitive_positions(view)) {}

  std::vector<std::set<CellChange>> run() {
    std::set<CellChange> current;
    descend(current);
    std::vector<std::set<CellChange>> out;
    for (const auto& s : found_) {
      bool minimal = true;
      for (const auto& g : found_) {
        if (g.size() < s.size() && std::includes(s.begin(), s.end(), g.begin(), g.end())) {
          minimal = false;
          break;
        }
      }
      if (minimal) out.push_back(s);
    }
    return out;
  }

 private:
  void descend(std::set<CellChange>& current) {
    for (const auto& f : found_) {
      if (std::includes(current.begin(), current.end(), f.begin(), f.end())) return;
    }
    const Instance now = apply_cell_changes(base_, current);
    const auto open = revealing_matches(view_, now);
    if (open.empty()) {
      found_.insert(current);
      return;
    }
    // Any solution extending `current` must null a sensitive cell of the
    // first revealing match, since nothing else can affect that match.
    const Match& m = open.front();
    std::set<CellChange> options;
    for (std::size_t i = 0; i < view_.body.atoms.size(); ++i) {
      const Tuple& t = now.at(m.witness[i]);
      const auto& rel = now.schema().at(t.relation);
      for (std::size_t k = 0; k < t.values.size(); ++k) {
        if (!sensitive_[i][k] || t.values[k].is_null()) continue;
        options.insert(CellChange{t.tid, rel.attributes[k]});
      }
    }
    for (const auto& c : options) {
      current.insert(c);
      descend(current);
      current.erase(c);
    }
  }

  const Instance& base_;
  const ConjunctiveQuery& view_;
  std::vector<std::vector<bool>> sensitive_;
  std::set<std::set<CellChange>> found_;
};

}  // namespace detail

/// Every secrecy instance of `view`, ordered by change set. Cells that are
/// already NULL are never counted as changes.
inline std::vector<SecrecyInstance> secrecy_instances(const Instance& instance, const ConjunctiveQuery& view) {
  std::vector<SecrecyInstance> out;
  for (auto& changes : detail::SecrecySearch(instance, view).run()) {
    out.push_back(SecrecyInstance{apply_cell_changes(instance, changes), std::move(changes)});
  }
  return out;
}

/// Answers of `query` holding in every secrecy instance of `view`, without
/// NULL components.
inline AnswerSet secret_answers(const ConjunctiveQuery& query, const Instance& instance,
                                const ConjunctiveQuery& view) {
  const auto secrets = secrecy_instances(instance, view);
  AnswerSet certain;
  bool first = true;
  for (const auto& s : secrets) {
    AnswerSet here;
    for (const auto& t : evaluate(query, s.instance).tuples()) {
      if (std::none_of(t.begin(), t.end(), [](const Value& v) { return v.is_null(); })) here.insert(t);
    }
    if (first) {
      certain = std::move(here);
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

}  // namespace repairkit
