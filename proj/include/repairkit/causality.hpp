#pragma once

// Actual causes and responsibilities of tuples for Boolean conjunctive
// queries, computed by direct contingency search and through repairs.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repairkit/rational.hpp"
#include "repairkit/relational.hpp"
#include "repairkit/repair.hpp"
#include "repairkit/spec.hpp"

namespace repairkit {

/// Calls `fn` with every k-subset of {0..n-1} in lexicographic order until
/// it returns false.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!fn(static_cast<const std::vector<std::size_t>&>(idx))) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

enum class CauseKind { Counterfactual, Actual };

inline const char* to_string(CauseKind k) { return k == CauseKind::Counterfactual ? "counterfactual" : "actual"; }

struct CauseReport {
  Tid tid;
  CauseKind kind = CauseKind::Actual;
  TidSet min_contingency;                  // lexicographically first minimum contingency set
  Rational responsibility;                 // 1 / (1 + |min_contingency|)
  std::size_t min_contingency_count = 0;   // how many contingency sets reach the minimum

  bool operator==(const CauseReport&) const = default;
};

namespace detail {

inline std::set<TidSet> query_witnesses(const Instance& instance, const ConjunctiveQuery& query) {
  std::set<TidSet> raw;
  Matcher(query.body, instance).run([&](const Match& m) { raw.insert(m.witness_set()); });
  return minimize_edges(raw);
}

inline bool survives(const std::set<TidSet>& witnesses, const TidSet& removed) {
  for (const auto& w : witnesses) {
    bool intact = true;
    for (const auto& t : w) {
      if (removed.count(t)) {
        intact = false;
        break;
      }
    }
    if (intact) return true;
  }
  return false;
}

inline void require_true(const std::set<TidSet>& witnesses, const ConjunctiveQuery& query) {
  if (witnesses.empty()) {
    throw Error(ErrorKind::QueryFalseInInstance, "query '" + query.name + "' is false in the instance");
  }
}

}  // namespace detail

/// Every actual cause of the (existentially read) query, ordered by tid.
///
/// For each tuple t the contingency set Γ ranges over the other tuples by
/// increasing size; the first size where the query still holds without Γ
/// but fails without Γ ∪ {t} fixes the responsibility 1/(1+|Γ|). Tuples in
/// no minimal witness can never change the query's truth and are skipped.
inline std::vector<CauseReport> actual_causes(const Instance& instance, const ConjunctiveQuery& query) {
  const auto witnesses = detail::query_witnesses(instance, query);
  detail::require_true(witnesses, query);

  TidSet relevant;
  for (const auto& w : witnesses) relevant.insert(w.begin(), w.end());

  std::vector<CauseReport> out;
  for (const auto& t : relevant) {
    std::vector<Tid> others;
    for (const auto& o : relevant) {
      if (o != t) others.push_back(o);
    }
    std::optional<CauseReport> report;
    for (std::size_t k = 0; k <= others.size() && !report; ++k) {
      std::size_t count = 0;
      TidSet first;
      for_each_combination(others.size(), k, [&](const std::vector<std::size_t>& idx) {
        TidSet gamma;
        for (auto i : idx) gamma.insert(others[i]);
        if (!detail::survives(witnesses, gamma)) return true;
        gamma.insert(t);
        const bool falsified = !detail::survives(witnesses, gamma);
        gamma.erase(t);
        if (falsified) {
          if (count == 0) first = gamma;
          ++count;
        }
        return true;
      });
      if (count > 0) {
        report = CauseReport{t, k == 0 ? CauseKind::Counterfactual : CauseKind::Actual, first,
                             Rational::responsibility(k), count};
      }
    }
    if (report) out.push_back(std::move(*report));
  }
  return out;
}

/// The same reports obtained from the subset repairs of the denial
/// constraint that forbids the query body: t is a cause iff some repair
/// deletes it, and its smallest such repair minus t is a minimum
/// contingency set.
inline std::vector<CauseReport> causes_via_repairs(const Instance& instance, const ConjunctiveQuery& query) {
  const std::vector<DenialConstraint> dcs{DenialConstraint{query.name, query.body}};
  const auto reps = s_repairs(instance, dcs);
  if (reps.size() == 1 && reps.front().deleted.empty()) {
    throw Error(ErrorKind::QueryFalseInInstance, "query '" + query.name + "' is false in the instance");
  }

  std::map<Tid, std::vector<const Repair*>> containing;
  for (const auto& r : reps) {
    for (const auto& t : r.deleted) containing[t].push_back(&r);
  }

  std::vector<CauseReport> out;
  for (const auto& [t, rs] : containing) {
    std::size_t best = rs.front()->deleted.size();
    for (const auto* r : rs) best = std::min(best, r->deleted.size());
    std::set<TidSet> gammas;
    for (const auto* r : rs) {
      if (r->deleted.size() != best) continue;
      TidSet g = r->deleted;
      g.erase(t);
      gammas.insert(std::move(g));
    }
    const std::size_t k = best - 1;
    out.push_back(CauseReport{t, k == 0 ? CauseKind::Counterfactual : CauseKind::Actual, *gammas.begin(),
                              Rational::responsibility(k), gammas.size()});
  }
  return out;
}

}  // namespace repairkit
