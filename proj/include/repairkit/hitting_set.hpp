#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <vector>

namespace repairkit {

/// Drops every edge that strictly contains another edge. Minimal hitting
/// sets are unchanged by this.
template <typename T>
std::set<std::set<T>> minimize_edges(const std::set<std::set<T>>& edges) {
  std::set<std::set<T>> out;
  for (const auto& e : edges) {
    bool dominated = false;
    for (const auto& f : edges) {
      if (f.size() < e.size() && std::includes(e.begin(), e.end(), f.begin(), f.end())) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.insert(e);
  }
  return out;
}

template <typename T>
bool hits_all(const std::set<T>& candidate, const std::set<std::set<T>>& edges) {
  for (const auto& e : edges) {
    bool hit = false;
    for (const auto& x : e) {
      if (candidate.count(x)) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

namespace detail {

template <typename T>
class HittingSetSearch {
 public:
  explicit HittingSetSearch(std::vector<std::set<T>> edges) : edges_(std::move(edges)) {}

  std::vector<std::set<T>> run() {
    std::set<T> current;
    descend(current);
    std::vector<std::set<T>> out;
    for (const auto& h : found_) {
      bool minimal = true;
      for (const auto& g : found_) {
        if (g.size() < h.size() && std::includes(h.begin(), h.end(), g.begin(), g.end())) {
          minimal = false;
          break;
        }
      }
      if (minimal) out.push_back(h);
    }
    return out;
  }

 private:
  bool subsumed(const std::set<T>& current) const {
    for (const auto& h : found_) {
      if (std::includes(current.begin(), current.end(), h.begin(), h.end())) return true;
    }
    return false;
  }

  void descend(std::set<T>& current) {
    if (subsumed(current)) return;
    const std::set<T>* open = nullptr;
    for (const auto& e : edges_) {
      bool hit = false;
      for (const auto& x : e) {
        if (current.count(x)) {
          hit = true;
          break;
        }
      }
      if (!hit) {
        open = &e;
        break;
      }
    }
    if (open == nullptr) {
      found_.insert(current);
      return;
    }
    for (const auto& x : *open) {
      current.insert(x);
      descend(current);
      current.erase(x);
    }
  }

  std::vector<std::set<T>> edges_;
  std::set<std::set<T>> found_;
};

}  // namespace detail

/// Every inclusion-minimal set meeting all `edges`, in lexicographic order.
///
/// Depth-first: pick the first edge the partial set misses and branch on its
/// elements. Branches that already contain a found hitting set are cut, and
/// a final filter keeps only the inclusion-minimal results. With no edges
/// the only minimal hitting set is the empty set.
template <typename T>
std::vector<std::set<T>> minimal_hitting_sets(const std::set<std::set<T>>& edges) {
  const auto minimized = minimize_edges(edges);
  std::vector<std::set<T>> ordered(minimized.begin(), minimized.end());
  // Small edges first keeps the branching factor low near the root.
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return detail::HittingSetSearch<T>(std::move(ordered)).run();
}

}  // namespace repairkit
