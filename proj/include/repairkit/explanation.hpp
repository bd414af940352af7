#pragma once

// Counterfactual explanations for finite-domain classifiers: minimal
// feature-value interventions that switch label 1 to 0, and per-feature
// responsibility scores derived from them.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <csignal>
#include <cstddef>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "repairkit/causality.hpp"
#include "repairkit/error.hpp"
#include "repairkit/rational.hpp"
#include "repairkit/spec.hpp"

namespace repairkit {

/// Lifecycle marks of an entity record: original, in transition, just
/// intervened, and stopped with label 0.
enum class Annotation { Original, Transition, Intervened, Stop };

inline const char* to_string(Annotation a) {
  switch (a) {
    case Annotation::Original: return "o";
    case Annotation::Transition: return "star";
    case Annotation::Intervened: return "do";
    case Annotation::Stop: return "s";
  }
  return "?";
}

using FeatureVector = std::vector<std::string>;

struct Entity {
  std::string id;
  FeatureVector values;
  Annotation annotation = Annotation::Original;
};

struct TraceStep {
  Annotation annotation;
  FeatureVector values;
};

struct Intervention {
  /// feature index -> new value, ordered by feature index
  std::map<std::size_t, std::string> assignments;
  /// o, star, then do/star per change, ending in s
  std::vector<TraceStep> trace;

  std::size_t size() const { return assignments.size(); }

  bool operator==(const Intervention& o) const { return assignments == o.assignments; }
};

struct FeatureScore {
  std::string feature;
  Rational responsibility;
  std::optional<Intervention> witness;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int classify(const FeatureVector& values) = 0;
};

/// Decision-table lookup. Errors: OutOfDomain.
inline int classify(const ClassifierSpec& spec, const FeatureVector& values) {
  auto it = spec.table.find(values);
  if (it == spec.table.end()) {
    throw Error(ErrorKind::OutOfDomain, "feature vector lies outside the classifier table");
  }
  return it->second;
}

class TableClassifier final : public Classifier {
 public:
  explicit TableClassifier(const ClassifierSpec& spec) : spec_(spec) {}
  int classify(const FeatureVector& values) override { return repairkit::classify(spec_, values); }

 private:
  const ClassifierSpec& spec_;
};

/// Classifier running as a child process and speaking a line protocol on its
/// stdin/stdout: `CLASSIFY v1,v2,...,vn` answered by `LABEL 0` or `LABEL 1`.
/// Requests are serialized; one request is in flight at a time.
class ProcessClassifier final : public Classifier {
 public:
  explicit ProcessClassifier(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw Error(ErrorKind::IoError, "cannot create pipes for classifier");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorKind::IoError, "cannot fork classifier process");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    to_ = ::fdopen(to_child[1], "w");
    from_ = ::fdopen(from_child[0], "r");
    if (to_ == nullptr || from_ == nullptr) throw Error(ErrorKind::IoError, "cannot open classifier pipes");
  }

  ProcessClassifier(const ProcessClassifier&) = delete;
  ProcessClassifier& operator=(const ProcessClassifier&) = delete;

  ~ProcessClassifier() override {
    if (to_) std::fclose(to_);
    if (from_) std::fclose(from_);
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  int classify(const FeatureVector& values) override {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string request = "CLASSIFY ";
    for (std::size_t i = 0; i < values.size(); ++i) request += (i ? "," : "") + values[i];
    request += "\n";
    // SIGPIPE would kill us if the child has already exited.
    auto old = std::signal(SIGPIPE, SIG_IGN);
    const bool sent = std::fputs(request.c_str(), to_) >= 0 && std::fflush(to_) == 0;
    std::signal(SIGPIPE, old);
    if (!sent) throw Error(ErrorKind::ProtocolError, "classifier process is not accepting requests");

    std::string reply;
    int c;
    while ((c = std::fgetc(from_)) != EOF && c != '\n') reply += static_cast<char>(c);
    if (c == EOF && reply.empty()) throw Error(ErrorKind::ProtocolError, "classifier closed its output");
    if (!reply.empty() && reply.back() == '\r') reply.pop_back();
    if (reply == "LABEL 0") return 0;
    if (reply == "LABEL 1") return 1;
    throw Error(ErrorKind::ProtocolError, "unexpected classifier reply '" + reply + "'");
  }

 private:
  pid_t pid_ = -1;
  std::FILE* to_ = nullptr;
  std::FILE* from_ = nullptr;
  std::mutex mutex_;
};

namespace detail {

class MemoClassifier {
 public:
  explicit MemoClassifier(Classifier& inner) : inner_(inner) {}
  int operator()(const FeatureVector& v) {
    auto it = cache_.find(v);
    if (it != cache_.end()) return it->second;
    const int label = inner_.classify(v);
    cache_.emplace(v, label);
    return label;
  }

 private:
  Classifier& inner_;
  std::map<FeatureVector, int> cache_;
};

inline void check_entity(const Entity& entity, std::span<const Feature> features) {
  if (entity.values.size() != features.size()) {
    throw Error(ErrorKind::OutOfDomain, "entity '" + entity.id + "' has " + std::to_string(entity.values.size()) +
                                            " values for " + std::to_string(features.size()) + " features");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& d = features[i].domain;
    if (std::find(d.begin(), d.end(), entity.values[i]) == d.end()) {
      throw Error(ErrorKind::OutOfDomain,
                  "value '" + entity.values[i] + "' of entity '" + entity.id + "' is outside the domain of '" +
                      features[i].name + "'");
    }
  }
}

inline FeatureVector apply(const FeatureVector& base, const std::map<std::size_t, std::string>& assignments) {
  FeatureVector out = base;
  for (const auto& [i, v] : assignments) out[i] = v;
  return out;
}

inline bool contains_assignment(const std::map<std::size_t, std::string>& big,
                                const std::map<std::size_t, std::string>& small) {
  for (const auto& [i, v] : small) {
    auto it = big.find(i);
    if (it == big.end() || it->second != v) return false;
  }
  return true;
}

inline std::vector<TraceStep> lifecycle(const FeatureVector& original,
                                        const std::map<std::size_t, std::string>& assignments) {
  std::vector<TraceStep> trace{{Annotation::Original, original}, {Annotation::Transition, original}};
  FeatureVector cur = original;
  std::size_t done = 0;
  for (const auto& [i, v] : assignments) {
    cur[i] = v;
    trace.push_back({Annotation::Intervened, cur});
    if (++done < assignments.size()) trace.push_back({Annotation::Transition, cur});
  }
  trace.push_back({Annotation::Stop, cur});
  return trace;
}

}  // namespace detail

/// All minimal label-switching interventions on `entity`.
///
/// Iterative deepening over the number of changed features: at depth k
/// every k-subset of features and every combination of new values is
/// tried, and a label-0 assignment is kept when no smaller one found so far
/// is contained in it. Errors: AlreadyNegative, NoCounterfactual,
/// OutOfDomain.
inline std::vector<Intervention> counterfactuals(const Entity& entity, Classifier& classifier,
                                                 std::span<const Feature> features) {
  detail::check_entity(entity, features);
  detail::MemoClassifier label(classifier);
  if (label(entity.values) == 0) {
    throw Error(ErrorKind::AlreadyNegative, "entity '" + entity.id + "' already has label 0");
  }

  std::vector<Intervention> found;
  const std::size_t n = features.size();
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t before = found.size();
    for_each_combination(n, k, [&](const std::vector<std::size_t>& chosen) {
      // Alternatives per chosen feature: every domain value but the original.
      std::vector<std::vector<std::string>> alternatives;
      for (auto f : chosen) {
        std::vector<std::string> alt;
        for (const auto& v : features[f].domain) {
          if (v != entity.values[f]) alt.push_back(v);
        }
        if (alt.empty()) return true;
        alternatives.push_back(std::move(alt));
      }
      std::vector<std::size_t> pick(k, 0);
      while (true) {
        std::map<std::size_t, std::string> assignment;
        for (std::size_t j = 0; j < k; ++j) assignment[chosen[j]] = alternatives[j][pick[j]];
        bool dominated = false;
        for (std::size_t s = 0; s < before; ++s) {
          if (detail::contains_assignment(assignment, found[s].assignments)) {
            dominated = true;
            break;
          }
        }
        if (!dominated && label(detail::apply(entity.values, assignment)) == 0) {
          found.push_back(Intervention{assignment, detail::lifecycle(entity.values, assignment)});
        }
        std::size_t j = k;
        while (j > 0) {
          --j;
          if (++pick[j] < alternatives[j].size()) break;
          pick[j] = 0;
          if (j == 0) return true;
        }
      }
    });
  }
  if (found.empty()) {
    throw Error(ErrorKind::NoCounterfactual, "no intervention switches the label of entity '" + entity.id + "'");
  }
  return found;
}

/// Responsibility of each feature: 1/|I| for the smallest intervention I
/// that changes it, or 0 when no intervention does.
inline std::vector<FeatureScore> x_responsibility(const Entity& entity, Classifier& classifier,
                                                  std::span<const Feature> features) {
  const auto interventions = counterfactuals(entity, classifier, features);
  std::vector<FeatureScore> out;
  for (std::size_t f = 0; f < features.size(); ++f) {
    FeatureScore score{features[f].name, Rational(0), std::nullopt};
    for (const auto& iv : interventions) {
      if (!iv.assignments.count(f)) continue;
      if (!score.witness || iv.size() < score.witness->size()) score.witness = iv;
    }
    if (score.witness) score.responsibility = Rational::responsibility(score.witness->size() - 1);
    out.push_back(std::move(score));
  }
  return out;
}

inline std::string to_string(const Intervention& iv, std::span<const Feature> features) {
  std::string out = "{";
  bool first = true;
  for (const auto& [i, v] : iv.assignments) {
    if (!first) out += ", ";
    out += features[i].name + " -> " + v;
    first = false;
  }
  return out + "}";
}

}  // namespace repairkit
