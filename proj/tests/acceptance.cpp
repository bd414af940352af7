// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Expected values are written out literally or computed by
// the brute-force references in support.hpp, never by the engines under test.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include <json.hpp>

#include "process.hpp"
#include "support.hpp"

namespace {

using namespace repairkit;
using rk_test::tids;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("[%s] %d. %s (%.3f s, limit %g s)%s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(), secs, limit_s,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  if (!in_time) std::printf("       time limit exceeded\n");
  std::fflush(stdout);
}

std::string show(const std::set<TidSet>& sets) {
  std::string out = "{";
  for (const auto& s : sets) out += (out.size() > 1 ? ", " : "") + to_string(s);
  return out + "}";
}

std::string show(const std::set<std::set<CellChange>>& sets) {
  std::string out = "{";
  for (const auto& s : sets) {
    std::string inner = "{";
    for (const auto& c : s) inner += (inner.size() > 1 ? ", " : "") + to_string(c);
    out += (out.size() > 1 ? ", " : "") + inner + "}";
  }
  return out + "}";
}

#ifdef REPAIRKIT_CLI
nlohmann::json cli_json(const std::string& args) {
  const auto r = rk_test::run(std::string(REPAIRKIT_CLI) + " --json " + args + " 2>&1");
  if (r.status != 0) throw std::runtime_error("repairkit exited with " + std::to_string(r.status) + ": " + r.out);
  return nlohmann::json::parse(r.out);
}
#endif

/// Deleted sets reported by `repairs`, through the binary when it was built.
std::set<TidSet> repairs_via_front_end(const std::string& cls) {
  std::set<TidSet> out;
#ifdef REPAIRKIT_CLI
  const auto report = cli_json("repairs --class " + cls + " " + rk_test::sample_path("example1.spec"));
  for (const auto& rep : report["results"]["repairs"]) {
    TidSet d;
    for (const auto& t : rep["deleted"]) d.insert(Tid{t.get<std::string>()});
    out.insert(d);
  }
#else
  const auto spec = rk_test::load_sample("example1.spec");
  out = rk_test::deleted_sets(
      repairs(spec.instance, spec.constraints, cls == "s" ? RepairClass::Subset : RepairClass::Cardinality));
#endif
  return out;
}

std::set<std::vector<std::string>> cqa_via_front_end(const std::string& query, const std::string& cls) {
  std::set<std::vector<std::string>> out;
#ifdef REPAIRKIT_CLI
  const auto report = cli_json("cqa --query '" + query + "' --class " + cls + " " + rk_test::sample_path("example1.spec"));
  out = report["results"]["answers"].get<std::set<std::vector<std::string>>>();
#else
  const auto spec = rk_test::load_sample("example1.spec");
  const auto q = parse_inline_query(query, spec.schema());
  for (const auto& row :
       consistent_answers(q, spec.instance, spec.constraints, cls == "s" ? RepairClass::Subset : RepairClass::Cardinality)) {
    std::vector<std::string> r;
    for (const auto& v : row) r.push_back(v.symbol());
    out.insert(r);
  }
#endif
  return out;
}

std::map<Tid, Rational> rho_map(const std::vector<CauseReport>& causes) {
  std::map<Tid, Rational> out;
  for (const auto& c : causes) out.emplace(c.tid, c.responsibility);
  return out;
}

std::map<Tid, Rational> rho_map(const std::map<Tid, rk_test::RefCause>& causes) {
  std::map<Tid, Rational> out;
  for (const auto& [t, c] : causes) out.emplace(t, Rational::responsibility(c.gamma_size));
  return out;
}

std::string show(const std::map<Tid, Rational>& m) {
  std::string out;
  for (const auto& [t, r] : m) out += (out.empty() ? "" : " ") + t.label + "=" + r.to_string();
  return out;
}

constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kCases = 250;

}  // namespace

int main() {
  const auto example1 = rk_test::load_sample("example1.spec");
  const auto example2 = rk_test::load_sample("example2.spec");

  criterion(1, "S-repairs of example1.spec", 1.0, [&] {
    const std::set<TidSet> expected{tids({"i6"}), tids({"i1", "i3"}), tids({"i3", "i4"})};
    const auto got = repairs_via_front_end("s");
    const bool oracle_ok = rk_test::ref_s_repairs(example1.instance, example1.constraints) == expected;
    return Outcome{got == expected && oracle_ok, show(got)};
  });

  criterion(2, "C-repairs of example1.spec, confirmed by weak-constraint optimization", 1.0, [&] {
    const std::set<TidSet> expected{tids({"i6"})};
    const auto got = repairs_via_front_end("c");
    const auto optimal = rk_test::model_deletions(
        asp::optimal_models(asp::emit_repair_program(example1.instance, example1.constraints, true)),
        example1.schema());
    return Outcome{got == expected && optimal == expected, "repairs " + show(got) + ", optimal models " + show(optimal)};
  });

  criterion(3, "Repair program of example1.spec has 3 stable models, one keeping all tuples but i6", 5.0, [&] {
    const auto models = asp::stable_models(asp::emit_repair_program(example1.instance, example1.constraints, false));
    const std::set<asp::GroundAtom> keep_all_but_i6{{"rP", {"i1", "a4", "a3", "s"}}, {"rP", {"i2", "a2", "a1", "s"}},
                                       {"rP", {"i3", "a3", "a3", "s"}}, {"sP", {"i4", "a4", "s"}},
                                       {"sP", {"i5", "a2", "s"}}};
    bool found = false;
    for (const auto& m : models) {
      std::set<asp::GroundAtom> s_atoms;
      for (const auto& a : m) {
        if ((a.predicate == "rP" || a.predicate == "sP") && a.args.back() == "s") s_atoms.insert(a);
      }
      found = found || s_atoms == keep_all_but_i6;
    }
    return Outcome{models.size() == 3 && found, std::to_string(models.size()) + " models, all-but-i6 model " + (found ? "found" : "missing")};
  });

  criterion(4, "Causes of the violation query with responsibilities", 1.0, [&] {
    const auto& q = *example1.find_query("qk");
    const std::map<Tid, Rational> expected{
        {Tid{"i1"}, Rational(1, 2)}, {Tid{"i3"}, Rational(1, 2)}, {Tid{"i4"}, Rational(1, 2)}, {Tid{"i6"}, Rational(1)}};
    const auto direct = rho_map(actual_causes(example1.instance, q));
    const auto via = rho_map(causes_via_repairs(example1.instance, q));
    const auto oracle = rho_map(rk_test::ref_causes(q, example1.instance));
    return Outcome{direct == expected && via == expected && oracle == expected, show(direct)};
  });

  criterion(5, "Secrecy instances of example2.spec are exactly {(i6, A)} and {(i1, B), (i3, B)}", 1.0, [&] {
    const auto& view = *example2.find_view("vk");
    const std::set<std::set<CellChange>> expected{{{Tid{"i6"}, "A"}}, {{Tid{"i1"}, "B"}, {Tid{"i3"}, "B"}}};
    std::set<std::set<CellChange>> got;
    bool hidden = true;
    for (const auto& s : secrecy_instances(example2.instance, view)) {
      got.insert(s.changes);
      hidden = hidden && evaluate(view, s.instance).tuples().empty();
    }
    return Outcome{got == expected && hidden,
                   std::to_string(got.size()) + " instances " + show(got) + (hidden ? ", view empty in all" : "")};
  });

  criterion(6, "Consistent answers of S(x) under S- and C-repairs", 1.0, [&] {
    using Rows = std::set<std::vector<std::string>>;
    const auto s = cqa_via_front_end("S(x)", "s");
    const auto c = cqa_via_front_end("S(x)", "c");
    // The brute-force reference must agree with the literal expectations.
    const auto q = parse_inline_query("S(x)", example1.schema());
    const auto ref_s = rk_test::ref_consistent_answers(q, example1.instance,
                                                       rk_test::ref_s_repairs(example1.instance, example1.constraints));
    const auto ref_c = rk_test::ref_consistent_answers(q, example1.instance,
                                                       rk_test::ref_c_repairs(example1.instance, example1.constraints));
    using Values = std::set<std::vector<Value>>;
    const auto a = [](const char* s) { return std::vector<Value>{Value::constant(s)}; };
    const bool oracle_ok = ref_s == Values{a("a2")} && ref_c == Values{a("a4"), a("a2")};
    return Outcome{s == Rows{{"a2"}} && c == (Rows{{"a4"}, {"a2"}}) && oracle_ok,
                   "s " + std::to_string(s.size()) + " answers, c " + std::to_string(c.size()) + " answers"};
  });

  const auto cases = rk_test::random_repair_cases(kSeed, kCases);

  criterion(7, "Stable and optimal models match S- and C-repairs on 250 random specs", 60.0, [&] {
    std::size_t bad = 0;
    for (const auto& c : cases) {
      const auto gp = asp::ground(asp::emit_repair_program(c.instance, c.dcs, true));
      const auto stable = asp::stable_models(gp);
      const auto ref_s = rk_test::ref_s_repairs(c.instance, c.dcs);
      const bool s_ok = stable.size() == ref_s.size() && rk_test::model_deletions(stable, c.instance.schema()) == ref_s &&
                        rk_test::deleted_sets(s_repairs(c.instance, c.dcs)) == ref_s;
      const auto ref_c = rk_test::ref_c_repairs(c.instance, c.dcs);
      const bool c_ok = rk_test::model_deletions(asp::optimal_models(gp), c.instance.schema()) == ref_c &&
                        rk_test::deleted_sets(c_repairs(c.instance, c.dcs)) == ref_c;
      if (!s_ok || !c_ok) ++bad;
    }
    return Outcome{bad == 0, std::to_string(bad) + " discrepancies"};
  });

  criterion(8, "Contingency search matches repair-based causes on the same specs", 60.0, [&] {
    std::size_t bad = 0;
    std::size_t queries = 0;
    for (const auto& c : cases) {
      for (const auto& dc : c.dcs) {
        const ConjunctiveQuery q{dc.name, {}, dc.body, false};
        if (!rk_test::ref_holds(q, c.instance)) continue;
        ++queries;
        const auto direct = actual_causes(c.instance, q);
        const auto via = causes_via_repairs(c.instance, q);
        const auto oracle = rk_test::ref_causes(q, c.instance);
        if (rho_map(direct) != rho_map(via) || rho_map(direct) != rho_map(oracle)) ++bad;
      }
    }
    return Outcome{bad == 0 && queries > 0,
                   std::to_string(queries) + " true queries, " + std::to_string(bad) + " discrepancies"};
  });

  criterion(9, "Feature responsibility on the disjunction and conjunction classifiers", 1.0, [] {
    std::string detail;
    bool ok = true;
    for (const auto& [name, expected] : std::vector<std::pair<std::string, std::vector<Rational>>>{
             {"disjunction.spec", {Rational(1, 2), Rational(1, 2)}}, {"conjunction.spec", {Rational(1), Rational(1)}}}) {
      const auto spec = rk_test::load_sample(name);
      const auto& e = *spec.classifier.find_entity("e1");
      TableClassifier clf(spec.classifier);
      std::vector<Rational> got;
      for (const auto& s : x_responsibility(Entity{e.id, e.values}, clf, spec.classifier.features)) {
        got.push_back(s.responsibility);
      }
      ok = ok && got == expected && rk_test::ref_feature_responsibility(spec.classifier, e.values) == expected;
      detail += (detail.empty() ? "" : ", ") + name.substr(0, name.find('.')) + " (";
      for (std::size_t i = 0; i < got.size(); ++i) detail += (i ? ", " : "") + got[i].to_string();
      detail += ")";
    }
    return Outcome{ok, detail};
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
