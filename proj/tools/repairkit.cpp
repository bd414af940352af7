// repairkit command-line front end.
//
// Every subcommand prints a report: the command echo, a digest of the input
// file, the results, and the elapsed time on the last line. Only the timing
// line varies between runs over the same input.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repairkit.hpp"

namespace {

using namespace repairkit;
using json = nlohmann::ordered_json;

struct Report {
  std::vector<std::string> lines;
  json results = json::object();
  bool ok = true;  // false only when `check` finds a disagreement
};

struct Context {
  std::string command;
  std::string path;
  std::string text;
  asp::SolveOptions solve;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string table_row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string out = " ";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out += " " + (i + 1 == cells.size() ? cells[i] : pad(cells[i], widths[i]));
  }
  return out;
}

json tid_array(const TidSet& tids) {
  json out = json::array();
  for (const auto& t : tids) out.push_back(t.label);
  return out;
}

json answer_array(const AnswerSet& answers) {
  json out = json::array();
  for (const auto& row : answers) {
    json r = json::array();
    for (const auto& v : row) r.push_back(v.is_null() ? json(nullptr) : json(v.symbol()));
    out.push_back(r);
  }
  return out;
}

std::string answers_text(const AnswerSet& answers, bool boolean) {
  if (boolean) return answers.empty() ? "false" : "true";
  std::string out = "{";
  bool first = true;
  for (const auto& row : answers) {
    out += (first ? "" : ", ") + (row.size() == 1 ? row.front().to_string() : to_string(row));
    first = false;
  }
  return out + "}";
}

std::string changes_text(const std::set<CellChange>& changes) {
  std::string out = "{";
  bool first = true;
  for (const auto& c : changes) {
    out += (first ? "" : ", ") + to_string(c);
    first = false;
  }
  return out + "}";
}

json changes_json(const std::set<CellChange>& changes) {
  json out = json::array();
  for (const auto& c : changes) out.push_back({{"tid", c.tid.label}, {"attribute", c.attribute}});
  return out;
}

RepairClass parse_class(const std::string& s) { return s == "c" ? RepairClass::Cardinality : RepairClass::Subset; }

/// A named query from the spec file, or an inline body such as `S(x), R(x, y)`.
ConjunctiveQuery resolve_query(const ProblemSpec& spec, const std::string& text) {
  if (const auto* q = spec.find_query(text)) return *q;
  if (text.find('(') == std::string::npos) throw Error(ErrorKind::UnknownName, "no query named '" + text + "'");
  return parse_inline_query(text, spec.schema());
}

const ConjunctiveQuery& resolve_view(const ProblemSpec& spec, const std::string& name) {
  const auto* v = spec.find_view(name);
  if (!v) throw Error(ErrorKind::UnknownName, "no secret view named '" + name + "'");
  return *v;
}

const EntityRecord& resolve_entity(const ProblemSpec& spec, const std::string& id) {
  const auto* e = spec.classifier.find_entity(id);
  if (!e) throw Error(ErrorKind::UnknownName, "no entity named '" + id + "'");
  return *e;
}

std::vector<Repair> sorted_repairs(std::vector<Repair> reps) {
  std::sort(reps.begin(), reps.end(), [](const Repair& a, const Repair& b) {
    return std::pair(a.deleted.size(), a.deleted) < std::pair(b.deleted.size(), b.deleted);
  });
  return reps;
}

// ---------------------------------------------------------------------------
// Subcommands

Report run_repairs(const Context& ctx, const std::string& cls) {
  const auto spec = parse_spec(ctx.text);
  const auto reps = sorted_repairs(repairs(spec.instance, spec.constraints, parse_class(cls)));
  Report r;
  r.lines.push_back(cls + "-repairs: " + std::to_string(reps.size()));
  json list = json::array();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    TidSet kept;
    for (const auto& t : reps[i].instance.tuples()) kept.insert(t.tid);
    r.lines.push_back("  D" + std::to_string(i + 1) + "  deleted " + to_string(reps[i].deleted) + "  kept " +
                      to_string(kept));
    list.push_back({{"deleted", tid_array(reps[i].deleted)}, {"kept", tid_array(kept)}});
  }
  r.results = {{"class", cls}, {"repairs", list}};
  return r;
}

Report run_cqa(const Context& ctx, const std::string& query_text, const std::string& cls) {
  const auto spec = parse_spec(ctx.text);
  const auto q = resolve_query(spec, query_text);
  const auto answers = consistent_answers(q, spec.instance, spec.constraints, parse_class(cls));
  Report r;
  r.lines.push_back("consistent answers of " + q.name + " under " + cls + "-repairs: " +
                    answers_text(answers, q.is_boolean()));
  r.results = {{"query", q.name}, {"class", cls}, {"boolean", q.is_boolean()}};
  if (q.is_boolean()) r.results["holds"] = !answers.empty();
  r.results["answers"] = answer_array(answers);
  return r;
}

Report run_causes(const Context& ctx, const std::string& query_text, const std::string& via) {
  const auto spec = parse_spec(ctx.text);
  const auto q = resolve_query(spec, query_text);
  auto causes = via == "repairs" ? causes_via_repairs(spec.instance, q) : actual_causes(spec.instance, q);
  std::sort(causes.begin(), causes.end(), [](const CauseReport& a, const CauseReport& b) {
    return std::pair(b.responsibility, a.tid) < std::pair(a.responsibility, b.tid);
  });
  Report r;
  r.lines.push_back("causes of " + q.name + ": " + std::to_string(causes.size()));
  const std::vector<std::size_t> widths{6, 15, 5, 20};
  r.lines.push_back(table_row({"tid", "kind", "rho", "contingency", "minimum sets"}, widths));
  json list = json::array();
  for (const auto& c : causes) {
    r.lines.push_back(table_row({c.tid.label, to_string(c.kind), c.responsibility.to_string(),
                                 to_string(c.min_contingency), std::to_string(c.min_contingency_count)},
                                widths));
    list.push_back({{"tid", c.tid.label},
                    {"kind", to_string(c.kind)},
                    {"responsibility", c.responsibility.to_string()},
                    {"contingency", tid_array(c.min_contingency)},
                    {"minimum_contingency_sets", c.min_contingency_count}});
  }
  r.results = {{"query", q.name}, {"via", via}, {"causes", list}};
  return r;
}

Report run_secrecy(const Context& ctx, const std::string& view_name, const std::optional<std::string>& query_text) {
  const auto spec = parse_spec(ctx.text);
  const auto& view = resolve_view(spec, view_name);
  auto secrets = secrecy_instances(spec.instance, view);
  std::sort(secrets.begin(), secrets.end(),
            [](const SecrecyInstance& a, const SecrecyInstance& b) { return a.changes < b.changes; });
  Report r;
  r.lines.push_back("secrecy instances for " + view.name + ": " + std::to_string(secrets.size()));
  json list = json::array();
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    r.lines.push_back("  #" + std::to_string(i + 1) + "  null " + changes_text(secrets[i].changes));
    list.push_back({{"changes", changes_json(secrets[i].changes)}});
  }
  r.results = {{"view", view.name}, {"instances", list}};
  if (query_text) {
    const auto q = resolve_query(spec, *query_text);
    const auto answers = secret_answers(q, spec.instance, view);
    r.lines.push_back("secret answers of " + q.name + ": " + answers_text(answers, q.is_boolean()));
    r.results["query"] = q.name;
    r.results["answers"] = answer_array(answers);
  }
  return r;
}

Report run_explain(const Context& ctx, const std::string& entity_id, const std::optional<std::string>& command) {
  const auto spec = parse_spec(ctx.text);
  const auto& record = resolve_entity(spec, entity_id);
  const auto& features = spec.classifier.features;
  std::unique_ptr<Classifier> classifier;
  if (command) {
    classifier = std::make_unique<ProcessClassifier>(*command);
  } else {
    if (spec.classifier.table.empty()) {
      throw Error(ErrorKind::ProtocolError, "the spec file has no classifier table; pass --classifier-cmd");
    }
    classifier = std::make_unique<TableClassifier>(spec.classifier);
  }
  const Entity entity{record.id, record.values};
  auto ivs = counterfactuals(entity, *classifier, features);
  std::sort(ivs.begin(), ivs.end(), [](const Intervention& a, const Intervention& b) {
    return std::pair(a.size(), a.assignments) < std::pair(b.size(), b.assignments);
  });
  Report r;
  r.lines.push_back("minimal counterfactual interventions for " + record.id + ": " + std::to_string(ivs.size()));
  json iv_list = json::array();
  for (const auto& iv : ivs) {
    r.lines.push_back("  " + to_string(iv, features));
    json a = json::object();
    for (const auto& [i, v] : iv.assignments) a[features[i].name] = v;
    iv_list.push_back(a);
  }
  // Scores are derived from the interventions already found.
  std::size_t width = 7;
  for (const auto& f : features) width = std::max(width, f.name.size());
  r.lines.push_back(table_row({"feature", "rho", "witness"}, {width, 5}));
  json scores = json::array();
  for (std::size_t f = 0; f < features.size(); ++f) {
    const Intervention* best = nullptr;
    for (const auto& iv : ivs) {
      if (iv.assignments.count(f) && (!best || iv.size() < best->size())) best = &iv;
    }
    const Rational rho = best ? Rational::responsibility(best->size() - 1) : Rational(0);
    r.lines.push_back(table_row({features[f].name, rho.to_string(), best ? to_string(*best, features) : "-"},
                                {width, 5}));
    scores.push_back({{"feature", features[f].name}, {"responsibility", rho.to_string()}});
  }
  r.results = {{"entity", record.id}, {"interventions", iv_list}, {"responsibility", scores}};
  return r;
}

asp::AnnotatedProgram build_program(const ProblemSpec& spec, const std::string& kind, bool weak,
                                    const std::optional<std::string>& view, const std::optional<std::string>& entity,
                                    const std::optional<std::string>& query) {
  if (kind == "repair") return asp::emit_repair_program(spec.instance, spec.constraints, weak);
  if (kind == "cause") {
    if (!query) throw UsageError("--kind cause needs --query");
    return asp::emit_cause_program(spec.instance, resolve_query(spec, *query));
  }
  if (kind == "secrecy") {
    if (!view) throw UsageError("--kind secrecy needs --view");
    return asp::emit_secrecy_program(spec.instance, resolve_view(spec, *view));
  }
  if (!entity) throw UsageError("--kind counterfactual needs --entity");
  return asp::emit_counterfactual_program(spec.classifier, resolve_entity(spec, *entity));
}

json model_json(const asp::Model& m) {
  json out = json::array();
  for (const auto& a : m) out.push_back(a.to_string());
  return out;
}

std::string model_text(const asp::Model& m) {
  std::string out;
  for (const auto& a : m) out += (out.empty() ? "" : " ") + a.to_string();
  return out;
}

Report run_solve(const Context& ctx, bool optimize) {
  const auto program = asp::parse_asp(ctx.text);
  const auto gp = asp::ground(program, ctx.solve.atom_budget);
  const auto models = optimize ? asp::optimal_models(gp, ctx.solve) : asp::stable_models(gp, ctx.solve);
  Report r;
  r.lines.push_back("ground: " + std::to_string(gp.atoms.size()) + " atoms, " + std::to_string(gp.rules.size()) +
                    " rules, " + std::to_string(gp.weak.size()) + " weak constraints");
  r.lines.push_back((optimize ? "optimal models: " : "stable models: ") + std::to_string(models.size()));
  json list = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    r.lines.push_back("Answer " + std::to_string(i + 1) + ": " + model_text(models[i]));
    json entry = {{"atoms", model_json(models[i])}};
    if (!gp.weak.empty()) {
      const auto cost = asp::to_string(asp::cost(gp, models[i]));
      r.lines.push_back("Cost: " + cost);
      entry["cost"] = cost;
    }
    list.push_back(entry);
  }
  r.results = {{"optimize", optimize}, {"models", list}};
  return r;
}

Report run_check(const Context& ctx) {
  const auto spec = parse_spec(ctx.text);
  const auto& schema = spec.schema();
  Report r;
  json checks = json::array();
  auto record = [&](const std::string& name, bool agree, const std::string& detail) {
    r.ok = r.ok && agree;
    r.lines.push_back(std::string(agree ? "agree    " : "DISAGREE ") + name + "  " + detail);
    checks.push_back({{"check", name}, {"agree", agree}, {"detail", detail}});
  };
  auto deletions = [&](const std::vector<asp::Model>& models) {
    std::set<TidSet> out;
    for (const auto& m : models) out.insert(asp::deleted_tids(m, schema));
    return out;
  };
  auto repair_sets = [](const std::vector<Repair>& reps) {
    std::set<TidSet> out;
    for (const auto& rep : reps) out.insert(rep.deleted);
    return out;
  };

  const auto gp = asp::ground(asp::emit_repair_program(spec.instance, spec.constraints, true), ctx.solve.atom_budget);
  const auto stable = asp::stable_models(gp, ctx.solve);
  const auto s = repair_sets(s_repairs(spec.instance, spec.constraints));
  record("s-repairs", stable.size() == s.size() && deletions(stable) == s,
         std::to_string(stable.size()) + " stable models, " + std::to_string(s.size()) + " s-repairs");
  const auto optimal = asp::optimal_models(gp, ctx.solve);
  const auto c = repair_sets(c_repairs(spec.instance, spec.constraints));
  record("c-repairs", optimal.size() == c.size() && deletions(optimal) == c,
         std::to_string(optimal.size()) + " optimal models, " + std::to_string(c.size()) + " c-repairs");

  for (const auto& q : spec.queries) {
    if (!evaluate(q, spec.instance).holds()) {
      r.lines.push_back("skip     causes of " + q.name + "  query is false");
      continue;
    }
    const auto direct = actual_causes(spec.instance, q);
    const auto via = causes_via_repairs(spec.instance, q);
    TidSet native;
    for (const auto& cr : direct) native.insert(cr.tid);
    TidSet from_asp;
    for (const auto& m : asp::stable_models(asp::emit_cause_program(spec.instance, q), ctx.solve)) {
      const auto ct = asp::cause_tids(m);
      from_asp.insert(ct.begin(), ct.end());
    }
    auto by_tid = [](std::vector<CauseReport> v) {
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.tid < b.tid; });
      return v;
    };
    record("causes of " + q.name, by_tid(direct) == by_tid(via) && native == from_asp,
           std::to_string(direct.size()) + " causes, program yields " + to_string(from_asp));
  }

  for (const auto& v : spec.views) {
    std::set<std::set<CellChange>> native;
    for (const auto& si : secrecy_instances(spec.instance, v)) native.insert(si.changes);
    std::set<std::set<CellChange>> from_asp;
    for (const auto& m : asp::stable_models(asp::emit_secrecy_program(spec.instance, v), ctx.solve)) {
      from_asp.insert(asp::nulled_cells(m, spec.instance));
    }
    record("secrecy of " + v.name, native == from_asp,
           std::to_string(native.size()) + " instances, " + std::to_string(from_asp.size()) + " stable models");
  }
  r.results = {{"agree", r.ok}, {"checks", checks}};
  return r;
}

std::size_t budget_from_env() {
  const char* raw = std::getenv("REPAIRKIT_ATOM_BUDGET");
  if (!raw || !*raw) return asp::SolveOptions{}.atom_budget;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || v == 0) throw UsageError("REPAIRKIT_ATOM_BUDGET must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repairs, consistent answers, causes, secrecy views and counterfactual explanations over "
               "relational spec files"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "repairkit 0.1.0");
  bool as_json = false;
  app.add_flag("--json", as_json, "print the report as JSON");

  std::string input;
  std::string cls = "s";
  std::string query;
  std::string via = "gamma";
  std::string view;
  std::optional<std::string> opt_query;
  std::optional<std::string> opt_view;
  std::optional<std::string> opt_entity;
  std::optional<std::string> classifier_cmd;
  std::string kind;
  std::string out_file;
  bool weak = false;
  bool optimize = false;
  std::size_t max_universe = asp::SolveOptions{}.max_universe;

  auto spec_arg = [&](CLI::App* sub) {
    sub->add_option("spec", input, "spec file")->required()->check(CLI::ExistingFile);
  };
  auto class_opt = [&](CLI::App* sub) {
    sub->add_option("--class", cls, "repair class")->check(CLI::IsMember({"s", "c"}))->capture_default_str();
  };

  auto* repairs_cmd = app.add_subcommand("repairs", "list the repairs of the instance");
  class_opt(repairs_cmd);
  spec_arg(repairs_cmd);

  auto* cqa_cmd = app.add_subcommand("cqa", "consistent answers of a query");
  cqa_cmd->add_option("--query", query, "query name or inline body such as 'S(x)'")->required();
  class_opt(cqa_cmd);
  spec_arg(cqa_cmd);

  auto* causes_cmd = app.add_subcommand("causes", "actual causes and responsibilities for a query");
  causes_cmd->add_option("--query", query, "query name or inline body")->required();
  causes_cmd->add_option("--via", via, "contingency search or repair-based computation")
      ->check(CLI::IsMember({"gamma", "repairs"}))
      ->capture_default_str();
  spec_arg(causes_cmd);

  auto* secrecy_cmd = app.add_subcommand("secrecy", "secrecy instances for a secret view");
  secrecy_cmd->add_option("--view", view, "secret view name")->required();
  secrecy_cmd->add_option("--query", opt_query, "also report the secret answers of this query");
  spec_arg(secrecy_cmd);

  auto* explain_cmd = app.add_subcommand("explain", "counterfactual interventions and feature responsibility");
  explain_cmd->add_option("--entity", opt_entity, "entity id")->required();
  explain_cmd->add_option("--classifier-cmd", classifier_cmd, "external classifier command");
  spec_arg(explain_cmd);

  auto* emit_cmd = app.add_subcommand("emit-asp", "write an ASP-Core-2 program for the spec file");
  emit_cmd->add_option("--kind", kind, "program kind")
      ->required()
      ->check(CLI::IsMember({"repair", "cause", "secrecy", "counterfactual"}));
  emit_cmd->add_flag("--weak", weak, "add weak constraints selecting cardinality repairs");
  emit_cmd->add_option("--view", opt_view, "secret view (secrecy)");
  emit_cmd->add_option("--entity", opt_entity, "entity id (counterfactual)");
  emit_cmd->add_option("--query", opt_query, "Boolean query (cause)");
  emit_cmd->add_option("-o,--output", out_file, "write the program here instead of stdout");
  spec_arg(emit_cmd);

  auto* solve_cmd = app.add_subcommand("solve-asp", "stable or optimal models of a ground-able program");
  solve_cmd->add_option("program", input, ".lp file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_flag("--optimize", optimize, "keep only models of minimum weak-constraint cost");
  solve_cmd->add_option("--max-universe", max_universe, "largest number of guessed atoms")->capture_default_str();

  auto* check_cmd = app.add_subcommand("check", "compare native engines with the emitted programs");
  check_cmd->add_option("--max-universe", max_universe, "largest number of guessed atoms")->capture_default_str();
  spec_arg(check_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Context ctx;
  for (int i = 0; i < argc; ++i) ctx.command += (i ? " " : "") + std::string(i ? argv[i] : "repairkit");
  ctx.path = input;
  const bool raw_program = emit_cmd->parsed() && out_file.empty() && !as_json;

  const auto start = std::chrono::steady_clock::now();
  Report report;
  try {
    ctx.solve.atom_budget = budget_from_env();
    ctx.solve.max_universe = max_universe;
    ctx.text = read_input(input);
    if (repairs_cmd->parsed()) {
      report = run_repairs(ctx, cls);
    } else if (cqa_cmd->parsed()) {
      report = run_cqa(ctx, query, cls);
    } else if (causes_cmd->parsed()) {
      report = run_causes(ctx, query, via);
    } else if (secrecy_cmd->parsed()) {
      report = run_secrecy(ctx, view, opt_query);
    } else if (explain_cmd->parsed()) {
      report = run_explain(ctx, *opt_entity, classifier_cmd);
    } else if (emit_cmd->parsed()) {
      const auto program = build_program(parse_spec(ctx.text), kind, weak, opt_view, opt_entity, opt_query);
      const auto text = asp::render_asp(program);
      if (raw_program) {
        std::cout << text;
        return 0;
      }
      if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        if (!(out << text)) throw Error(ErrorKind::IoError, "cannot write " + out_file);
        report.lines.push_back("wrote " + out_file + " (" + std::to_string(program.facts.size()) + " facts, " +
                               std::to_string(program.rules.size()) + " rules, " +
                               std::to_string(program.weak_constraints.size()) + " weak constraints)");
        report.results = {{"kind", kind}, {"output", out_file}, {"digest", fnv1a64(text)}};
      } else {
        report.results = {{"kind", kind}, {"program", text}};
      }
    } else if (solve_cmd->parsed()) {
      report = run_solve(ctx, optimize);
    } else {
      report = run_check(ctx);
    }
  } catch (const UsageError& e) {
    std::cerr << "repairkit: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "repairkit: " << input << (e.where().line > 0 ? ":" : ": ") << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "repairkit: " << input << ": " << e.what() << "\n";
    return 1;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const std::string digest = "fnv1a64:" + fnv1a64(ctx.text);
  if (as_json) {
    json out = {{"command", ctx.command},
                {"input", {{"path", ctx.path}, {"digest", digest}}},
                {"results", report.results},
                {"time_ms", ms}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "command: " << ctx.command << "\n";
    std::cout << "input:   " << ctx.path << " " << digest << "\n";
    for (const auto& line : report.lines) std::cout << line << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "time: %.3f ms", ms);
    std::cout << buf << "\n";
  }
  if (!report.ok) {
    std::cerr << "repairkit: check found disagreements\n";
    return 1;
  }
  return 0;
}
