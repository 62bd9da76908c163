// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 ok, 1 failed property, 2 parse,
// type or usage error, 3 unsat, 4 solver failure or timeout, 5 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pia/denote.hpp"
#include "pia/error.hpp"
#include "pia/laws.hpp"
#include "pia/pipeline.hpp"

namespace {

using namespace pia;
using json = nlohmann::ordered_json;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse:
    case ErrorKind::type:
    case ErrorKind::mismatch: return 2;
    case ErrorKind::unsat: return 3;
    case ErrorKind::solver: return 4;
    case ErrorKind::io: return 5;
    case ErrorKind::internal: return 1;
  }
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Options {
  std::string semiring = "schedule";
  bool pipeline = false;
  std::string solver;
  std::string write_stage;
  std::uint64_t size_bound = 0;
  std::uint64_t order_retries = 0;
  bool sequential = false;
  bool json = false;
  std::string config;
  std::string file;
  std::string phase = "sizes";
  unsigned max_int = 2;
  std::uint64_t seed = 1;
};

SolveConfig solve_config(const Options& o) {
  SolveConfig c;
  if (!o.config.empty()) c = load_config(o.config, c);
  std::string lines;
  if (o.pipeline) lines += "pipeline = true\n";
  if (o.sequential) lines += "sequential = true\n";
  if (!o.write_stage.empty()) lines += "write_stage = " + o.write_stage + "\n";
  if (o.size_bound) lines += "size_bound_max = " + std::to_string(o.size_bound) + "\n";
  if (o.order_retries) lines += "order_retry_budget = " + std::to_string(o.order_retries) + "\n";
  if (!o.solver.empty()) lines += "solver = " + o.solver + "\n";
  try {
    return parse_config(lines, c);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, e.what());
  }
}

json stats_json(const InferStats& s) {
  return {{"schedule_vars", s.schedule_vars}, {"stage_vars", s.stage_vars},
          {"smt_variables", s.smt_variables}, {"smt_assertions", s.smt_assertions},
          {"size_bound", s.size_bound},       {"order_attempts", s.order_attempts},
          {"wall_ms", s.wall_ms}};
}

int run_infer(const Options& o) {
  InferResult r = infer_end_to_end(parse_document(read_file(o.file)), solve_config(o));
  const auto& v = r.verification;
  if (o.json) {
    json model = json::object();
    for (const auto& [id, s] : r.stages.model) model[r.system.vars[static_cast<std::size_t>(id)].name] = s.str();
    json out = {{"command", "infer"},
                {"status", "ok"},
                {"judgment", pretty(r.judgment)},
                {"type", r.judgment.type ? pretty(*r.judgment.type) : ""},
                {"model", model},
                {"verification",
                 {{"exact", v.exact},
                  {"within_tolerance", v.within_tolerance},
                  {"max_residual", v.max_residual},
                  {"residual_failures", v.failures.size()}}},
                {"check", {{"accepted", r.check.accepted}, {"reason", r.check.reason}}},
                {"stats", stats_json(r.stats)}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << pretty(r.judgment);
    const auto& s = r.stats;
    std::cout << "-- schedule vars " << s.schedule_vars << ", stage vars " << s.stage_vars << ", smt variables "
              << s.smt_variables << ", assertions " << s.smt_assertions << ", size bound " << s.size_bound
              << ", order attempts " << s.order_attempts << ", " << s.wall_ms << " ms\n";
    std::cout << "-- residual check: " << (v.exact ? "exact" : "failed") << ", checker: "
              << (r.check.accepted ? "accepted" : "rejected (" + r.check.reason + ")") << "\n";
  }
  return v.exact && r.check.accepted ? 0 : 2;
}

int run_constraints(const Options& o) {
  SolveConfig c = solve_config(o);
  ConstraintSystem sys = generate(parse_document(read_file(o.file)), c.gen_options());
  std::string text;
  if (o.semiring == "schedule") {
    text = sys.dump();
  } else if (o.semiring == "nat") {
    SmtScript s = emit_sizes(size_problem(sys, c), c.size_bound_max);
    for (const auto& a : s.assertions) text += a + "\n";
  } else {
    throw Error(ErrorKind::parse, "constraints are shown over schedules or their sizes (nat), not " + o.semiring);
  }
  if (o.json)
    std::cout << json{{"command", "constraints"}, {"status", "ok"}, {"semiring", o.semiring}, {"constraints", text}}.dump(2)
              << "\n";
  else
    std::cout << text;
  return 0;
}

int run_smt(const Options& o) {
  SolveConfig c = solve_config(o);
  ConstraintSystem sys = generate(parse_document(read_file(o.file)), c.gen_options());
  SmtScript script;
  if (o.phase == "sizes") {
    script = emit_sizes(size_problem(sys, c), c.size_bound_start);
  } else {
    SizePhase sizes = solve_sizes(sys, c);
    Lowering low(sys, sizes.sizes, c);
    script = emit_stages(low.problem(low.identity_guess()));
  }
  if (o.json)
    std::cout << json{{"command", "smt"},
                      {"status", "ok"},
                      {"phase", o.phase},
                      {"variables", script.variables()},
                      {"assertions", script.assertions.size()},
                      {"script", script.text()}}
                     .dump(2)
              << "\n";
  else
    std::cout << script.text();
  return 0;
}

int run_check(const Options& o) {
  CheckResult r = check_source(read_file(o.file));
  if (o.json) {
    json out = {{"command", "check"}, {"status", r.accepted ? "ok" : "rejected"}, {"accepted", r.accepted}};
    if (!r.accepted) {
      out["reason"] = r.reason;
      out["detail"] = r.detail;
    }
    std::cout << out.dump(2) << "\n";
  } else if (r.accepted) {
    std::cout << "accepted\n" << r.derivation->str();
  } else {
    std::cout << "rejected: " << r.reason << "\n" << r.detail << "\n";
  }
  return r.accepted ? 0 : 2;
}

int run_denote(const Options& o) {
  games::Strategy s = denote(parse_document(read_file(o.file)), o.max_int);
  if (o.json)
    std::cout << json{{"command", "denote"}, {"status", "ok"}, {"plays", s.plays.size()}, {"strategy", games::dump(s)}}.dump(2)
              << "\n";
  else
    std::cout << games::dump(s);
  return 0;
}

int run_laws(const Options& o, const CLI::App& laws) {
  SolveConfig c = solve_config(o);
  std::vector<SuiteResult> results;
  std::vector<Instance> instances = {Instance::nat, Instance::zoi, Instance::schedule};
  if (laws.get_parent()->count("--semiring"))
    instances = {o.semiring == "nat" ? Instance::nat : o.semiring == "zoi" ? Instance::zoi : Instance::schedule};
  for (Instance i : instances)
    for (auto& r : semiring_laws(i, o.seed)) results.push_back(std::move(r));
  for (auto& r : category_laws(o.seed)) results.push_back(std::move(r));
  results.push_back(action_functoriality(o.seed));
  try {
    results.push_back(oracle_agreement(o.seed, 20, c.solver));
  } catch (const Error& e) {
    results.push_back(SuiteResult{"oracle agreement", 0, 0, 0, std::string("skipped: ") + e.what()});
  }
  bool ok = true;
  json arr = json::array();
  for (const auto& r : results) {
    bool skipped = r.cases == 0;
    ok = ok && (skipped || r.ok());
    if (o.json) {
      arr.push_back({{"name", r.name}, {"cases", r.cases}, {"failures", r.failures}, {"seconds", r.seconds}, {"note", r.note}});
    } else {
      std::cout << (skipped ? "SKIP " : r.ok() ? "ok   " : "FAIL ") << r.name << ": " << r.cases - r.failures << "/"
                << r.cases;
      if (!r.note.empty()) std::cout << " (" << r.note << ")";
      std::cout << "\n";
    }
  }
  if (o.json)
    std::cout << json{{"command", "laws"}, {"status", ok ? "ok" : "failed"}, {"seed", o.seed}, {"suites", arr}}.dump(2)
              << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource-aware type inference for PIA"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--semiring", o.semiring, "Semiring instance")
      ->check(CLI::IsMember({"nat", "zoi", "schedule"}))
      ->capture_default_str();
  app.add_flag("--pipeline", o.pipeline, "Add Pipe constraints");
  app.add_option("--solver", o.solver, "Solver command (default: $PIA_SOLVER, else z3)");
  app.add_option("--write-stage", o.write_stage, "Fix the write stage as SCALE,PHASE");
  app.add_option("--size-bound", o.size_bound, "Largest global size bound");
  app.add_option("--order-retries", o.order_retries, "Stage-order guesses to try");
  app.add_flag("--sequential", o.sequential, "Try order guesses one at a time");
  app.add_flag("--json", o.json, "Machine-readable report");
  app.add_option("--config", o.config, "key=value configuration file");

  auto* infer = app.add_subcommand("infer", "Infer annotations end to end");
  infer->add_option("FILE", o.file)->required();
  auto* constraints = app.add_subcommand("constraints", "Print the generated constraint system");
  constraints->add_option("FILE", o.file)->required();
  auto* smt = app.add_subcommand("smt", "Print the SMT-LIB2 script of one phase");
  smt->add_option("FILE", o.file)->required();
  smt->add_option("--phase", o.phase)->check(CLI::IsMember({"sizes", "stages"}))->capture_default_str();
  auto* check = app.add_subcommand("check", "Check a concretely annotated judgment");
  check->add_option("FILE", o.file)->required();
  auto* den = app.add_subcommand("denote", "Print the strategy of a judgment");
  den->add_option("FILE", o.file)->required();
  den->add_option("--max-int", o.max_int, "Largest integer answer")->capture_default_str();
  auto* laws = app.add_subcommand("laws", "Run the randomized property suites");
  laws->add_option("--seed", o.seed)->capture_default_str();
  for (auto* sub : {infer, constraints, smt, check, den, laws}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*infer) return run_infer(o);
    if (*constraints) return run_constraints(o);
    if (*smt) return run_smt(o);
    if (*check) return run_check(o);
    if (*den) return run_denote(o);
    return run_laws(o, *laws);
  } catch (const Error& e) {
    if (o.json)
      std::cout << nlohmann::ordered_json{{"status", "error"}, {"category", to_string(e.kind())}, {"message", e.what()}}
                       .dump(2)
                << "\n";
    else
      std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  }
}
