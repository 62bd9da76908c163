// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion with its measurements.
// Exits nonzero when any criterion fails.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "pia/error.hpp"
#include "pia/laws.hpp"
#include "pia/pipeline.hpp"

namespace {

using namespace pia;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double seconds) {
  std::ostringstream s;
  s.precision(3);
  s << seconds << " s";
  return s.str();
}

Document sample(const std::string& name) {
  std::ifstream in(std::string(PIA_SOURCE_DIR) + "/samples/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

SolveConfig pipeline_config() {
  SolveConfig c;
  c.pipeline = true;
  return c;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

int failures = 0;

void report(int n, const std::string& title, const std::function<Outcome()>& body) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o.require(false, "error (" + to_string(e.kind()) + "): " + e.what());
  }
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << title << " [" << fmt(since(t0)) << "]\n";
  for (const auto& note : o.notes) std::cout << "        " << note << "\n";
  std::cout.flush();
  if (!o.pass) ++failures;
}

const Term::Const* find_const(const Term& t, ConstId id) {
  if (auto c = t.as<Term::Const>()) return c->id == id ? c : nullptr;
  if (auto l = t.as<Term::Lambda>()) return find_const(*l->body, id);
  if (auto a = t.as<Term::App>()) {
    if (auto c = find_const(*a->fun, id)) return c;
    return find_const(*a->arg, id);
  }
  return nullptr;
}

std::optional<int> var_id(const ConstraintSystem& sys, const std::string& name) {
  for (const auto& v : sys.vars)
    if (v.name == name) return v.id;
  return std::nullopt;
}

Outcome increment() {
  Outcome o;
  auto t0 = Clock::now();
  InferResult r = infer_end_to_end(sample("incx.pia"), pipeline_config());
  double t = since(t0);
  o.require(r.verification.exact, "model verified exactly");
  o.require(r.check.accepted, "checker accepts the judgment");
  const auto* n = find_const(r.judgment.term, ConstId::new_);
  o.require(n && n->params.size() == 2, "new constant found");
  if (!n || n->params.size() != 2) return o;
  Stage w = r.system.write_stage ? r.stages.model.at(*r.system.write_stage).stages()[0] : *SolveConfig{}.write_stage;
  Schedule j = n->params[0].value(), k = n->params[1].value();
  o.notes.push_back("new{com;" + j.str() + ";" + k.str() + "}, w = " + w.str());
  bool shape_j = false;
  if (j.stages().size() == 1) {
    Stage x = j.stages()[0];
    Rational bs = x.scale() / w.scale(), bp = (x.phase() - w.phase()) / w.scale();
    if (Stage::is_contractive(bs, bp)) {
      Stage b = Stage::make(bs, bp);
      shape_j = !b.is_identity() && Schedule{w.compose(b)} == j;
      o.notes.push_back("b = " + b.str() + (b.scale() == 0 ? ", degenerate: scale 0" : ""));
    }
  }
  o.require(shape_j, "J = [w×b] with b a single non-identity contractive stage");
  o.require(k == Schedule{w}, "K = [w]");
  o.require(t < 5, "runtime " + fmt(t) + " < 5 s");
  return o;
}

Outcome adders() {
  Outcome o;
  auto t0 = Clock::now();
  InferResult r = infer_end_to_end(sample("adders.pia"), pipeline_config());
  double t = since(t0);
  o.require(r.verification.exact && r.verification.max_residual == 0, "own model: residuals exactly 0");
  o.require(r.check.accepted, "checker accepts the judgment");
  auto within = [](std::size_t ours, double ref) { return ours >= ref / 3 && ours <= ref * 3; };
  o.require(within(r.stats.smt_variables, 142),
            "variables " + std::to_string(r.stats.smt_variables) + " within 3x of 142");
  o.require(within(r.stats.smt_assertions, 357),
            "assertions " + std::to_string(r.stats.smt_assertions) + " within 3x of 357");
  o.require(t < 30, "runtime " + fmt(t) + " < 30 s");

  // The reference adder stages, pinned; the remaining unknowns are solved.
  SolveConfig c = pipeline_config();
  auto one = [](const char* s, const char* p) {
    return Schedule{Stage::make(*parse_rational(s), *parse_rational(p))};
  };
  c.fixed = {{"A1", one("0.5", "0.265625")}, {"B1", one("0.5", "0.25")}, {"A2", one("0.5", "0.21875")},
             {"B2", one("0.5", "0.25")},     {"A3", one("0.5", "0.375")},  {"B3", one("0.5", "0.25")}};
  try {
    InferResult p = infer_end_to_end(sample("adders.pia"), c);
    o.require(p.verification.within_tolerance && p.verification.max_residual <= 1e-9,
              "reference adder stages satisfy the system");
  } catch (const Error& e) {
    o.require(false, std::string("reference adder stages satisfy the system: ") + e.what());
  }
  c.pipeline = false;
  try {
    InferResult p = infer_end_to_end(sample("adders.pia"), c);
    o.notes.push_back("reference adder stages without Pipe constraints: " +
                      std::string(p.verification.exact ? "exact" : "not exact"));
  } catch (const Error& e) {
    o.notes.push_back(std::string("reference adder stages without Pipe constraints: ") + e.what());
  }
  return o;
}

Outcome convolution() {
  Outcome o;
  auto t0 = Clock::now();
  InferResult r = infer_end_to_end(sample("convolution.pia"), pipeline_config());
  double t = since(t0);
  auto size_of = [&](const std::string& name) -> std::uint64_t {
    auto id = var_id(r.system, name);
    if (!id || !r.sizes.sizes.count(*id)) return 0;
    return r.sizes.sizes.at(*id);
  };
  for (const auto& [name, want] : std::vector<std::pair<std::string, std::uint64_t>>{
           {"J1i", 1}, {"J1iv", 1}, {"J2i", 1}, {"J2iv", 1}, {"J1vi", 4}, {"J2vi", 3}})
    o.require(size_of(name) == want, "size(" + name + ") = " + std::to_string(size_of(name)) + ", expected " +
                                         std::to_string(want));
  o.require(r.verification.exact && r.check.accepted, "stages phase SAT, model exact, checker accepts");
  o.require(t < 60, "runtime " + fmt(t) + " < 60 s");

  SolveConfig c = pipeline_config();
  Schedule id1 = Schedule::one();
  Schedule f = parse_annot("[(0.5, 0.1);(0.5, 0.2)]").value();
  Schedule j1vi = parse_annot("[(0.5, 0.125);(0.5, 0.25);(0.5, 0.375);(0.5, 0.4375)]").value();
  Schedule j2vi = parse_annot("[(0.25, 0.25);(0.25, 0.5);(0.25, 0.625)]").value();
  c.fixed = {{"J1i", id1}, {"J1iv", id1}, {"J2i", id1},   {"J2iv", id1}, {"J1ii", f},    {"J1iii", f},
             {"J1v", f},   {"J2ii", f},   {"J2iii", f},   {"J2v", f},    {"J1vi", j1vi}, {"J3", j1vi},
             {"J2vi", j2vi}};
  try {
    InferResult p = infer_end_to_end(sample("convolution.pia"), c);
    o.require(p.verification.within_tolerance && p.verification.max_residual <= 1e-9,
              "reference model satisfies the system");
  } catch (const Error& e) {
    o.require(false, std::string("reference model satisfies the system: ") + e.what());
  }
  return o;
}

Outcome suite(const SuiteResult& r, double limit) {
  Outcome o;
  o.require(r.ok(), r.name + ": " + std::to_string(r.cases - r.failures) + "/" + std::to_string(r.cases) +
                        (r.note.empty() ? "" : " (" + r.note + ")"));
  o.require(r.seconds < limit, "runtime " + fmt(r.seconds) + " < " + fmt(limit));
  return o;
}

void merge(Outcome& into, const Outcome& part) {
  into.pass = into.pass && part.pass;
  into.notes.insert(into.notes.end(), part.notes.begin(), part.notes.end());
}

}  // namespace

int main() {
  const std::uint64_t seed = 20261016;
  report(1, "increment example: typable with new{com;[w×b];[w]}", increment);
  report(2, "three adders: SAT, exact residuals, reference stages", adders);
  report(3, "convolution: sizes, SAT, reference model", convolution);
  report(4, "semiring laws, 1000 cases per law and instance", [&] {
    Outcome o;
    auto t0 = Clock::now();
    std::size_t cases = 0, bad = 0;
    for (Instance i : {Instance::nat, Instance::zoi, Instance::schedule})
      for (const auto& r : semiring_laws(i, seed)) {
        cases += r.cases;
        bad += r.failures;
        if (!r.ok()) o.require(false, r.name + ": " + r.note);
      }
    double t = since(t0);
    o.require(bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) + " cases");
    o.require(t < 10, "runtime " + fmt(t) + " < 10 s");
    return o;
  });
  report(5, "soundness loop on 100 random terms of depth <= 5", [&] {
    SolveConfig c;
    c.solver.timeout_seconds = 60;
    return suite(soundness(seed, 100, 5, c), 300);
  });
  report(6, "category laws on small arenas", [&] {
    Outcome o;
    auto t0 = Clock::now();
    auto results = category_laws(seed, 50);
    double t = since(t0);
    o.notes.push_back(std::to_string(small_arenas().arenas.size()) + " arenas");
    for (const auto& r : results) {
      o.require(r.ok(), r.name + ": " + std::to_string(r.cases - r.failures) + "/" + std::to_string(r.cases) +
                            (r.failures ? " (" + r.note + ")" : ""));
      if (r.name == "tensor functoriality") o.require(r.cases >= 50, "at least 50 quadruples");
    }
    o.require(small_arenas().arenas.size() >= 20, "at least 20 arenas");
    o.require(t < 120, "runtime " + fmt(t) + " < 120 s");
    return o;
  });
  report(7, "coherence of derivation trees at max_int = 2", [&] {
    SolveConfig c;
    SuiteResult r = coherence(coherence_terms(), c, 2);
    Outcome o = suite(r, 120);
    o.require(r.cases >= 10, std::to_string(r.cases) + " terms with several derivation trees");
    return o;
  });
  report(8, "schedule action functoriality on 100 random cases", [&] {
    return suite(action_functoriality(seed, 100), 30);
  });
  report(9, "grid oracle against the solver on 25 stage systems", [&] {
    SolveConfig c;
    SuiteResult r = oracle_agreement(seed, 25, c.solver);
    Outcome o = suite(r, 600);
    return o;
  });
  std::cout << (failures ? std::to_string(failures) + " criteria failed\n" : "all criteria passed\n");
  return failures ? 1 : 0;
}
