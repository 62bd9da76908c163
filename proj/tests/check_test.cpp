// SPDX-License-Identifier: Apache-2.0

#include "pia/check.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pia/gen.hpp"
#include "pia/error.hpp"
#include "pia/pipeline.hpp"

namespace pia {
namespace {

bool have_z3() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

std::string read(const std::string& name) {
  std::ifstream in(std::string(PIA_SOURCE_DIR) + "/samples/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Check, IdentityLeaf) {
  auto r = check_source("declare x : [(1, 0)]·exp\nx\ntype exp\n");
  ASSERT_TRUE(r.accepted) << r.reason << ": " << r.detail;
  EXPECT_EQ(r.derivation->rule, Derivation::Rule::root);
  EXPECT_EQ(r.derivation->children[0].rule, Derivation::Rule::identity);
  EXPECT_EQ(r.derivation->children[0].ctx[0].name, "x#1");
}

TEST(Check, ContractionSums) {
  const char* ok =
      "declare f : [(0.5, 0);(0.5, 0.5)]·([(0.5, 0.25)]·exp -> exp)\n"
      "declare x : [(0.25, 0.125);(0.25, 0.375)]·exp\n"
      "f x\n";
  // f is applied once, so its context annotation must be 𝟙.
  auto r = check_source(ok);
  ASSERT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "scaling mismatch");
  const char* two =
      "declare x : [(0.5, 0.125);(0.5, 0.25)]·exp\n"
      "op{[(0.5, 0.25)];[(0.5, 0.5)]} x x\n";
  // The uses of x are scaled by (0.5, 0.25) and (0.5, 0.5).
  r = check_source(two);
  ASSERT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "annotation sum mismatch");
  r = check_source(
      "declare x : [(0.5, 0.25);(0.5, 0.5)]·exp\n"
      "op{[(0.5, 0.25)];[(0.5, 0.5)]} x x\n");
  ASSERT_TRUE(r.accepted) << r.reason << ": " << r.detail;
  EXPECT_EQ(r.derivation->groups[0], (std::vector<std::string>{"x#1", "x#2"}));
}

TEST(Check, RejectionReasons) {
  EXPECT_EQ(check_source("y\n").reason, "context/term variable mismatch");
  EXPECT_EQ(check_source("op{[(1, 0)];[(0.5, 0)]} 1 1\n").reason, "constant side condition");
  EXPECT_EQ(check_source("seq{[(0.5, 0)];[(0.5, 0.25)]} skip skip\n").reason, "constant side condition");
  EXPECT_EQ(check_source("seq{[(0.25, 0)];[(0.5, 0.5)]} skip skip\ntype exp\n").reason, "type mismatch");
  EXPECT_EQ(check_source("op 1 1\n").reason, "non-concrete annotation");
  EXPECT_EQ(check_source("declare x : [(0.75, 0.5)]·exp\nx\n").reason, "non-contractive stage");
  EXPECT_EQ(check_source("\\x : [(1, 0)]·exp . x\n").reason, "");  // accepted
  EXPECT_EQ(check_source("\\x : [(0.5, 0)]·com . x\n").reason, "scaling mismatch");
  EXPECT_EQ(check_source("\\x : [(0.5, 0)]·com . skip\n").reason, "");  // Abs-weak takes any annotation
}

TEST(Check, BadJudgmentSample) {
  auto r = check_source(read("bad.judgment"));
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "annotation sum mismatch");
}

TEST(Check, DerivationIsDeterministic) {
  std::string src =
      "declare x : [(0.5, 0.25);(0.5, 0.5)]·exp\n"
      "op{[(0.5, 0.25)];[(0.5, 0.5)]} x x\n";
  auto a = check_source(src), b = check_source(src);
  ASSERT_TRUE(a.accepted);
  EXPECT_EQ(a.derivation->str(), b.derivation->str());
  EXPECT_NE(a.derivation->str().find("Application"), std::string::npos);
}

TEST(Check, IncrementEndToEndAccepted) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  SolveConfig c;
  c.pipeline = true;
  c.sequential = true;
  auto r = infer_end_to_end(parse_document(read("incx.pia")), c);
  auto chk = check_judgment(r.judgment);
  ASSERT_TRUE(chk.accepted) << chk.reason << ": " << chk.detail << "\n" << pretty(r.judgment);
  // The reader is used once, so the root of the body is an Abs over x_r.
  const Derivation& app = chk.derivation->children[0];
  EXPECT_EQ(app.rule, Derivation::Rule::application);
  EXPECT_EQ(app.children[1].rule, Derivation::Rule::abstraction);
}

// Moves the first stage by a small contractive step.
Schedule nudge(const Schedule& s) {
  if (s.stages().empty()) return Schedule{Stage::make(rat(1, 2), 0)};
  Stage x = s.stages()[0];
  Rational d = rat(1, 64);
  Stage y = x.phase() + d + x.scale() <= 1 ? Stage::make(x.scale(), x.phase() + d)
            : x.phase() >= d               ? Stage::make(x.scale(), x.phase() - d)
                                           : Stage::make(x.scale() / 2, x.phase());
  Schedule out{y};
  for (std::size_t i = 1; i < s.stages().size(); ++i) out = out + Schedule{s.stages()[i]};
  return out;
}

// One mutant per annotation site; `site` counts down to the one to change.
struct Mutator {
  long site;
  Annot annot(const Annot& a) { return site-- == 0 ? Annot::concrete(nudge(a.value())) : a; }
  Type type(const Type& t) {
    if (t.as_base()) return t;
    Annot a = annot(t.annot());
    Type d = type(t.dom());
    return Type::arrow(a, d, type(t.cod()));
  }
  Term term(const Term& t) {
    if (auto l = t.as<Term::Lambda>()) {
      std::optional<Binder> b = l->binder;
      if (b) b = Binder{annot(b->annot), type(b->type)};
      return Term::lambda(l->name, term(*l->body), b);
    }
    if (auto a = t.as<Term::App>()) {
      Term f = term(*a->fun);
      return Term::app(f, term(*a->arg));
    }
    if (auto c = t.as<Term::Const>()) {
      std::vector<Annot> ps;
      for (const auto& p : c->params) ps.push_back(annot(p));
      return Term::constant(c->id, ps, c->sigma);
    }
    return t;
  }
  Document doc(const Document& d) {
    Document m = d;
    for (auto& decl : m.declarations) {
      if (decl.annot) decl.annot = annot(*decl.annot);
      decl.type = type(decl.type);
    }
    m.term = term(d.term);
    if (d.type) m.type = type(*d.type);
    return m;
  }
};

// Any single perturbation of an annotation of the inferred judgment is
// rejected, since every site is used at least once.
TEST(Check, SensitivityOnAdders) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  SolveConfig c;
  c.pipeline = true;
  c.sequential = true;
  Document d = infer_end_to_end(parse_document(read("adders.pia")), c).judgment;
  auto base = check_judgment(d);
  ASSERT_TRUE(base.accepted) << base.reason << ": " << base.detail;
  long n = 0;
  for (;; ++n) {
    Mutator m{n};
    Document mutant = m.doc(d);
    if (m.site >= 0) break;
    auto r = check_judgment(mutant);
    EXPECT_FALSE(r.accepted) << "site " << n << "\n" << pretty(mutant);
  }
  // f, its domain, x, and each adder with its two domains.
  EXPECT_EQ(n, 12);
}

// Generate, solve, substitute, check on random closed terms.
TEST(Check, SoundnessOnRandomTerms) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  std::mt19937_64 rng(2024);
  gen::TermGen g(rng);
  SolveConfig c;
  c.sequential = true;
  c.solver.timeout_seconds = 60;
  for (int i = 0; i < 15; ++i) {
    Document d;
    d.term = g.term(g.random_type(1), 4);
    auto r = infer_end_to_end(d, c);
    ASSERT_TRUE(r.verification.exact) << pretty(d.term);
    auto chk = check_judgment(r.judgment);
    EXPECT_TRUE(chk.accepted) << pretty(d.term) << "\n" << chk.reason << ": " << chk.detail << "\n"
                              << pretty(r.judgment);
  }
}

}  // namespace
}  // namespace pia
