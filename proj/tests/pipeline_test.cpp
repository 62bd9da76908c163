// SPDX-License-Identifier: Apache-2.0

#include "pia/pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pia/error.hpp"

namespace pia {
namespace {

bool have_z3() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

Document sample(const std::string& name) {
  std::ifstream in(std::string(PIA_SOURCE_DIR) + "/samples/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

SolveConfig config(bool pipeline) {
  SolveConfig c;
  c.pipeline = pipeline;
  c.sequential = true;
  c.solver.timeout_seconds = 60;
  return c;
}

// Sizes of the model agree with the size phase (homomorphism consistency).
void expect_sizes_consistent(const InferResult& r) {
  for (const auto& [id, n] : r.sizes.sizes) EXPECT_EQ(r.stages.model.at(id).size(), n) << r.system.vars[id].name;
}

TEST(Config, ParsesKeysAndRejectsJunk) {
  SolveConfig c = parse_config(
      "# comment\nwrite_stage = 1/8, 0\nsize_bound_max=5\norder_retry_budget = 7\n"
      "sequential = true\npipeline=yes\nsolver = z3 -in -smt2 -T:5\nfix.b = [(0.5, 0.25)]\n");
  ASSERT_TRUE(c.write_stage);
  EXPECT_EQ(*c.write_stage, Stage::make(rat(1, 8), 0));
  EXPECT_EQ(c.size_bound_max, 5u);
  EXPECT_EQ(c.order_retry_budget, 7u);
  EXPECT_TRUE(c.sequential);
  EXPECT_TRUE(c.pipeline);
  EXPECT_EQ(c.solver.command, "z3 -in -smt2 -T:5");
  EXPECT_EQ(c.fixed.at("b"), Schedule{Stage::make(rat(1, 2), rat(1, 4))});
  EXPECT_THROW(parse_config("colour = blue\n"), Error);
  EXPECT_THROW(parse_config("size_bound_start = 0\n"), Error);
  EXPECT_THROW(parse_config("write_stage = 0, 0.5\n"), Error);
  EXPECT_THROW(parse_config("write_stage = 0.75, 0.5\n"), Error);
  EXPECT_THROW(parse_config("size_bound_max\n"), Error);
}

TEST(Sizes, AbstractionFollowsStructure) {
  auto sys = generate(sample("incx.pia"), SolveConfig{}.gen_options());
  SizeProblem p = size_problem(sys, SolveConfig{});
  EXPECT_EQ(p.names.size(), sys.count(VarKind::schedule));
  std::size_t eqs = 0;
  for (const auto& c : sys.constraints)
    if (c.kind == Constraint::Kind::eq || c.kind == Constraint::Kind::def || c.kind == Constraint::Kind::size) ++eqs;
  EXPECT_EQ(p.eqs.size(), eqs);
}

TEST(Sizes, SkipNeedsNoSolver) {
  SolveConfig c = config(true);
  c.solver.command = "/nonexistent/solver";
  auto sys = generate(parse_document("skip"), c.gen_options());
  EXPECT_TRUE(solve_sizes(sys, c).sizes.empty());
  auto st = solve_stages(sys, {}, c);
  EXPECT_TRUE(st.model.empty());
}

TEST(Guess, RoundRobinAdvance) {
  Lowering::Guess g{{0, 1}, {0, 1, 2}};
  EXPECT_FALSE(Lowering::advance(g, 0));
  Lowering::advance(g, 1);
  EXPECT_EQ(g[0], (std::vector<std::size_t>{1, 0}));
  Lowering::advance(g, 2);
  EXPECT_EQ(g[1], (std::vector<std::size_t>{0, 2, 1}));
  Lowering::advance(g, 3);
  EXPECT_EQ(g[0], (std::vector<std::size_t>{0, 1}));
}

TEST(Stages, FixedConcreteMismatchIsUnsat) {
  // Forcing the reader annotation to two stages contradicts the single use.
  SolveConfig c = config(false);
  c.write_stage = Stage::make(rat(1, 8), 0);
  auto sys = generate(parse_document("new x. x := !x"), c.gen_options());
  c.fixed["J1"] = Schedule{Stage::make(rat(1, 2), 0), Stage::make(rat(1, 2), rat(1, 2))};
  EXPECT_THROW(solve_sizes(sys, c), Error);
}

TEST(EndToEnd, IncrementIsTypable) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  auto r = infer_end_to_end(sample("incx.pia"), config(true));
  EXPECT_TRUE(r.verification.exact);
  EXPECT_TRUE(r.check.accepted) << r.check.reason << ": " << r.check.detail;
  EXPECT_EQ(pretty(*r.judgment.type), "com");
  expect_sizes_consistent(r);
}

TEST(EndToEnd, AddersModelVerifiesExactly) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  auto r = infer_end_to_end(sample("adders.pia"), config(true));
  EXPECT_TRUE(r.verification.exact);
  EXPECT_EQ(r.verification.max_residual, 0);
  EXPECT_TRUE(r.check.accepted) << r.check.reason << ": " << r.check.detail;
  expect_sizes_consistent(r);
  for (const auto& [id, s] : r.stages.model)
    if (r.system.vars[id].kind == VarKind::schedule) EXPECT_TRUE(is_pipeline(s)) << r.system.vars[id].name;
}

TEST(EndToEnd, ParallelMatchesSequential) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  SolveConfig seq = config(true), par = config(true);
  par.sequential = false;
  par.jobs = 4;
  auto a = infer_end_to_end(sample("convolution.pia"), seq);
  auto b = infer_end_to_end(sample("convolution.pia"), par);
  EXPECT_EQ(a.stages.attempts, b.stages.attempts);
  EXPECT_TRUE(b.verification.exact);
  EXPECT_TRUE(b.check.accepted) << b.check.reason << ": " << b.check.detail;
  EXPECT_EQ(a.sizes.sizes, b.sizes.sizes);
}

TEST(EndToEnd, SeqAndParConstants) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  auto r = infer_end_to_end(parse_document("(skip ; skip) || skip"), config(true));
  ASSERT_TRUE(r.verification.exact);
  // seq{x;y}: x strictly before y. par{x}: one shared stage.
  auto top = r.judgment.term.as<Term::App>();
  auto par = top->fun->as<Term::App>()->fun->as<Term::Const>();
  ASSERT_EQ(par->id, ConstId::par);
  EXPECT_EQ(par->params.size(), 1u);
  auto seq = top->fun->as<Term::App>()->arg->as<Term::App>()->fun->as<Term::App>()->fun->as<Term::Const>();
  ASSERT_EQ(seq->id, ConstId::seq);
  Stage x = seq->params[0].value().stages()[0], y = seq->params[1].value().stages()[0];
  EXPECT_TRUE(strictly_before(x, y));
  EXPECT_TRUE(stage_orders(x, y).disjoint);
}

TEST(EndToEnd, SizeUnsatisfiableIsReported) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  // A single use cannot carry a two-stage annotation.
  Document d = parse_document("declare f : ?#2·exp -> exp\ndeclare x : ?#1·exp\nf x\n");
  SolveConfig c = config(true);
  c.size_bound_max = 3;
  auto sys = generate(d, c.gen_options());
  sys.constraints.push_back(Constraint{Constraint::Kind::size, sys.judgment.declarations[1].annot.value()});
  sys.constraints.back().size = 3;
  try {
    solve_sizes(sys, c);
    FAIL() << "expected size-unsatisfiable";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsat);
    EXPECT_NE(std::string(e.what()).find("size-unsatisfiable"), std::string::npos);
  }
}

// The write stage fixed to (1/8, 0): the reduced stage system of the
// increment example is small enough for the grid oracle.
TEST(Oracle, IncrementHasGridModel) {
  SolveConfig c = config(true);
  c.write_stage = Stage::make(rat(1, 8), 0);
  auto sys = generate(sample("incx.pia"), c.gen_options());
  Sizes sizes;
  for (const auto& v : sys.vars)
    if (v.kind == VarKind::schedule) sizes[v.id] = 1;
  Lowering low(sys, sizes, c);
  ReducedProblem red = reduce(low.problem(low.identity_guess()));
  ASSERT_LE(red.problem.names.size(), 6u);
  auto grid = brute_oracle(red.problem, rat(1, 8));
  ASSERT_TRUE(grid);
  auto values = expand(red, *grid);
  Model m = low.model(values);
  EXPECT_TRUE(verify(sys, m).exact);
}

}  // namespace
}  // namespace pia
