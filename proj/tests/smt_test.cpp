// SPDX-License-Identifier: Apache-2.0

#include "pia/smt.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pia/error.hpp"
#include "pia/gen.hpp"

namespace pia {
namespace {

SizeTerm var(int i) { return {SizeTerm::Kind::var, i, 0, {}}; }
SizeTerm lit(std::uint64_t n) { return {SizeTerm::Kind::lit, -1, n, {}}; }
SizeTerm add(std::vector<SizeTerm> a) { return {SizeTerm::Kind::add, -1, 0, std::move(a)}; }

Stage st(const char* s, const char* p) { return Stage::make(*parse_rational(s), *parse_rational(p)); }

bool have_z3() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

TEST(Smt, SexprParsing) {
  auto xs = parse_sexprs("sat\n((a (/ 1.0 3.0))\n (b (- 0.5)))  ; tail\n");
  ASSERT_EQ(xs.size(), 2u);
  EXPECT_EQ(xs[0].atom, "sat");
  EXPECT_EQ(*sexpr_rational(xs[1].list[0].list[1]), Rational(1, 3));
  EXPECT_EQ(*sexpr_rational(xs[1].list[1].list[1]), Rational(-1, 2));
  auto r = parse_sexprs("(root-obj (+ (^ x 2) (- 2)) 2)");
  EXPECT_FALSE(sexpr_rational(r[0]));
  EXPECT_THROW(parse_sexprs("(a (b)"), Error);
  EXPECT_THROW(parse_sexprs("a)"), Error);
}

TEST(Smt, EmitSizes) {
  SizeProblem p{{"n1", "n2"}, {true, false}, {{add({var(0), var(1)}), lit(4)}}};
  EXPECT_EQ(emit_sizes(p, 3).text(),
            "(set-logic QF_NIA)\n"
            "(declare-fun n1 () Int)\n"
            "(declare-fun n2 () Int)\n"
            "(assert (>= n1 0))\n"
            "(assert (<= n1 3))\n"
            "(assert (>= n2 0))\n"
            "(assert (= (+ n1 n2) 4))\n"
            "(check-sat)\n"
            "(get-model)\n");
}

TEST(Smt, EmitStages) {
  StageProblem p{{"x", "y"}, {}};
  StageAtom ni{StageAtom::Kind::not_identity, {0}, {}};
  StageAtom eq{StageAtom::Kind::eq, {0, 1}, {st("1/2", "1/4")}};
  p.atoms = {ni, eq};
  SmtScript s = emit_stages(p);
  EXPECT_EQ(s.variables(), 4u);
  // 4 contractivity assertions per unknown, one for neq-id, two for eq.
  ASSERT_EQ(s.assertions.size(), 11u);
  EXPECT_EQ(s.assertions[0], "(<= 0.0 s0_x)");
  EXPECT_EQ(s.assertions[3], "(<= (+ s0_x p0_x) 1.0)");
  EXPECT_EQ(s.assertions[8], "(not (and (= s0_x 1.0) (= p0_x 0.0)))");
  EXPECT_EQ(s.assertions[9], "(= (* s0_x s1_y) (/ 1.0 2.0))");
  EXPECT_EQ(s.assertions[10], "(= (+ p0_x (* s0_x p1_y)) (/ 1.0 4.0))");
  // Emission is deterministic.
  EXPECT_EQ(s.text(), emit_stages(p).text());
}

TEST(Smt, HoldsMatchesSemantics) {
  std::vector<Stage> v{st("1/2", "0"), st("1/2", "1/2")};
  EXPECT_TRUE(holds(StageAtom{StageAtom::Kind::before, {0}, {1}}, v) == false);  // end 1/2 is not < 1/2
  EXPECT_TRUE(holds(StageAtom{StageAtom::Kind::strict_fifo, {0}, {1}}, v));
  EXPECT_EQ(evaluate(StageTerm{0, 1}, v), st("1/4", "1/4"));
  StageAtom b{StageAtom::Kind::bound, {1}, {}, Component::phase, Cmp::ge, Rational(1, 2)};
  EXPECT_TRUE(holds(b, v));
}

TEST(Smt, OracleFindsAndRefutes) {
  StageProblem p{{"x"}, {}};
  p.atoms.push_back({StageAtom::Kind::eq, {0, 0}, {st("1/4", "3/8")}});
  auto m = brute_oracle(p, Rational(1, 8));
  ASSERT_TRUE(m);
  EXPECT_EQ((*m)[0], st("1/2", "1/4"));

  StageProblem q{{"x", "y"}, {}};
  q.atoms.push_back({StageAtom::Kind::before, {0}, {1}});
  q.atoms.push_back({StageAtom::Kind::before, {1}, {0}});
  EXPECT_FALSE(brute_oracle(q, Rational(1, 8)));

  StageProblem big{{"a", "b", "c", "d", "e", "f", "g"}, {}};
  EXPECT_THROW(brute_oracle(big, Rational(1, 8)), Error);
}

TEST(Smt, SolverSatAndUnsat) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  SolverConfig cfg{"z3 -in -smt2", 30};
  StageProblem p{{"x"}, {}};
  p.atoms.push_back({StageAtom::Kind::eq, {0, 0}, {st("1/4", "3/8")}});
  SolverResult r = run_solver(emit_stages(p).text(), cfg);
  ASSERT_EQ(r.status, SolverResult::Status::sat);
  auto v = read_stages(p, r);
  EXPECT_TRUE(holds(p, v));

  StageProblem q{{"x", "y"}, {}};
  q.atoms.push_back({StageAtom::Kind::before, {0}, {1}});
  q.atoms.push_back({StageAtom::Kind::before, {1}, {0}});
  EXPECT_EQ(run_solver(emit_stages(q).text(), cfg).status, SolverResult::Status::unsat);

  SizeProblem sp{{"n1", "n2"}, {true, true}, {{add({var(0), var(1)}), lit(4)}}};
  auto sr = run_solver(emit_sizes(sp, 3).text(), cfg);
  ASSERT_EQ(sr.status, SolverResult::Status::sat);
  auto sizes = read_sizes(sp, sr);
  EXPECT_EQ(sizes["n1"] + sizes["n2"], 4u);
}

TEST(Smt, MissingSolverIsAnError) {
  SolverConfig cfg{"/nonexistent/solver-binary", 5};
  EXPECT_THROW(run_solver("(check-sat)\n", cfg), Error);
}

// Random toy problems: z3 and the grid oracle agree whenever the grid finds a
// model, and every z3 model satisfies the atoms exactly.
TEST(Smt, RandomAgreementWithOracle) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  std::mt19937 rng(7);
  SolverConfig cfg{"z3 -in -smt2", 30};
  auto grid_stage = [&] {
    int s = static_cast<int>(rng() % 9);
    int p = static_cast<int>(rng() % static_cast<unsigned>(9 - s));
    return Stage::make(Rational(s, 8), Rational(p, 8));
  };
  for (int round = 0; round < 20; ++round) {
    int n = 1 + static_cast<int>(rng() % 3);
    StageProblem p;
    for (int i = 0; i < n; ++i) p.names.push_back("u" + std::to_string(i));
    int atoms = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < atoms; ++k) {
      int a = static_cast<int>(rng() % static_cast<unsigned>(n));
      int b = static_cast<int>(rng() % static_cast<unsigned>(n));
      switch (rng() % 4) {
        case 0: p.atoms.push_back({StageAtom::Kind::eq, {a, b}, {grid_stage()}}); break;
        case 1: p.atoms.push_back({StageAtom::Kind::strict_fifo, {a}, {b}}); break;
        case 2: p.atoms.push_back({StageAtom::Kind::before, {a}, {grid_stage()}}); break;
        default: p.atoms.push_back({StageAtom::Kind::not_identity, {a}, {}}); break;
      }
    }
    auto grid = brute_oracle(p, Rational(1, 8));
    SolverResult r = run_solver(emit_stages(p).text(), cfg);
    if (grid) {
      ASSERT_TRUE(holds(p, *grid));
      EXPECT_EQ(r.status, SolverResult::Status::sat) << "round " << round;
    }
    if (r.status == SolverResult::Status::sat) {
      auto v = read_stages(p, r);
      EXPECT_TRUE(holds(p, v)) << "round " << round;
    }
  }
}

}  // namespace
}  // namespace pia
