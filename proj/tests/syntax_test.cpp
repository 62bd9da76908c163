// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "pia/error.hpp"
#include "pia/syntax.hpp"

using namespace pia;

namespace {

TEST(Parse, NewSugar) {
  Term t = parse_term("new x. x := !x + 1");
  Term expect = Term::app(
      Term::constant(ConstId::new_),
      Term::lambda("x_r", Term::lambda("x_w", Term::app(Term::var("x_w"),
                                                         Term::app(Term::constant(ConstId::op),
                                                                   Term::var("x_r"),
                                                                   Term::constant(ConstId::one))))));
  EXPECT_EQ(t, expect);
  EXPECT_EQ(pretty(t, {.sugar = true}), "new x. x := !x + 1");
  EXPECT_EQ(parse_term(pretty(t)), t);
}

TEST(Parse, Skip) { EXPECT_EQ(parse_term("skip"), Term::constant(ConstId::skip)); }

TEST(Parse, UserOperators) {
  Term t = parse_term("(f *1 f) *2 (f *1 f)");
  Term ff = Term::app(Term::var("*1"), Term::var("f"), Term::var("f"));
  EXPECT_EQ(t, Term::app(Term::var("*2"), ff, ff));
  EXPECT_EQ(pretty(t), "f *1 f *2 (f *1 f)");
  EXPECT_EQ(parse_term(pretty(t)), t);
}

TEST(Parse, Precedence) {
  Term t = parse_term("a; b || c; d");
  Term par = Term::app(Term::constant(ConstId::par), Term::var("b"), Term::var("c"));
  Term expect = Term::app(Term::constant(ConstId::seq), Term::var("a"),
                          Term::app(Term::constant(ConstId::seq), par, Term::var("d")));
  EXPECT_EQ(t, expect);
  Term i = parse_term("if e then a else b; c");
  EXPECT_EQ(pretty(i), "(if e then a else b); c");
}

TEST(Parse, Errors) {
  try {
    parse_term("f (x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("1:5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_term("2"), Error);
  EXPECT_THROW(parse_term("x := 1"), Error);
  EXPECT_THROW(parse_term("new x. x"), Error);
  EXPECT_THROW(parse_term("f $ g"), Error);
}

TEST(Parse, ConstParams) {
  Term t = parse_term("op{[(0.5, 0.1)];[(0.5, 0.2)]}");
  auto c = t.as<Term::Const>();
  ASSERT_TRUE(c);
  ASSERT_EQ(c->params.size(), 2u);
  EXPECT_EQ(c->params[1].value().str(), "[(0.5, 0.2)]");
  Term n = parse_term("new{com;[(1, 0)];[(0.5, 0)]}");
  EXPECT_EQ(n.as<Term::Const>()->sigma, BaseType::com);
  EXPECT_EQ(parse_term(pretty(n)), n);
  EXPECT_THROW(parse_term("op{[(1, 0)]}"), Error);
}

TEST(Pretty, Types) {
  Type f = Type::arrow(Annot::concrete(Schedule({Stage::make(rat(1, 2), rat(1, 10)),
                                                 Stage::make(rat(1, 2), rat(2, 10))})),
                       Type::exp(), Type::exp());
  EXPECT_EQ(pretty(f), "[(0.5, 0.1);(0.5, 0.2)]·exp -> exp");
  EXPECT_EQ(parse_type(pretty(f)), f);
  EXPECT_EQ(pretty(Type::com()), "com");
  EXPECT_EQ(pretty(Type::acc()), "[w]·exp -> com");
  EXPECT_EQ(parse_type("acc"), Type::acc());
  EXPECT_EQ(parse_type("[w]·exp ⊸ com"), Type::acc());
  Type h = parse_type("?a#2·(exp -> exp) -> ?#1·exp -> exp");
  EXPECT_EQ(pretty(h), "?a#2·(?·exp -> exp) -> ?#1·exp -> exp");
  EXPECT_EQ(pretty(parse_type("[w×b]·exp -> com")), "[w×b]·exp -> com");
}

TEST(Parse, Document) {
  Document d = parse_document(
      "// adders\n"
      "declare f : [(0.5, 0.1);(0.5, 0.2)]·exp -> exp\n"
      "declare x : exp\n"
      "declare y : [(1, 0)]·exp\n"
      "f x\n"
      "type exp\n");
  ASSERT_EQ(d.declarations.size(), 3u);
  EXPECT_FALSE(d.declarations[1].annot);
  ASSERT_TRUE(d.declarations[2].annot);
  EXPECT_EQ(d.declarations[2].annot->str(), "[(1, 0)]");
  EXPECT_EQ(d.term, Term::app(Term::var("f"), Term::var("x")));
  ASSERT_TRUE(d.type);
  EXPECT_EQ(parse_document(pretty(d)).term, d.term);
  try {
    parse_document("declare f : ?·exp\n\nf )");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3:"), std::string::npos) << e.what();
  }
}

// --- round trip on random ASTs ------------------------------------------------

Term random_term(std::mt19937_64& rng, int depth) {
  static const char* names[] = {"x", "y", "f", "g", "*1", "+2"};
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  switch (pick(rng)) {
    case 0: return Term::var(names[rng() % 6]);
    case 1: return Term::constant(rng() % 2 ? ConstId::one : ConstId::skip);
    case 2: {
      static const ConstId cs[] = {ConstId::op, ConstId::seq, ConstId::par, ConstId::comp,
                                   ConstId::if_, ConstId::new_};
      ConstId c = cs[rng() % 6];
      std::vector<Annot> params;
      std::optional<BaseType> sigma;
      if (rng() % 2) {
        for (std::size_t i = 0; i < param_count(c); ++i)
          params.push_back(Annot::concrete(Schedule{Stage::make(rat(1, 2), rat(rng() % 3, 8))}));
        if (c == ConstId::new_ || c == ConstId::if_) sigma = BaseType::exp;
      }
      return Term::constant(c, params, sigma);
    }
    case 3:
    case 4: {
      std::optional<Binder> b;
      if (rng() % 2)
        b = Binder{Annot::hole(rng() % 2 ? "J" : "", 2),
                   Type::arrow(Annot::concrete(Schedule::one()), Type::exp(), Type::com())};
      return Term::lambda(names[rng() % 4], random_term(rng, depth - 1), b);
    }
    default: return Term::app(random_term(rng, depth - 1), random_term(rng, depth - 1));
  }
}

TEST(RoundTrip, RandomTerms) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    Term t = random_term(rng, 5);
    std::string s = pretty(t);
    Term back = parse_term(s);
    ASSERT_EQ(back, t) << s << "\n" << pretty(back);
  }
}

TEST(RoundTrip, Resugar) {
  for (const char* src : {"new x. x := !x + 1; x := 1", "new a. new b. b := !a || a := !b",
                          "\\f. new x. x := f !x"}) {
    Term t = parse_term(src);
    EXPECT_EQ(pretty(t, {.sugar = true}), src);
  }
}

}  // namespace
