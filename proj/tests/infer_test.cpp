// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pia/error.hpp"
#include "pia/infer.hpp"
#include "pia/simple_types.hpp"

using namespace pia;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(std::string(PIA_SOURCE_DIR) + "/" + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Simple, Examples) {
  EXPECT_EQ(infer_simple(parse_term("new x. x := !x + 1"), {}).type, SimpleType::com());
  EXPECT_EQ(infer_simple(parse_term("skip"), {}).type, SimpleType::com());
  Document conv = parse_document(slurp("samples/convolution.pia"));
  EXPECT_EQ(infer_simple(conv.term, conv.declarations).type.str(), "exp -> exp");
}

TEST(Simple, Errors) {
  EXPECT_THROW(infer_simple(parse_term("skip 1"), {}), Error);
  EXPECT_THROW(infer_simple(parse_term("\\x. x x"), {}), Error);
  EXPECT_THROW(infer_simple(parse_term("y"), {}), Error);
  EXPECT_THROW(infer_simple(parse_term("if 1 then (\\x. x) else (\\x. x)"), {}), Error);
}

TEST(Simple, ApplicationDomains) {
  Term t = parse_term("(\\f. \\x. f (f x)) (\\y. y + 1) 1");
  TypedTerm tt = infer_simple(t, {});
  EXPECT_EQ(tt.type, SimpleType::exp());
  std::function<void(const Term&, const TypedTerm&)> check = [&](const Term& u, const TypedTerm& ut) {
    if (auto a = u.as<Term::App>()) {
      ASSERT_TRUE(ut.children[0].type.is_arrow());
      EXPECT_EQ(ut.children[0].type.dom(), ut.children[1].type);
      check(*a->fun, ut.children[0]);
      check(*a->arg, ut.children[1]);
    } else if (auto l = u.as<Term::Lambda>()) {
      check(*l->body, ut.children[0]);
    }
  };
  check(t, tt);
}

TEST(Flatten, Equations) {
  EXPECT_TRUE(flatten_type_eq(Type::exp(), Type::exp()).empty());
  EXPECT_EQ(flatten_type_eq(parse_type("?a·exp -> exp"), parse_type("?b·exp -> exp")).size(), 1u);
  EXPECT_EQ(flatten_type_eq(parse_type("?a·(?b·exp -> exp) -> ?c·exp -> exp"),
                            parse_type("?d·(?e·exp -> exp) -> ?f·exp -> exp"))
                .size(),
            3u);
  EXPECT_THROW(flatten_type_eq(Type::exp(), Type::com()), Error);
}

TEST(Generate, Identity) {
  Document d = parse_document("declare x : exp\nx");
  ConstraintSystem s = generate(d);
  // x : J·exp with J := 1 (one use)
  ASSERT_EQ(s.constraints.size(), 1u);
  EXPECT_EQ(s.constraints[0].str(), "(= J1 [(1, 0)])");
  Model m{{0, Schedule::one()}};
  Document j = substitute(s, m);
  EXPECT_EQ(pretty(j), "declare x : [(1, 0)]·exp\nx\ntype exp\n");
}

TEST(Generate, Weakening) {
  ConstraintSystem s = generate(parse_document("\\x. skip"));
  EXPECT_TRUE(s.constraints.empty());
  ASSERT_EQ(s.vars.size(), 1u);
  EXPECT_EQ(s.vars[0].origin, "binder x");
}

TEST(Generate, VariableCount) {
  // schedule vars: one per arrow in each occurrence type, one per binder,
  // one per declared entry without annotation, two per new.
  ConstraintSystem s = generate(parse_document("declare f : ?·exp -> exp\n\\x. f (f x)"));
  // occurrences: f (1 arrow) twice, x (0); binder x; context f; declared arrow
  EXPECT_EQ(s.count(VarKind::schedule), 2u + 1u + 1u + 1u);
  ConstraintSystem n = generate(parse_document("new x. x := !x + 1"));
  // new: J, K; binders x_r, x_w; occurrence of x_w has one arrow; w, op's x and y
  EXPECT_EQ(n.count(VarKind::schedule), 2u + 2u + 1u + 1u);  // + x_w binder type copy
  EXPECT_EQ(n.count(VarKind::stage), 3u);
}

TEST(Generate, IncxDump) {
  ConstraintSystem s = generate(parse_document(slurp("samples/incx.pia")), {.pipeline = false});
  EXPECT_EQ(s.dump(),
            "(= (scale w) 0.125)\n"
            "(>= (phase w) 0)\n"
            "(nonzero-scale J2)\n"
            "(contractive x1)\n"
            "(contractive x2)\n"
            "(neq-id x1)\n"
            "(neq-id x2)\n"
            // lambda x_w: contraction of the single writer use, then the
            // binder type copy; lambda x_r; finally new's domain
            "(= J5 J3)\n"
            "(= J4 [(1, 0)])\n"
            "(= J6 (* J3 x1))\n"
            "(= J1 J6)\n"
            "(= J2 J4)\n"
            "(= w J5)\n");
}

}  // namespace
