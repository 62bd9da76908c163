// SPDX-License-Identifier: Apache-2.0

#include "pia/games.hpp"

#include <gtest/gtest.h>

#include "pia/error.hpp"

namespace pia::games {
namespace {

Stage st(long sn, long sd, long pn, long pd) { return Stage::make(rat(sn, sd), rat(pn, pd)); }

std::vector<std::string> play_keys(const Arena& a, const Play& p) {
  std::vector<std::string> out;
  for (int m : p) out.push_back(a.move(m).key());
  return out;
}

TEST(Games, ExpArena) {
  Arena e = exp_arena(2);
  e.validate();
  ASSERT_EQ(e.size(), 6u);
  EXPECT_EQ(e.move(*e.find(":~q")).time, 0);
  EXPECT_EQ(e.move(*e.find(":2")).time, 1);
  EXPECT_EQ(e.alt(*e.find(":q")), e.alt(*e.find(":~q")));
  EXPECT_EQ(e.alt(*e.find(":0")), e.alt(*e.find(":~a")));
  EXPECT_TRUE(e.precedes(*e.find(":q"), *e.find(":1")));
  EXPECT_EQ(legal_plays(e).size(), 4u);
  Arena c = com_arena();
  EXPECT_EQ(c.size(), 4u);
  EXPECT_EQ(legal_plays(c).size(), 2u);
}

TEST(Games, PlayConditions) {
  Arena e = exp_arena(1);
  auto k = [&](const char* key) { return *e.find(key); };
  std::string why;
  EXPECT_TRUE(is_play(e, {k(":q"), k(":1")}, &why)) << why;
  EXPECT_FALSE(is_play(e, {k(":q")}, &why));
  EXPECT_FALSE(is_play(e, {k(":1"), k(":q")}, &why));
  EXPECT_FALSE(is_play(e, {k(":~q"), k(":0")}, &why));
}

TEST(Games, ScheduleActions) {
  EXPECT_EQ(schedule_action(Schedule::zero(), exp_arena(1)).size(), 0u);
  Arena a = com_arena(), one = schedule_action(Schedule::one(), a);
  std::vector<int> map;
  for (const auto& m : one.moves()) map.push_back(*a.find(":" + m.id));
  std::string why;
  EXPECT_TRUE(is_isomorphism(one, a, map, &why)) << why;
  Arena two = schedule_action(Schedule{st(1, 2, 1, 10), st(1, 2, 2, 10)}, exp_arena(1));
  two.validate();
  std::vector<Rational> initial;
  for (std::size_t m = 0; m < two.size(); ++m)
    if (two.initial(static_cast<int>(m)) && !two.move(static_cast<int>(m)).dummy)
      initial.push_back(two.move(static_cast<int>(m)).time);
  EXPECT_EQ(initial, (std::vector<Rational>{rat(1, 10), rat(2, 10)}));
  EXPECT_EQ(two.move(*two.find("c1.0:1")).time, rat(7, 10));
}

TEST(Games, CausalityIsChecked) {
  Arena late = stage_action(st(1, 2, 1, 2), exp_arena(1));
  Arena early = stage_action(st(1, 2, 0, 1), exp_arena(1));
  EXPECT_NO_THROW(arrow(early, exp_arena(1)));
  try {
    arrow(late, early);
    FAIL() << "expected a causality error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::type);
  }
  arrow(early, exp_arena(1)).validate();
}

TEST(Games, CopycatIsAStrategy) {
  for (const Arena& a : {exp_arena(1), com_arena(), arrow(exp_arena(0), com_arena())}) {
    Strategy cc = copycat(a);
    EXPECT_FALSE(cc.plays.empty());
    std::string why;
    EXPECT_TRUE(every_play_legal(cc, &why)) << why;
    EXPECT_TRUE(responsive(cc, &why)) << why;
    EXPECT_TRUE(saturated(cc, &why)) << why;
    EXPECT_TRUE(deadlock_free(cc, &why)) << why;
  }
  EXPECT_EQ(copycat(exp_arena(1)).plays.size(), 3u);
  // Several initial moves give every argument initial two enablers.
  EXPECT_TRUE(copycat(schedule_action(Schedule{st(1, 2, 0, 1), st(1, 2, 0, 1)}, com_arena())).plays.empty());
}

TEST(Games, IdentityLaw) {
  std::mt19937_64 rng(7);
  Arena a = exp_arena(1), b = com_arena();
  auto sigmas = sample_strategies(a, b, 8, rng);
  ASSERT_FALSE(sigmas.empty());
  for (const auto& s : sigmas) {
    EXPECT_TRUE(compose(copycat(a), s) == s) << dump(s);
    EXPECT_TRUE(compose(s, copycat(b)) == s) << dump(s);
  }
}

TEST(Games, AssociativityAndFunctoriality) {
  std::mt19937_64 rng(11);
  Arena a = exp_arena(1), b = exp_arena(1), c = com_arena();
  auto ab = sample_strategies(a, b, 4, rng);
  auto bc = sample_strategies(b, c, 4, rng);
  auto cc = sample_strategies(c, c, 4, rng);
  ASSERT_FALSE(ab.empty());
  ASSERT_FALSE(bc.empty());
  ASSERT_FALSE(cc.empty());
  for (const auto& s : ab)
    for (const auto& t : bc) {
      Strategy st = compose(s, t);
      std::string why;
      EXPECT_TRUE(every_play_legal(st, &why)) << why;
      EXPECT_TRUE(deadlock_free(st, &why)) << why;
      for (const auto& u : cc) EXPECT_TRUE(compose(st, u) == compose(s, compose(t, u)));
    }
  const auto& s = ab[0];
  const auto& s2 = bc[0];
  const auto& t = cc[0];
  const auto& t2 = cc.back();
  EXPECT_TRUE(interleave(compose(s, s2), compose(t, t2)) == compose(interleave(s, t), interleave(s2, t2)));
}

TEST(Games, ActionIsomorphism) {
  Schedule j{st(1, 2, 0, 1), st(1, 2, 1, 2)}, k{st(1, 2, 1, 4), st(1, 4, 0, 1)};
  Arena a = com_arena();
  Arena lhs = schedule_action(j * k, a), rhs = schedule_action(j, schedule_action(k, a));
  std::string why;
  EXPECT_TRUE(is_isomorphism(lhs, rhs, action_iso(j, k, a, lhs, rhs), &why)) << why;
  Schedule rep{st(1, 2, 0, 1), st(1, 2, 0, 1)};
  lhs = schedule_action(rep * rep, a);
  rhs = schedule_action(rep, schedule_action(rep, a));
  EXPECT_TRUE(is_isomorphism(lhs, rhs, action_iso(rep, rep, a, lhs, rhs), &why)) << why;
}

TEST(Games, SumIsomorphismIsAssociative) {
  Arena a = exp_arena(0);
  Schedule j{st(1, 2, 0, 1)}, k{st(1, 2, 0, 1), st(1, 4, 1, 2)}, l{st(1, 4, 1, 2)};
  auto side = [&](const Schedule& s) { return schedule_action(s, a); };
  // Both bracketings of the flat tensor, mapped into (J+K+L)·A by keys.
  Arena flat = tensor({{"0", side(j)}, {"1", side(k)}, {"2", side(l)}});
  Arena total = side(j + k + l);
  auto route = [&](bool left_first) {
    std::map<std::string, std::string> out;
    Arena jk = tensor({{"0", side(j)}, {"1", side(k)}}), kl = tensor({{"0", side(k)}, {"1", side(l)}});
    auto inner = left_first ? sum_iso(j, k, a, jk, side(j + k)) : sum_iso(k, l, a, kl, side(k + l));
    Arena outer_t = left_first ? tensor({{"0", side(j + k)}, {"1", side(l)}}) : tensor({{"0", side(j)}, {"1", side(k + l)}});
    auto outer = left_first ? sum_iso(j + k, l, a, outer_t, total) : sum_iso(j, k + l, a, outer_t, total);
    for (const auto& mv : flat.moves()) {
      const std::string& top = mv.path[0];
      std::vector<std::string> rest(mv.path.begin() + 1, mv.path.end());
      bool in_inner = left_first ? top != "2" : top != "0";
      std::vector<std::string> path;
      if (in_inner) {
        std::string label = left_first ? top : (top == "1" ? "0" : "1");
        Move m = mv;
        m.path = rest;
        m.path.insert(m.path.begin(), label);
        const Arena& src = left_first ? jk : kl;
        const Arena& dst = left_first ? side(j + k) : side(k + l);
        Move mid = dst.move(inner[static_cast<std::size_t>(*src.find(m.key()))]);
        path = mid.path;
        path.insert(path.begin(), left_first ? "0" : "1");
      } else {
        path = rest;
        path.insert(path.begin(), left_first ? "1" : "0");
      }
      Move m = mv;
      m.path = path;
      out[mv.key()] = total.move(outer[static_cast<std::size_t>(*outer_t.find(m.key()))]).key();
    }
    return out;
  };
  EXPECT_EQ(route(true), route(false));
  std::string why;
  Arena jk = tensor({{"0", side(j)}, {"1", side(k)}});
  EXPECT_TRUE(is_isomorphism(jk, side(j + k), sum_iso(j, k, a, jk, side(j + k)), &why)) << why;
}

TEST(Games, SaturateAddsSwaps) {
  Strategy cc = copycat(com_arena());
  Strategy sat = saturate(cc);
  EXPECT_TRUE(sat == cc);
  Arena c = com_arena();
  std::string text = dump(copycat(c));
  EXPECT_NE(text.find("r:q@0 a:q@0 a:done@1 r:done@1"), std::string::npos) << text;
  (void)play_keys;
}

}  // namespace
}  // namespace pia::games
