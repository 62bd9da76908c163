// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "pia/gen.hpp"
#include "pia/error.hpp"
#include "pia/semiring.hpp"

using namespace pia;

namespace {

Stage st(const char* s, const char* p) { return Stage::make(*parse_rational(s), *parse_rational(p)); }

TEST(Stage, Compose) {
  EXPECT_EQ(Stage::identity().compose(st("0.5", "0.1")), st("0.5", "0.1"));
  EXPECT_EQ(st("0.5", "0.25").compose(st("0.5", "0.1")), st("0.25", "0.3"));
  EXPECT_EQ(st("0.5", "0.25").compose(st("0.5", "0.2")), st("0.25", "0.35"));
}

TEST(Stage, Interval) {
  EXPECT_EQ(Stage::identity().interval(), std::make_pair(Rational(0), Rational(1)));
  auto [a, b] = st("0.5", "0.1").interval();
  EXPECT_EQ(a, rat(1, 10));
  EXPECT_EQ(b, rat(6, 10));
  auto [c, d] = st("0.5", "0.2").interval();
  EXPECT_EQ(c, rat(2, 10));
  EXPECT_EQ(d, rat(7, 10));
}

TEST(Stage, RejectsNonContractive) {
  EXPECT_THROW(Stage::make(rat(3, 4), rat(1, 2)), Error);
  EXPECT_THROW(Stage::make(rat(2), rat(0)), Error);
  EXPECT_THROW(Stage::make(rat(1, 2), rat(-1, 4)), Error);
}

TEST(Stage, Orders) {
  auto o = stage_orders(st("0.5", "0.1"), st("0.5", "0.2"));
  EXPECT_TRUE(o.egli_milner_leq);
  EXPECT_TRUE(o.strict_fifo);
  EXPECT_FALSE(o.disjoint);
  EXPECT_FALSE(o.strictly_before);
  auto same = stage_orders(st("0.5", "0.1"), st("0.5", "0.1"));
  EXPECT_TRUE(same.egli_milner_leq);
  EXPECT_FALSE(same.strict_fifo);
  EXPECT_TRUE(same.subset);
  auto apart = stage_orders(st("0.4", "0"), st("0.4", "0.5"));
  EXPECT_TRUE(apart.strictly_before);
  EXPECT_TRUE(apart.disjoint);
  EXPECT_FALSE(stage_orders(st("0.4", "0.5"), st("0.4", "0")).strictly_before);
  // touching intervals share a point
  EXPECT_FALSE(stage_orders(st("0.5", "0"), st("0.5", "0.5")).disjoint);
  EXPECT_TRUE(stage_orders(st("0.2", "0.3"), Stage::identity()).subset);
}

TEST(Schedule, Ops) {
  Stage x = st("0.5", "0.25"), y = st("0.5", "0.1"), z = st("0.5", "0.2");
  EXPECT_EQ(Schedule{x} * Schedule({y, z}), Schedule({x.compose(y), x.compose(z)}));
  Schedule j({y, z});
  EXPECT_EQ(Schedule::one() * j, j);
  EXPECT_EQ(j * Schedule::one(), j);
  EXPECT_EQ((j + j).multiplicity(y), 2u);
  EXPECT_EQ(j.str(), "[(0.5, 0.1);(0.5, 0.2)]");
}

TEST(Schedule, Size) {
  EXPECT_EQ(schedule_size(Schedule({st("0.5", "0.1"), st("0.5", "0.2")})), 2u);
  EXPECT_EQ(schedule_size(Schedule::zero()), 0u);
  EXPECT_EQ(schedule_size(Schedule::one()), 1u);
}

TEST(Schedule, Pipeline) {
  EXPECT_TRUE(is_pipeline(Schedule({st("0.5", "0.1"), st("0.5", "0.2")})));
  EXPECT_FALSE(is_pipeline(Schedule({st("0.5", "0.1"), st("0.5", "0.1")})));
  EXPECT_TRUE(is_pipeline(Schedule(
      {st("0.5", "0.125"), st("0.5", "0.25"), st("0.5", "0.375"), st("0.5", "0.4375")})));
  EXPECT_FALSE(is_pipeline(Schedule({st("0.5", "0.1"), st("0.2", "0.2")})));  // nested
  EXPECT_TRUE(is_pipeline(Schedule::zero()));
}

TEST(Element, Instances) {
  EXPECT_EQ(std::get<Nat>(sr_add(Instance::nat, Nat{2}, Nat{3})).value, 5u);
  EXPECT_EQ(std::get<Nat>(sr_mul(Instance::nat, Nat{2}, Nat{3})).value, 6u);
  EXPECT_EQ(std::get<ZeroOneInf>(sr_add(Instance::zoi, ZeroOneInf::one, ZeroOneInf::one)),
            ZeroOneInf::inf);
  EXPECT_EQ(std::get<ZeroOneInf>(sr_mul(Instance::zoi, ZeroOneInf::zero, ZeroOneInf::inf)),
            ZeroOneInf::zero);
  try {
    sr_add(Instance::nat, Nat{1}, Schedule::one());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mismatch);
  }
}

// --- laws -------------------------------------------------------------------

template <class T, class G>
void check_laws(G gen, int cases, bool commutative_mul) {
  using S = semiring_traits<T>;
  std::mt19937_64 rng(20261016);
  for (int i = 0; i < cases; ++i) {
    T a = gen(rng), b = gen(rng), c = gen(rng);
    ASSERT_TRUE(S::add(S::add(a, b), c) == S::add(a, S::add(b, c)));
    ASSERT_TRUE(S::mul(S::mul(a, b), c) == S::mul(a, S::mul(b, c)));
    ASSERT_TRUE(S::mul(a, S::add(b, c)) == S::add(S::mul(a, b), S::mul(a, c)));
    ASSERT_TRUE(S::mul(S::add(a, b), c) == S::add(S::mul(a, c), S::mul(b, c)));
    ASSERT_TRUE(S::add(a, b) == S::add(b, a));
    ASSERT_TRUE(S::add(a, S::zero()) == a);
    ASSERT_TRUE(S::mul(a, S::zero()) == S::zero());
    ASSERT_TRUE(S::mul(S::zero(), a) == S::zero());
    ASSERT_TRUE(S::mul(a, S::one()) == a);
    ASSERT_TRUE(S::mul(S::one(), a) == a);
    if (commutative_mul) ASSERT_TRUE(S::mul(a, b) == S::mul(b, a));
  }
}

TEST(Laws, Nat) { check_laws<Nat>(gen::random_nat, 1000, true); }
TEST(Laws, ZeroOneInf) { check_laws<ZeroOneInf>(gen::random_zoi, 1000, true); }
TEST(Laws, Schedule) {
  check_laws<Schedule>([](std::mt19937_64& r) { return gen::random_schedule(r); }, 1000, false);
}

TEST(Laws, ScheduleMulNotCommutative) {
  Schedule a{st("0.5", "0.25")}, b{st("0.5", "0.1")};
  EXPECT_NE(a * b, b * a);
}

TEST(Laws, StageComposition) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    Stage x = gen::random_stage(rng), y = gen::random_stage(rng), z = gen::random_stage(rng);
    EXPECT_EQ(x.compose(y).compose(z), x.compose(y.compose(z)));
    Stage xy = x.compose(y);
    EXPECT_TRUE(Stage::is_contractive(xy.scale(), xy.phase()));
    EXPECT_TRUE(stage_orders(xy, x).subset);
  }
}

TEST(Laws, SizeHomomorphism) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    Schedule j = gen::random_schedule(rng), k = gen::random_schedule(rng);
    EXPECT_EQ(schedule_size(j + k), schedule_size(j) + schedule_size(k));
    EXPECT_EQ(schedule_size(j * k), schedule_size(j) * schedule_size(k));
  }
}

TEST(Laws, PipelineMatchesPairwise) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    Schedule j = gen::random_schedule(rng);
    auto xs = j.stages();
    bool expect = true;
    for (std::size_t a = 0; a < xs.size(); ++a)
      for (std::size_t b = 0; b < xs.size(); ++b)
        if (a != b && !(strict_fifo(xs[a], xs[b]) || strict_fifo(xs[b], xs[a]))) expect = false;
    EXPECT_EQ(is_pipeline(j), expect);
  }
}

}  // namespace
