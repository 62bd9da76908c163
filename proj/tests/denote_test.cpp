// SPDX-License-Identifier: Apache-2.0

#include "pia/denote.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pia/pipeline.hpp"

namespace pia {
namespace {

using games::Strategy;

bool have_z3() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

Stage st(long sn, long sd, long pn, long pd) { return Stage::make(rat(sn, sd), rat(pn, pd)); }

Annot one_stage(const Stage& x) { return Annot::concrete(Schedule{x}); }

Strategy denote_source(const std::string& src, unsigned max_int = 2) { return denote(parse_document(src), max_int); }

void expect_strategy(const Strategy& s) {
  std::string why;
  EXPECT_TRUE(games::every_play_legal(s, &why)) << why;
  EXPECT_TRUE(games::responsive(s, &why)) << why;
  EXPECT_TRUE(games::saturated(s, &why)) << why;
  EXPECT_TRUE(games::deadlock_free(s, &why)) << why;
}

TEST(Denote, Skip) {
  Strategy s = denote_source("skip\n");
  EXPECT_EQ(games::dump(s), "r:q@0 r:done@1\nr:~q@0 r:~a@1\n");
  expect_strategy(s);
}

TEST(Denote, SeqPlaysNoSpontaneousDummies) {
  Type com = Type::com();
  Stage x = st(1, 2, 0, 1), y = st(1, 2, 1, 2);
  Strategy s = constant_strategy(ConstId::seq, Type::arrow(one_stage(x), com, Type::arrow(one_stage(y), com, com)), 2);
  expect_strategy(s);
  int actual = 0;
  for (const auto& p : s.plays) {
    if (s.arena.move(p[0]).dummy) continue;
    ++actual;
    for (int m : p) {
      const auto& mv = s.arena.move(m);
      EXPECT_FALSE(mv.player == games::Player::P && mv.dummy) << games::dump(s);
    }
  }
  EXPECT_EQ(actual, 1);
}

TEST(Denote, OpAddsAndClamps) {
  const char* src = "op{[(0.5, 0)];[(0.5, 0.5)]} 1 1\n";
  EXPECT_EQ(games::dump(denote_source(src, 2)), "r:q@0 r:2@1\nr:~q@0 r:~a@1\n");
  EXPECT_EQ(games::dump(denote_source(src, 1)), "r:q@0 r:1@1\nr:~q@0 r:~a@1\n");
}

TEST(Denote, IdentityIsCopycat) {
  Strategy s = denote_source("declare x : [(1, 0)]·exp\nx\n");
  Strategy cc = games::relabel(games::copycat(games::exp_arena(2)), [](const std::vector<std::string>& p) {
    if (p[0] != "a") return p;
    std::vector<std::string> q{"a", "x", "c0.0"};
    q.insert(q.end(), p.begin() + 1, p.end());
    return q;
  });
  EXPECT_TRUE(s == cc) << games::dump(s);
}

TEST(Denote, WeakeningPlaysDummies) {
  Strategy s = denote_source("declare x : [(0.5, 0)]·exp\nskip\n");
  expect_strategy(s);
  EXPECT_EQ(s.plays.size(), 2u);
  for (const auto& p : s.plays)
    for (int m : p)
      if (s.arena.move(m).path[0] == "a") EXPECT_TRUE(s.arena.move(m).dummy);
  s = denote_source("\\x : [(0.5, 0.25)]·com . skip\n");
  EXPECT_EQ(s.plays.size(), 2u) << games::dump(s);
}

TEST(Denote, ContractionUsesBothCopies) {
  const char* src =
      "declare x : [(0.5, 0.25);(0.5, 0.5)]·exp\n"
      "op{[(0.5, 0.25)];[(0.5, 0.5)]} x x\n";
  Strategy s = denote_source(src);
  expect_strategy(s);
  // Nine answer pairs plus the dummy play.
  EXPECT_EQ(s.plays.size(), 10u);
  EXPECT_NE(games::dump(s).find("a/x/c0.0:q@0.25 a/x/c1.0:q@0.5 a/x/c0.0:1@0.75 a/x/c1.0:1@1 r:2@1"),
            std::string::npos);
}

TEST(Denote, HigherOrderApplication) {
  const char* src =
      "declare f : [(1, 0)]·([(0.5, 0.25)]·exp -> exp)\n"
      "f 1\n";
  Strategy s = denote_source(src);
  expect_strategy(s);
  // f may answer anything once it has asked its argument, which is 1.
  for (const auto& p : s.plays)
    for (int m : p) {
      const auto& mv = s.arena.move(m);
      if (mv.path.size() == 5 && mv.path[3] == "a" && !mv.question && !mv.dummy) EXPECT_EQ(mv.id, "1");
    }
}

TEST(Denote, CoherenceOfContractionOrders) {
  const char* src =
      "declare x : [(0.125, 0.125);(0.125, 0.25);(0.5, 0.5)]·exp\n"
      "op{[(0.5, 0)];[(0.5, 0.5)]} (op{[(0.25, 0.25)];[(0.25, 0.5)]} x x) x\n";
  auto chk = check_source(src);
  ASSERT_TRUE(chk.accepted) << chk.reason << ": " << chk.detail;
  Strategy s = denote(*chk.derivation);
  auto variants = derivation_variants(*chk.derivation);
  EXPECT_GE(variants.size(), 3u);
  for (const auto& v : variants) EXPECT_TRUE(denote(v) == s) << v.str();
}

TEST(Denote, NewIsHistorySensitive) {
  Stage w = st(1, 8, 0, 1);
  Type exp = Type::exp(), com = Type::com();
  Type acc = Type::arrow(one_stage(w), exp, com);
  Schedule j{st(1, 4, 1, 2)}, k{st(1, 4, 0, 1)};
  Type body = Type::arrow(Annot::concrete(j), exp, Type::arrow(Annot::concrete(k), acc, com));
  Strategy s = constant_strategy(ConstId::new_, Type::arrow(Annot::concrete(Schedule::one()), body, com), 2);
  std::string why;
  EXPECT_TRUE(games::every_play_legal(s, &why)) << why;
  EXPECT_TRUE(games::saturated(s, &why)) << why;
  // The write ends before the read starts, so an actual read returns the
  // value written, or 0 when the write was a dummy.
  const std::string read = "r/a/c0.0/a/c0.0", value = "r/a/c0.0/r/a/c0.0/a/c0.0";
  int checked = 0;
  for (const auto& p : s.plays) {
    std::string written = "0", got;
    for (int m : p) {
      const auto& mv = s.arena.move(m);
      std::string path;
      for (std::size_t i = 0; i < mv.path.size(); ++i) path += (i ? "/" : "") + mv.path[i];
      if (mv.question || mv.dummy) continue;
      if (path == value) written = mv.id;
      if (path == read) got = mv.id;
    }
    if (got.empty()) continue;
    EXPECT_EQ(got, written);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

std::string read_sample(const std::string& name) {
  std::ifstream in(std::string(PIA_SOURCE_DIR) + "/samples/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Denote, IncrementWritesReadPlusOne) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  SolveConfig c;
  c.pipeline = true;
  c.sequential = true;
  auto r = infer_end_to_end(parse_document(read_sample("incx.pia")), c);
  auto chk = check_judgment(r.judgment);
  ASSERT_TRUE(chk.accepted);
  Strategy s = denote(*chk.derivation);
  EXPECT_EQ(games::dump(s), "r:q@0 r:done@1\nr:~q@0 r:~a@1\n");
  Strategy t = denote_trace(*chk.derivation);
  int actual = 0;
  for (const auto& p : t.plays) {
    std::string read, written;
    for (int m : p) {
      const auto& mv = t.arena.move(m);
      if (mv.question || mv.dummy) continue;
      if (mv.key().rfind("r/a/c0.0/a/", 0) == 0) read = mv.id;
      if (mv.key().rfind("r/a/c0.0/r/a/", 0) == 0 && mv.path.size() == 8) written = mv.id;
    }
    if (read.empty()) continue;
    ++actual;
    EXPECT_EQ(read, "0");
    EXPECT_EQ(written, "1");
  }
  EXPECT_EQ(actual, 1);
}

TEST(Denote, ReadAfterWriteReturnsWrittenValue) {
  if (!have_z3()) GTEST_SKIP() << "z3 not on PATH";
  SolveConfig c;
  c.pipeline = true;
  c.sequential = true;
  auto r = infer_end_to_end(parse_document("new x. x := 1 ; x := !x + 1\n"), c);
  auto chk = check_judgment(r.judgment);
  ASSERT_TRUE(chk.accepted);
  Strategy t = denote_trace(*chk.derivation);
  int actual = 0;
  for (const auto& p : t.plays) {
    std::vector<std::string> events;
    for (int m : p) {
      const auto& mv = t.arena.move(m);
      if (mv.question || mv.dummy) continue;
      if (mv.key().rfind("r/a/c0.0/a/", 0) == 0) events.push_back("read " + mv.id);
      if (mv.key().rfind("r/a/c0.0/r/a/", 0) == 0 && mv.path.size() == 8) events.push_back("write " + mv.id);
    }
    if (events.empty()) continue;
    ++actual;
    EXPECT_EQ(events, (std::vector<std::string>{"write 1", "read 1", "write 2"}));
  }
  EXPECT_EQ(actual, 1);
}

}  // namespace
}  // namespace pia
