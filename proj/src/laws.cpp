// SPDX-License-Identifier: Apache-2.0

#include "pia/laws.hpp"

#include <chrono>
#include <functional>
#include <random>

#include "pia/denote.hpp"
#include "pia/error.hpp"
#include "pia/gen.hpp"

namespace pia {

namespace {

using games::Arena;
using games::Strategy;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void fail(SuiteResult& r, const std::string& what) {
  if (r.failures++ == 0) r.note = what;
}

template <class T, class G>
std::vector<SuiteResult> laws_of(const std::string& inst, G gen, std::uint64_t seed, std::size_t cases) {
  using S = semiring_traits<T>;
  struct Law {
    std::string name;
    std::function<bool(const T&, const T&, const T&)> holds;
  };
  const std::vector<Law> laws = {
      {"+ associative", [](const T& a, const T& b, const T& c) { return S::add(S::add(a, b), c) == S::add(a, S::add(b, c)); }},
      {"× associative", [](const T& a, const T& b, const T& c) { return S::mul(S::mul(a, b), c) == S::mul(a, S::mul(b, c)); }},
      {"left distributive",
       [](const T& a, const T& b, const T& c) { return S::mul(a, S::add(b, c)) == S::add(S::mul(a, b), S::mul(a, c)); }},
      {"right distributive",
       [](const T& a, const T& b, const T& c) { return S::mul(S::add(a, b), c) == S::add(S::mul(a, c), S::mul(b, c)); }},
      {"+ commutative", [](const T& a, const T& b, const T&) { return S::add(a, b) == S::add(b, a); }},
      {"+ unit", [](const T& a, const T&, const T&) { return S::add(a, S::zero()) == a && S::add(S::zero(), a) == a; }},
      {"× unit", [](const T& a, const T&, const T&) { return S::mul(a, S::one()) == a && S::mul(S::one(), a) == a; }},
      {"zero annihilates",
       [](const T& a, const T&, const T&) { return S::mul(a, S::zero()) == S::zero() && S::mul(S::zero(), a) == S::zero(); }},
  };
  std::vector<SuiteResult> out;
  for (const auto& law : laws) {
    auto t0 = Clock::now();
    std::mt19937_64 rng(seed);
    SuiteResult r{inst + ": " + law.name};
    for (std::size_t i = 0; i < cases; ++i) {
      T a = gen(rng), b = gen(rng), c = gen(rng);
      ++r.cases;
      if (!law.holds(a, b, c)) fail(r, "case " + std::to_string(i));
    }
    r.seconds = since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

Schedule small_schedule(std::mt19937_64& rng) {
  Schedule j;
  int n = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int i = 0; i < n; ++i) j = j + Schedule{gen::random_stage(rng)};
  return j;
}

}  // namespace

std::vector<SuiteResult> semiring_laws(Instance inst, std::uint64_t seed, std::size_t cases) {
  switch (inst) {
    case Instance::nat: return laws_of<Nat>("nat", gen::random_nat, seed, cases);
    case Instance::zoi: return laws_of<ZeroOneInf>("zoi", gen::random_zoi, seed, cases);
    case Instance::schedule:
      return laws_of<Schedule>("schedule", [](std::mt19937_64& r) { return gen::random_schedule(r); }, seed, cases);
  }
  throw Error(ErrorKind::internal, "unknown semiring instance");
}

ArenaFamily small_arenas() {
  ArenaFamily f;
  const std::vector<Arena> bases = {games::com_arena(), games::exp_arena(0), games::exp_arena(1), games::exp_arena(2)};
  const std::vector<Stage> timings = {Stage::identity(), Stage::make(rat(1, 2), 0), Stage::make(rat(1, 2), rat(1, 2)),
                                      Stage::make(rat(1, 4), rat(1, 4))};
  for (std::size_t t = 0; t < timings.size(); ++t)
    for (const auto& b : bases) {
      f.arenas.push_back(games::stage_action(timings[t], b));
      f.timing.push_back(static_cast<int>(t));
    }
  // Function arenas: still one initial move, so they serve as codomains.
  for (const auto& [dom, cod] : std::vector<std::pair<Arena, Arena>>{
           {bases[1], bases[0]}, {bases[0], bases[0]}, {bases[1], bases[1]}, {bases[0], bases[2]}, {bases[2], bases[2]}}) {
    f.arenas.push_back(games::arrow(dom, cod));
    f.timing.push_back(0);
  }
  return f;
}

std::vector<SuiteResult> category_laws(std::uint64_t seed, std::size_t quadruples) {
  std::mt19937_64 rng(seed);
  ArenaFamily fam = small_arenas();
  // Arenas of at most 5 moves serve as the other ends of the morphisms.
  std::map<int, std::vector<std::size_t>> small;
  for (std::size_t i = 0; i < fam.arenas.size(); ++i)
    if (fam.arenas[i].size() <= 5) small[fam.timing[i]].push_back(i);
  auto pick = [&](int timing) -> const Arena& {
    const auto& v = small[timing];
    return fam.arenas[v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]];
  };
  auto one = [&](const Arena& a, const Arena& b) -> std::optional<Strategy> {
    auto s = games::sample_strategies(a, b, 1, rng);
    if (s.empty()) return std::nullopt;
    return s[0];
  };

  SuiteResult id{"identity"}, assoc{"associativity"}, func{"tensor functoriality"};
  auto t0 = Clock::now();
  for (std::size_t i = 0; i < fam.arenas.size(); ++i) {
    const Arena& a = fam.arenas[i];
    const Arena& b = pick(fam.timing[i]);
    for (const auto& s : games::sample_strategies(a, b, 3, rng)) {
      ++id.cases;
      if (!(games::compose(games::copycat(a), s) == s) || !(games::compose(s, games::copycat(b)) == s))
        fail(id, "arena " + std::to_string(i));
    }
    for (const auto& s : games::sample_strategies(b, a, 3, rng)) {
      ++id.cases;
      if (!(games::compose(games::copycat(b), s) == s) || !(games::compose(s, games::copycat(a)) == s))
        fail(id, "arena " + std::to_string(i) + " as codomain");
    }
  }
  id.seconds = since(t0);

  t0 = Clock::now();
  for (std::size_t i = 0; i < fam.arenas.size(); ++i) {
    const Arena& a = fam.arenas[i];
    const Arena& b = pick(fam.timing[i]);
    const Arena& c = pick(fam.timing[i]);
    const Arena& d = pick(fam.timing[i]);
    auto ss = games::sample_strategies(a, b, 2, rng);
    auto ts = games::sample_strategies(b, c, 2, rng);
    auto us = games::sample_strategies(c, d, 2, rng);
    for (const auto& s : ss)
      for (const auto& t : ts)
        for (const auto& u : us) {
          ++assoc.cases;
          if (!(games::compose(games::compose(s, t), u) == games::compose(s, games::compose(t, u))))
            fail(assoc, "arena " + std::to_string(i));
        }
  }
  assoc.seconds = since(t0);

  t0 = Clock::now();
  for (std::size_t tries = 0; func.cases < quadruples && tries < 4 * quadruples; ++tries) {
    int timing = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, small.size() - 1)(rng));
    const Arena &a = pick(timing), &b = pick(timing), &c = pick(timing);
    const Arena &d = pick(timing), &e = pick(timing), &f = pick(timing);
    auto s = one(a, b), s2 = one(b, c), t = one(d, e), t2 = one(e, f);
    if (!s || !s2 || !t || !t2) continue;
    ++func.cases;
    Strategy lhs = games::interleave(games::compose(*s, *s2), games::compose(*t, *t2));
    Strategy rhs = games::compose(games::interleave(*s, *t), games::interleave(*s2, *t2));
    if (!(lhs == rhs)) fail(func, "quadruple " + std::to_string(func.cases));
  }
  func.seconds = since(t0);
  id.note = id.note.empty() ? std::to_string(fam.arenas.size()) + " arenas" : id.note;
  return {id, assoc, func};
}

SuiteResult action_functoriality(std::uint64_t seed, std::size_t cases) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  ArenaFamily fam = small_arenas();
  SuiteResult r{"schedule action functoriality"};
  for (std::size_t i = 0; i < cases; ++i) {
    Schedule j = small_schedule(rng), k = small_schedule(rng);
    const Arena& a = fam.arenas[std::uniform_int_distribution<std::size_t>(0, fam.arenas.size() - 1)(rng)];
    Schedule jk = j * k;
    Arena lhs = games::schedule_action(jk, a), rhs = games::schedule_action(j, games::schedule_action(k, a));
    std::string why;
    ++r.cases;
    if (!games::is_isomorphism(lhs, rhs, games::action_iso(j, k, a, lhs, rhs), &why))
      fail(r, "J=" + j.str() + " K=" + k.str() + ": " + why);
  }
  r.seconds = since(t0);
  return r;
}

SuiteResult oracle_agreement(std::uint64_t seed, std::size_t systems, const SolverConfig& cfg) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  auto below = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto grid_stage = [&] {
    int s = below(9);
    int p = below(9 - s);
    return Stage::make(rat(s, 8), rat(p, 8));
  };
  SuiteResult r{"oracle agreement"};
  std::size_t grid_models = 0, irrational = 0;
  for (std::size_t round = 0; round < systems; ++round) {
    int n = 1 + below(4);
    StageProblem p;
    for (int i = 0; i < n; ++i) p.names.push_back("u" + std::to_string(i));
    int atoms = 1 + below(4);
    for (int k = 0; k < atoms; ++k) {
      int a = below(n), b = below(n);
      switch (below(5)) {
        case 0: p.atoms.push_back({StageAtom::Kind::eq, {a, b}, {grid_stage()}}); break;
        case 1: p.atoms.push_back({StageAtom::Kind::strict_fifo, {a}, {b}}); break;
        case 2: p.atoms.push_back({StageAtom::Kind::before, {a}, {grid_stage()}}); break;
        case 3: p.atoms.push_back({StageAtom::Kind::em_leq, {b}, {a, grid_stage()}}); break;
        default: p.atoms.push_back({StageAtom::Kind::not_identity, {a}, {}}); break;
      }
    }
    ++r.cases;
    auto grid = brute_oracle(p, rat(1, 8));
    SolverResult res = run_solver(emit_stages(p).text(), cfg);
    if (grid) {
      ++grid_models;
      if (!holds(p, *grid)) fail(r, "grid model fails, system " + std::to_string(round));
      if (res.status != SolverResult::Status::sat)
        fail(r, "system " + std::to_string(round) + ": grid model but solver " + to_string(res.status));
    }
    if (res.status != SolverResult::Status::sat) continue;
    try {
      if (!holds(p, read_stages(p, res))) fail(r, "solver model fails, system " + std::to_string(round));
    } catch (const Error&) {
      ++irrational;  // algebraic model values are not checked exactly
    }
  }
  if (r.failures == 0)
    r.note = std::to_string(grid_models) + " with grid models, " + std::to_string(irrational) + " irrational solver models";
  r.seconds = since(t0);
  return r;
}

std::vector<std::string> coherence_terms() {
  return {
      "declare x : exp\nx + x\n",
      "declare x : exp\n(x + x) + x\n",
      "declare x : exp\nx + (x + x)\n",
      "declare c : com\nc ; c\n",
      "declare c : com\nc || c\n",
      "declare x : exp\nif x then x else 1\n",
      "declare x : exp\n(\\y. y + y) x\n",
      "\\x. x + x\n",
      "declare x : exp\ndeclare y : exp\n(x + y) + (x + y)\n",
      "declare f : [(0.5, 0.25)]·exp -> exp\ndeclare x : exp\nf x + f x\n",
      "new x. x := !x + !x\n",
      "declare c : com\n(c ; c) ; c\n",
      "declare x : exp\nx + (x + 1)\n",
  };
}

SuiteResult coherence(const std::vector<std::string>& sources, const SolveConfig& cfg, unsigned max_int) {
  auto t0 = Clock::now();
  SuiteResult r{"coherence"};
  std::size_t trees = 0;
  for (const auto& src : sources) {
    std::string head = src.substr(src.rfind('\n', src.size() - 2) + 1);
    head.pop_back();
    try {
      auto inferred = infer_end_to_end(parse_document(src), cfg);
      auto chk = check_judgment(inferred.judgment);
      if (!chk.accepted) {
        ++r.cases;
        fail(r, head + ": " + chk.reason);
        continue;
      }
      auto variants = derivation_variants(*chk.derivation);
      if (variants.empty()) continue;  // one derivation tree only
      ++r.cases;
      trees += variants.size() + 1;
      Strategy s = denote(*chk.derivation, max_int);
      for (const auto& v : variants)
        if (!(denote(v, max_int) == s)) {
          fail(r, head + ": variant differs");
          break;
        }
    } catch (const Error& e) {
      ++r.cases;
      fail(r, head + ": " + e.what());
    }
  }
  if (r.failures == 0) r.note = std::to_string(trees) + " derivation trees";
  r.seconds = since(t0);
  return r;
}

SuiteResult soundness(std::uint64_t seed, std::size_t terms, int depth, const SolveConfig& cfg) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  gen::TermGen g(rng);
  SuiteResult r{"soundness"};
  for (std::size_t i = 0; i < terms; ++i) {
    Document d;
    d.term = g.term(g.random_type(1), depth);
    ++r.cases;
    try {
      auto res = infer_end_to_end(d, cfg);
      if (!res.verification.exact) fail(r, pretty(d.term) + ": model not exact");
      auto chk = check_judgment(res.judgment);
      if (!chk.accepted) fail(r, pretty(d.term) + ": " + chk.reason);
    } catch (const Error& e) {
      fail(r, pretty(d.term) + ": " + e.what());
    }
  }
  r.seconds = since(t0);
  return r;
}

}  // namespace pia
