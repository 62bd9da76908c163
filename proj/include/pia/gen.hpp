// SPDX-License-Identifier: Apache-2.0
//
// Random generators for the property suites.

#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pia/semiring.hpp"
#include "pia/simple_types.hpp"
#include "pia/syntax.hpp"

namespace pia::gen {

/// Contractive stage on the grid with denominators <= 64.
inline Stage random_stage(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> den_d(1, 64);
  long d = den_d(rng);
  long s = std::uniform_int_distribution<long>(0, d)(rng);
  long p = std::uniform_int_distribution<long>(0, d - s)(rng);
  return Stage::make(rat(s, d), rat(p, d));
}

inline Schedule random_schedule(std::mt19937_64& rng, int max_stages = 4) {
  Schedule j;
  int n = std::uniform_int_distribution<int>(0, max_stages)(rng);
  for (int i = 0; i < n; ++i) j.insert(random_stage(rng));
  return j;
}

inline Nat random_nat(std::mt19937_64& rng) {
  return Nat{std::uniform_int_distribution<std::uint64_t>(0, 1000)(rng)};
}

inline ZeroOneInf random_zoi(std::mt19937_64& rng) {
  return static_cast<ZeroOneInf>(std::uniform_int_distribution<int>(0, 2)(rng));
}

/// Closed, store-free, well-simple-typed terms of depth at most `depth`.
class TermGen {
 public:
  explicit TermGen(std::mt19937_64& rng) : rng_(rng) {}

  SimpleType random_type(int depth = 2) {
    int k = pick(depth > 0 ? 4 : 2);
    if (k == 0) return SimpleType::com();
    if (k == 1) return SimpleType::exp();
    return SimpleType::arrow(random_type(depth - 1), random_type(depth - 1));
  }

  Term term(const SimpleType& t, int depth) { return go(t, depth, {}); }

 private:
  using Env = std::vector<std::pair<std::string, SimpleType>>;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Term go(const SimpleType& t, int depth, const Env& env) {
    // Variables of the right type, or functions returning it.
    std::vector<std::size_t> heads;
    for (std::size_t i = 0; i < env.size(); ++i) {
      SimpleType s = env[i].second;
      int args = 0;
      while (!(s == t) && s.is_arrow()) {
        s = s.cod();
        ++args;
      }
      if (s == t && args <= depth) heads.push_back(i);
    }
    if (t.is_arrow()) {
      if (depth > 0 && (heads.empty() || pick(3))) {
        std::string x = "v" + std::to_string(++fresh_);
        Env inner = env;
        inner.emplace_back(x, t.dom());
        return Term::lambda(x, go(t.cod(), depth - 1, inner));
      }
      if (heads.empty()) return eta(t);
    }
    if (!heads.empty() && (depth == 0 || pick(2) == 0)) {
      const auto& [name, ty] = env[heads[static_cast<std::size_t>(pick(static_cast<int>(heads.size())))]];
      Term out = Term::var(name);
      SimpleType s = ty;
      while (!(s == t)) {
        out = Term::app(out, go(s.dom(), std::max(0, depth - 1), env));
        s = s.cod();
      }
      return out;
    }
    if (t.is_arrow()) return eta(t);
    const bool com = t.kind() == SimpleType::Kind::com;
    if (depth == 0) return Term::constant(com ? ConstId::skip : ConstId::one);
    switch (pick(5)) {
      case 0: return Term::constant(com ? ConstId::skip : ConstId::one);
      case 1: {
        if (!com) return Term::app(Term::constant(ConstId::op), go(t, depth - 1, env), go(t, depth - 1, env));
        ConstId c = pick(2) ? ConstId::seq : ConstId::par;
        return Term::app(Term::constant(c), go(t, depth - 1, env), go(t, depth - 1, env));
      }
      case 2:
        return Term::app(Term::app(Term::constant(ConstId::if_), go(SimpleType::exp(), depth - 1, env)),
                         go(t, depth - 1, env), go(t, depth - 1, env));
      case 3: {
        // A beta-redex with a base-typed argument.
        SimpleType a = pick(2) ? SimpleType::com() : SimpleType::exp();
        std::string x = "v" + std::to_string(++fresh_);
        Env inner = env;
        inner.emplace_back(x, a);
        return Term::app(Term::lambda(x, go(t, depth - 1, inner)), go(a, depth - 1, env));
      }
      default: return go(t, 0, env);
    }
  }

  /// Minimal closed inhabitant of an arrow type.
  Term eta(const SimpleType& t) {
    if (!t.is_arrow()) return Term::constant(t.kind() == SimpleType::Kind::com ? ConstId::skip : ConstId::one);
    return Term::lambda("v" + std::to_string(++fresh_), eta(t.cod()));
  }

  std::mt19937_64& rng_;
  int fresh_ = 0;
};

}  // namespace pia::gen
