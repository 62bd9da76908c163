// SPDX-License-Identifier: Apache-2.0
//
// Randomized property suites shared by the CLI and the acceptance binary.
// Each suite counts cases and failures instead of stopping at the first one.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pia/games.hpp"
#include "pia/pipeline.hpp"
#include "pia/semiring.hpp"

namespace pia {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double seconds = 0;
  std::string note;  // first failure, or a summary
  bool ok() const { return cases > 0 && failures == 0; }
};

/// One result per law: both associativities, both distributivities,
/// commutativity of +, units, and zero annihilation on both sides.
std::vector<SuiteResult> semiring_laws(Instance inst, std::uint64_t seed, std::size_t cases = 1000);

/// Pointed arenas of at most 12 moves: base arenas retimed by one stage, and
/// function arenas between base arenas. Arenas of equal timing class compose.
/// Arenas with several initial moves have no plays as codomains, so the
/// tensor is tested through `interleave` instead.
struct ArenaFamily {
  std::vector<games::Arena> arenas;
  std::vector<int> timing;  // class index per arena
};
ArenaFamily small_arenas();

/// Identity, associativity and functoriality of the tensor.
std::vector<SuiteResult> category_laws(std::uint64_t seed, std::size_t quadruples = 50);

/// (J⊙K)·A ≅ J·(K·A) for random schedules of size at most 3.
SuiteResult action_functoriality(std::uint64_t seed, std::size_t cases = 100);

/// Random stage systems with at most 4 unknowns: whenever the 1/8 grid has a
/// model the solver must report sat, and every solver model must hold.
SuiteResult oracle_agreement(std::uint64_t seed, std::size_t systems, const SolverConfig& cfg);

/// Terms whose derivation admits more than one contraction tree.
std::vector<std::string> coherence_terms();

/// Infers each source, then denotes every derivation variant and compares
/// play sets with the original tree.
SuiteResult coherence(const std::vector<std::string>& sources, const SolveConfig& cfg, unsigned max_int = 2);

/// Generate, solve, substitute and check on random closed terms.
SuiteResult soundness(std::uint64_t seed, std::size_t terms, int depth, const SolveConfig& cfg);

}  // namespace pia
