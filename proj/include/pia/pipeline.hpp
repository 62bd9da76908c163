// SPDX-License-Identifier: Apache-2.0
//
// Two-stage solving of a constraint system: schedule sizes over the naturals,
// then stage values over the reals under guessed stage orders.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pia/check.hpp"
#include "pia/infer.hpp"
#include "pia/smt.hpp"

namespace pia {

struct SolveConfig {
  std::optional<Stage> write_stage;  // fixed w; otherwise scale fixed, phase free
  Rational write_scale = rat(1, 8);
  bool pipeline = false;
  std::uint64_t size_bound_start = 1;
  std::uint64_t size_bound_max = 8;
  std::size_t order_retry_budget = 64;
  bool sequential = false;
  std::size_t jobs = 0;  // parallel batch width; 0 picks from the hardware
  SolverConfig solver{default_solver_command(), 120};
  /// Variables pinned to concrete values, by name.
  std::map<std::string, Schedule> fixed;

  GenOptions gen_options() const;
};

/// key=value lines; `#` starts a comment. `fix.NAME = [..]` pins a variable. Throws Error(io) on unknown keys or
/// malformed values.
SolveConfig parse_config(const std::string& text, SolveConfig base = {});
SolveConfig load_config(const std::string& path, SolveConfig base = {});

/// Schedule-variable sizes by variable id (stage variables have size 1).
using Sizes = std::map<int, std::uint64_t>;

struct SizePhase {
  Sizes sizes;
  std::uint64_t bound = 0;
  std::size_t variables = 0;
  std::size_t assertions = 0;
  std::size_t solver_calls = 0;
  double seconds = 0;
  std::string last_script;
};

/// Size abstraction: + to +, × to ×, concrete schedules to their sizes.
SizeProblem size_problem(const ConstraintSystem& sys, const SolveConfig& cfg);

/// Iterates the global bound from size_bound_start to size_bound_max. Throws
/// Error(unsat) "size-unsatisfiable" or Error(solver) "solver-timeout".
SizePhase solve_sizes(const ConstraintSystem& sys, const SolveConfig& cfg);

/// The stage-level encoding for fixed sizes. Guess items are permutations of
/// stage lists whose order is not determined by the encoding.
class Lowering {
 public:
  Lowering(const ConstraintSystem& sys, const Sizes& sizes, const SolveConfig& cfg);

  struct Item {
    std::string what;
    std::size_t size;
  };
  const std::vector<Item>& items() const { return items_; }

  using Guess = std::vector<std::vector<std::size_t>>;
  Guess identity_guess() const;
  /// Round-robin successor: attempt k advances item (k-1) mod m.
  static bool advance(Guess& g, std::size_t attempt);

  StageProblem problem(const Guess& g) const;
  Model model(const std::vector<Stage>& values) const;

 private:
  /// A stage list, optionally reordered by the permutation of a guess item.
  struct Perm {
    int item = -1;  // -1: no reordering
    std::vector<StageTerm> list;
  };
  std::vector<StageTerm> ordered(const Perm& p, const Guess& g) const;

  const ConstraintSystem* sys_;
  std::vector<std::string> names_;
  std::vector<Item> items_;
  std::vector<StageAtom> fixed_atoms_;
  std::vector<std::pair<Perm, Perm>> eqs_;
  std::vector<std::pair<Perm, StageAtom::Kind>> chains_;
  std::map<int, std::vector<int>> unknowns_;  // free variable -> unknown indices
  std::map<int, Schedule> fixed_;
  std::map<int, Annot> defs_;
};

struct StagePhase {
  Model model;
  std::size_t attempts = 0;
  std::size_t guess_items = 0;
  std::size_t variables = 0;
  std::size_t assertions = 0;
  double seconds = 0;
  std::string last_script;
};

/// Throws Error(unsat) "pipeline-unsatisfiable" when every order guess in the
/// budget fails, Error(solver) on timeouts.
StagePhase solve_stages(const ConstraintSystem& sys, const Sizes& sizes, const SolveConfig& cfg);

struct InferStats {
  std::size_t schedule_vars = 0;
  std::size_t stage_vars = 0;
  std::size_t smt_variables = 0;   // both phases
  std::size_t smt_assertions = 0;  // both phases
  std::size_t size_bound = 0;
  std::size_t order_attempts = 0;
  double wall_ms = 0;
};

struct InferResult {
  ConstraintSystem system;
  SizePhase sizes;
  StagePhase stages;
  Document judgment;  // concrete
  Verification verification;
  CheckResult check;  // independent re-check of the judgment
  InferStats stats;
};

/// Generate, solve both phases, substitute, re-verify in exact arithmetic
/// and re-check the derivation.
InferResult infer_end_to_end(const Document& doc, const SolveConfig& cfg);

}  // namespace pia
