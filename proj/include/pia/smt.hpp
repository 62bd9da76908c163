// SPDX-License-Identifier: Apache-2.0
//
// Lowered constraint problems, SMT-LIB2 emission, the external solver driver
// and an exhaustive grid oracle.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pia/infer.hpp"
#include "pia/semiring.hpp"

namespace pia {

// --- s-expressions -----------------------------------------------------------

struct SExpr {
  std::string atom;  // empty for lists
  std::vector<SExpr> list;
  bool is_atom() const { return !atom.empty(); }
  std::string str() const;
};

/// Parses a sequence of s-expressions. Throws Error(solver) on malformed input.
std::vector<SExpr> parse_sexprs(const std::string& text);

/// Numeric literal: 3, 0.25, (/ 1 8), (- 0.5), (/ (- 1) 8). nullopt otherwise
/// (for instance algebraic numbers printed as root-obj).
std::optional<Rational> sexpr_rational(const SExpr& e);

// --- the size problem (naturals) ----------------------------------------------

struct SizeTerm {
  enum class Kind { var, lit, add, mul };
  Kind kind = Kind::lit;
  int var = -1;
  std::uint64_t lit = 0;
  std::vector<SizeTerm> args;
};

struct SizeProblem {
  std::vector<std::string> names;
  std::vector<bool> bounded;  // subject to the global bound B
  std::vector<std::pair<SizeTerm, SizeTerm>> eqs;
};

// --- the stage problem (reals) ------------------------------------------------

/// Composition chain x1 ∘ x2 ∘ ... (x1 outermost); empty means the identity.
/// A factor is an unknown stage index or a concrete stage.
using StageFactor = std::variant<int, Stage>;
using StageTerm = std::vector<StageFactor>;

struct StageAtom {
  // lex_leq orders by (phase, scale) lexicographically.
  enum class Kind { eq, before, strict_fifo, em_leq, lex_leq, not_identity, nonzero_scale, bound, falsum };
  Kind kind;
  StageTerm a, b;
  Component component = Component::scale;
  Cmp cmp = Cmp::eq;
  Rational value;
};

/// Unknown stages are implicitly contractive.
struct StageProblem {
  std::vector<std::string> names;
  std::vector<StageAtom> atoms;
};

std::string str(const StageTerm& t, const std::vector<std::string>& names);

Stage evaluate(const StageTerm& t, const std::vector<Stage>& values);
bool holds(const StageAtom& a, const std::vector<Stage>& values);
bool holds(const StageProblem& p, const std::vector<Stage>& values);

/// Equalities between single unknowns, or between an unknown and a concrete
/// stage, are eliminated by substitution.
struct ReducedProblem {
  StageProblem problem;
  std::vector<StageFactor> map;  // original unknown -> reduced unknown or constant
};
ReducedProblem reduce(const StageProblem& p);
std::vector<Stage> expand(const ReducedProblem& r, const std::vector<Stage>& values);

// --- scripts --------------------------------------------------------------------

struct SmtScript {
  std::string logic;
  std::vector<std::string> declarations;
  std::vector<std::string> assertions;
  std::vector<std::string> commands;

  std::size_t variables() const { return declarations.size(); }
  std::string text() const;
};

/// Bounded variables range over [lower, bound]; the others over [0, inf).
SmtScript emit_sizes(const SizeProblem& p, std::uint64_t bound, std::uint64_t lower = 0);
SmtScript emit_stages(const StageProblem& p);

/// SMT symbols used for the scale/phase of unknown i.
std::string scale_symbol(const StageProblem& p, std::size_t i);
std::string phase_symbol(const StageProblem& p, std::size_t i);

// --- solver process -------------------------------------------------------------

struct SolverConfig {
  std::string command = "z3 -in -smt2";
  double timeout_seconds = 120;
};

/// Solver command: `--solver` flag, else $PIA_SOLVER, else z3.
std::string default_solver_command();

struct SolverResult {
  enum class Status { sat, unsat, unknown, timeout };
  Status status = Status::unknown;
  std::map<std::string, SExpr> values;  // define-fun or get-value bindings
  std::string output;
  double seconds = 0;
};

std::string to_string(SolverResult::Status s);

/// Throws Error(solver) when the process cannot be started or its output
/// cannot be parsed.
SolverResult run_solver(const std::string& script, const SolverConfig& cfg);

/// Stage values from a sat result. Throws Error(solver) on missing or
/// non-rational values.
std::vector<Stage> read_stages(const StageProblem& p, const SolverResult& r);
std::map<std::string, std::uint64_t> read_sizes(const SizeProblem& p, const SolverResult& r);

// --- grid oracle ------------------------------------------------------------------

/// Exhaustive search over {0, step, ..., 1}^2 per unknown (contractive points
/// only), with pruning on atoms whose unknowns are all assigned. Returns the
/// first model in lexicographic grid order. Throws Error(mismatch) when the
/// problem has more than `max_unknowns` unknowns.
std::optional<std::vector<Stage>> brute_oracle(const StageProblem& p, const Rational& step,
                                               std::size_t max_unknowns = 6);

}  // namespace pia
