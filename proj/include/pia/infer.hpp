// SPDX-License-Identifier: Apache-2.0
//
// Resource-constraint generation over linearized terms, substitution of
// models, and exact re-verification of a model against the system.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pia/simple_types.hpp"
#include "pia/syntax.hpp"

namespace pia {

struct VarInfo {
  int id;
  std::string name;
  VarKind kind;
  std::string origin;
};

/// Relations between (lists of) stages.
enum class Rel { contractive, not_identity, before, strict_fifo, em_leq, nonzero_scale };
enum class Component { scale, phase };
enum class Cmp { eq, le, ge };

std::string to_string(Rel r);

struct Constraint {
  enum class Kind {
    eq,     // lhs = rhs
    def,    // lhs (a schedule Var) := rhs; produced by contraction
    pred,   // rel(lhs) or rel(lhs, rhs), quantified over all stages
    bound,  // component(lhs) cmp value, lhs a single stage
    pipe,   // Pipe(lhs)
    size,   // size(lhs) = size
  };
  Kind kind;
  Annot lhs;
  Annot rhs;
  Rel rel = Rel::contractive;
  bool binary = false;
  Component component = Component::scale;
  Cmp cmp = Cmp::eq;
  Rational value;
  std::uint64_t size = 0;

  std::string str() const;
};

struct ConstraintSystem {
  std::vector<VarInfo> vars;  // indexed by id
  std::vector<Constraint> constraints;
  /// Symbolic judgment: context as declarations, annotated term, type.
  Document judgment;
  std::optional<int> write_stage;  // id of `w` when not fixed
  bool pipeline = false;

  std::size_t count(VarKind k) const;
  /// One constraint per line, s-expressions, generation order.
  std::string dump() const;
};

struct GenOptions {
  bool pipeline = false;
  std::optional<Stage> write_stage;  // fixed w; otherwise scale fixed, phase free
  Rational write_scale = rat(1, 8);
};

/// Throws Error(type) when simple typing fails.
ConstraintSystem generate(const Document& doc, const GenOptions& opts = {});

/// Pairwise equalities between annotations in the same position.
std::vector<Constraint> flatten_type_eq(const Type& a, const Type& b);

/// Stage variables map to singleton schedules.
using Model = std::map<int, Schedule>;

/// Throws Error(internal) when a variable has no value.
Annot substitute(const Annot& a, const Model& m);
Type substitute(const Type& t, const Model& m);
Term substitute(const Term& t, const Model& m);
Document substitute(const ConstraintSystem& sys, const Model& m);

/// Value of an annotation under a model.
Schedule evaluate(const Annot& a, const Model& m);

struct Verification {
  bool exact = true;          // every constraint holds exactly
  bool within_tolerance = true;
  double max_residual = 0;    // largest stage-component deviation in equations
  std::vector<std::string> failures;
};

/// Re-evaluates every constraint in exact arithmetic. Equations whose sides
/// have equal size but differ by at most `tolerance` per stage component
/// count as within tolerance; predicates are always exact.
Verification verify(const ConstraintSystem& sys, const Model& m, double tolerance = 1e-9);

}  // namespace pia
