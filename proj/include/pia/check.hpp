// SPDX-License-Identifier: Apache-2.0
//
// Reconstruction and verification of the stratified derivation of a fully
// concrete judgment: occurrences are linearized, contraction and weakening
// happen at abstractions and at the root, and every semiring side condition
// is checked by exact evaluation.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pia/syntax.hpp"

namespace pia {

struct CtxEntry {
  std::string name;  // linearized, e.g. x#2
  std::string base;  // source identifier
  Schedule annot;
  Type type;
};

struct Derivation {
  enum class Rule { identity, constant, application, abstraction, abs_con, abs_weak, root, contraction };
  Rule rule;
  std::vector<CtxEntry> ctx;
  Term term;  // with linearized variable names
  Type type;
  std::vector<Derivation> children;
  /// Linear names merged into one identifier: one group for abstractions and
  /// contractions, one per declaration (in order) at the root. A contraction
  /// names the merged entry by joining the group with `+`.
  std::vector<std::vector<std::string>> groups;

  /// Indented proof tree, root first.
  std::string str() const;
};

std::string to_string(Derivation::Rule r);

struct CheckOptions {
  std::optional<Stage> write_stage;  // for a `new` that is not applied
};

struct CheckResult {
  bool accepted = false;
  std::string reason;  // rejection category
  std::string detail;
  std::optional<Derivation> derivation;
};

/// Rejection reasons: "annotation sum mismatch", "scaling mismatch",
/// "context/term variable mismatch", "non-contractive stage", "type mismatch",
/// "constant side condition", "non-concrete annotation".
CheckResult check_judgment(const Document& j, const CheckOptions& opts = {});

/// Parses then checks; parse failures caused by non-contractive stages are
/// rejections, other parse errors propagate.
CheckResult check_source(const std::string& text, const CheckOptions& opts = {});

}  // namespace pia
