// SPDX-License-Identifier: Apache-2.0
//
// Unification-based inference of the simple-type skeleton (annotations
// ignored). PIA has no let, so monotypes suffice.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pia/syntax.hpp"

namespace pia {

class SimpleType {
 public:
  enum class Kind { com, exp, arrow };

  static SimpleType com() { return SimpleType(Kind::com); }
  static SimpleType exp() { return SimpleType(Kind::exp); }
  static SimpleType arrow(SimpleType dom, SimpleType cod);
  /// Skeleton of a resource type.
  static SimpleType of(const Type& t);

  Kind kind() const { return kind_; }
  bool is_arrow() const { return kind_ == Kind::arrow; }
  const SimpleType& dom() const { return *dom_; }
  const SimpleType& cod() const { return *cod_; }

  std::string str() const;
  friend bool operator==(const SimpleType& a, const SimpleType& b);

 private:
  explicit SimpleType(Kind k) : kind_(k) {}
  Kind kind_;
  std::shared_ptr<const SimpleType> dom_, cod_;
};

/// Simple type of every subterm, mirroring the term tree: a Lambda has one
/// child (the body), an App two (function, argument).
struct TypedTerm {
  SimpleType type = SimpleType::com();
  SimpleType binder = SimpleType::com();  // Lambda only
  std::vector<TypedTerm> children;
};

/// Throws Error(type) on clashes, occurs-check failures and unbound
/// identifiers. Type variables left open (e.g. an unused binder) default to com.
TypedTerm infer_simple(const Term& t, const std::vector<Declaration>& declared);

}  // namespace pia
