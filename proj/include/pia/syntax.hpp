// SPDX-License-Identifier: Apache-2.0
//
// Abstract syntax of PIA terms and resource types, the concrete parser and
// the pretty-printer.
//
// Surface syntax (ASCII alternatives in brackets):
//   \x. M   (λ)        lambda, optionally annotated  \x : J·θ . M
//   M N                application (left associative)
//   M ; N              seq        M || N      par        M + N     op
//   if E then M else N
//   new x. M           with  !x  and  x := E  inside M
//   1  skip            ground constants
//   op{J;K}            constant with explicit stage parameters
//   a *1 b             user-declared infix operator (identifier "*1")
// Types:  com | exp | acc | J·θ -> θ  (⊸)   where J is
//   [(0.5, 0.1);(0.5, 0.2)]   concrete schedule
//   ? | ?name | ?#2 | ?name#2 unknown, optionally named and of fixed size
//   [w] [w×b]                 symbolic stages (w is the write stage)

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pia/semiring.hpp"

namespace pia {

// --- annotations -------------------------------------------------------------

enum class VarKind { schedule, stage };

/// A schedule-valued expression: concrete, unknown, or built from + and x.
class Annot {
 public:
  struct Concrete {
    Schedule value;
  };
  /// Inference unknown. Stage variables always denote singleton schedules.
  struct Var {
    int id;
    std::string name;
    VarKind kind;
  };
  /// Placeholder written by the user; replaced by a fresh Var during inference.
  struct Hole {
    std::string name;  // empty for anonymous
    std::optional<std::uint64_t> size;
  };
  /// Named stage symbol such as the write stage `w`, resolved by inference.
  struct Symbol {
    std::string name;
  };
  struct Sum {
    std::vector<Annot> terms;
  };
  struct Prod {
    std::vector<Annot> factors;  // left to right
  };
  using Node = std::variant<Concrete, Var, Hole, Symbol, Sum, Prod>;

  Annot() : Annot(Concrete{Schedule::zero()}) {}
  Annot(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}  // NOLINT

  static Annot concrete(Schedule s) { return Annot(Concrete{std::move(s)}); }
  static Annot var(int id, std::string name, VarKind kind) {
    return Annot(Var{id, std::move(name), kind});
  }
  static Annot hole(std::string name = {}, std::optional<std::uint64_t> size = {}) {
    return Annot(Hole{std::move(name), size});
  }
  static Annot symbol(std::string name) { return Annot(Symbol{std::move(name)}); }
  static Annot sum(std::vector<Annot> terms);
  static Annot prod(std::vector<Annot> factors);

  const Node& node() const { return *node_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(node_.get());
  }

  bool is_concrete() const;
  /// Evaluates a variable-free annotation. Throws Error(type) otherwise.
  Schedule value() const;
  /// Variable ids occurring in this annotation.
  void collect_vars(std::set<int>& out) const;

  std::string str() const;

  friend bool operator==(const Annot& a, const Annot& b);

 private:
  std::shared_ptr<const Node> node_;
};

// --- resource types ----------------------------------------------------------

enum class BaseType { com, exp };

class Type {
 public:
  struct Base {
    BaseType base;
  };
  struct Arrow {
    Annot annot;
    std::shared_ptr<const Type> dom;
    std::shared_ptr<const Type> cod;
  };
  using Node = std::variant<Base, Arrow>;

  Type() : Type(Base{BaseType::com}) {}
  Type(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}  // NOLINT

  static Type base(BaseType b) { return Type(Base{b}); }
  static Type com() { return base(BaseType::com); }
  static Type exp() { return base(BaseType::exp); }
  static Type arrow(Annot annot, Type dom, Type cod);
  /// acc = [w]·exp -> com, with `w` the symbolic write stage.
  static Type acc();

  const Node& node() const { return *node_; }
  const Base* as_base() const { return std::get_if<Base>(node_.get()); }
  const Arrow* as_arrow() const { return std::get_if<Arrow>(node_.get()); }
  const Type& dom() const { return *as_arrow()->dom; }
  const Type& cod() const { return *as_arrow()->cod; }
  const Annot& annot() const { return as_arrow()->annot; }

  bool is_concrete() const;
  std::string str() const;

  friend bool operator==(const Type& a, const Type& b);

 private:
  std::shared_ptr<const Node> node_;
};

/// Same arrow/base skeleton, ignoring annotations.
bool same_skeleton(const Type& a, const Type& b);

// --- terms -------------------------------------------------------------------

enum class ConstId { one, skip, comp, seq, par, op, if_, new_ };

std::string to_string(ConstId c);
/// Number of schedule parameters carried by each constant.
std::size_t param_count(ConstId c);

/// `J·θ` annotation of a lambda binder.
struct Binder {
  Annot annot;
  Type type;
  friend bool operator==(const Binder&, const Binder&) = default;
};

class Term {
 public:
  struct Var {
    std::string name;
  };
  struct Lambda {
    std::string name;
    std::optional<Binder> binder;
    std::shared_ptr<const Term> body;
  };
  struct App {
    std::shared_ptr<const Term> fun;
    std::shared_ptr<const Term> arg;
  };
  struct Const {
    ConstId id;
    std::optional<BaseType> sigma;  // new, if
    std::vector<Annot> params;      // empty means "to be inferred"
  };
  using Node = std::variant<Var, Lambda, App, Const>;

  Term(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}  // NOLINT

  static Term var(std::string name) { return Term(Var{std::move(name)}); }
  static Term lambda(std::string name, Term body, std::optional<Binder> binder = {});
  static Term app(Term fun, Term arg);
  static Term app(Term fun, Term a, Term b) { return app(app(std::move(fun), std::move(a)), std::move(b)); }
  static Term constant(ConstId id, std::vector<Annot> params = {},
                       std::optional<BaseType> sigma = {});

  const Node& node() const { return *node_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(node_.get());
  }
  /// Stable identity of this node, used to key per-subterm maps.
  const void* id() const { return node_.get(); }

  friend bool operator==(const Term& a, const Term& b);

 private:
  std::shared_ptr<const Node> node_;
};

std::set<std::string> free_vars(const Term& t);

// --- documents ---------------------------------------------------------------

/// `name : J·θ` entry of a context or a declaration header.
struct Declaration {
  std::string name;
  std::optional<Annot> annot;  // context annotation; unknown when absent
  Type type;
};

/// A source or judgment file: declarations, one term, optional result type.
struct Document {
  std::vector<Declaration> declarations;
  Term term = Term::constant(ConstId::skip);
  std::optional<Type> type;
};

/// Throws Error(parse) with "line:col: message".
Term parse_term(const std::string& source);
Type parse_type(const std::string& source);
Annot parse_annot(const std::string& source);
Document parse_document(const std::string& source);

struct PrettyOptions {
  bool sugar = false;  // print `new x. ...` for desugared store blocks
};

std::string pretty(const Term& t, const PrettyOptions& opts = {});
std::string pretty(const Type& t);
std::string pretty(const Declaration& d);
std::string pretty(const Document& d, const PrettyOptions& opts = {});

/// Reader/writer names introduced by `new x.`.
std::string reader_name(const std::string& x);
std::string writer_name(const std::string& x);

}  // namespace pia
