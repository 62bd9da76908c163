// SPDX-License-Identifier: Apache-2.0
//
// Resource semirings: naturals, {0,1,inf}, and schedules (finite multisets of
// contractive affine stages under convolution).

#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pia/rational.hpp"

namespace pia {

/// A contractive affine transformation t -> scale * t + phase of the unit
/// interval. Always satisfies 0 <= scale, 0 <= phase, scale + phase <= 1.
class Stage {
 public:
  /// Throws Error(type) when the pair is not contractive.
  static Stage make(Rational scale, Rational phase);
  static Stage identity() { return Stage(Rational(1), Rational(0)); }
  static bool is_contractive(const Rational& scale, const Rational& phase);

  const Rational& scale() const { return scale_; }
  const Rational& phase() const { return phase_; }

  /// Interval [phase, scale + phase] obtained by acting on [0,1].
  std::pair<Rational, Rational> interval() const { return {phase_, scale_ + phase_}; }
  Rational start() const { return phase_; }
  Rational end() const { return scale_ + phase_; }

  /// Matrix product: apply `inner` first, then `*this`.
  Stage compose(const Stage& inner) const;

  /// Image of a time point.
  Rational apply(const Rational& t) const { return scale_ * t + phase_; }

  bool is_identity() const { return scale_ == 1 && phase_ == 0; }

  friend bool operator==(const Stage& a, const Stage& b) {
    return a.scale_ == b.scale_ && a.phase_ == b.phase_;
  }
  /// Canonical order: by phase, then scale.
  friend bool operator<(const Stage& a, const Stage& b) {
    if (a.phase_ != b.phase_) return a.phase_ < b.phase_;
    return a.scale_ < b.scale_;
  }

  std::string str() const;

 private:
  Stage(Rational s, Rational p) : scale_(std::move(s)), phase_(std::move(p)) {}
  Rational scale_;
  Rational phase_;
};

/// All interval relations between two stages, as used by the constant
/// signatures and the pipeline discipline.
struct StageOrders {
  bool subset;            // [p,s+p] contained in [p',s'+p']
  bool egli_milner_leq;   // p <= p' and s+p <= s'+p'
  bool disjoint;          // intervals share no point
  bool fifo;              // same as egli_milner_leq
  bool strict_fifo;       // fifo with distinct starts and distinct ends
  bool strictly_before;   // fifo and disjoint
};

StageOrders stage_orders(const Stage& x, const Stage& y);

inline bool strict_fifo(const Stage& x, const Stage& y) { return stage_orders(x, y).strict_fifo; }
inline bool strictly_before(const Stage& x, const Stage& y) {
  return stage_orders(x, y).strictly_before;
}

/// Finite multiset of stages; element of N[Aff].
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::initializer_list<Stage> stages);
  explicit Schedule(const std::vector<Stage>& stages);

  static Schedule zero() { return {}; }
  static Schedule one() { return Schedule{Stage::identity()}; }

  void insert(const Stage& x, std::uint64_t multiplicity = 1);

  std::uint64_t multiplicity(const Stage& x) const;
  std::uint64_t size() const;
  bool empty() const { return entries_.empty(); }

  /// Stages with repetition, in canonical (phase, scale) order.
  std::vector<Stage> stages() const;
  const std::map<Stage, std::uint64_t>& entries() const { return entries_; }

  Schedule operator+(const Schedule& other) const;
  /// Convolution: (J x K)(x) = sum over y*z = x of J(y) K(z).
  Schedule operator*(const Schedule& other) const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
  friend bool operator<(const Schedule& a, const Schedule& b) { return a.entries_ < b.entries_; }

  /// "[(0.5, 0.1);(0.5, 0.2)]"
  std::string str() const;

 private:
  std::map<Stage, std::uint64_t> entries_;
};

std::uint64_t schedule_size(const Schedule& j);

/// Proper set whose stages are pairwise strictly FIFO-comparable.
bool is_pipeline(const Schedule& j);

// --- the three concrete instances -------------------------------------------

struct Nat {
  std::uint64_t value = 0;
  friend bool operator==(const Nat&, const Nat&) = default;
};

enum class ZeroOneInf { zero, one, inf };

template <class T>
struct semiring_traits;

template <>
struct semiring_traits<Nat> {
  static Nat zero() { return {0}; }
  static Nat one() { return {1}; }
  static Nat add(Nat a, Nat b) { return {a.value + b.value}; }
  static Nat mul(Nat a, Nat b) { return {a.value * b.value}; }
  static constexpr bool commutative_mul = true;
};

template <>
struct semiring_traits<ZeroOneInf> {
  static ZeroOneInf zero() { return ZeroOneInf::zero; }
  static ZeroOneInf one() { return ZeroOneInf::one; }
  static ZeroOneInf add(ZeroOneInf a, ZeroOneInf b) {
    if (a == ZeroOneInf::zero) return b;
    if (b == ZeroOneInf::zero) return a;
    return ZeroOneInf::inf;  // 1+1 saturates, anything + inf = inf
  }
  static ZeroOneInf mul(ZeroOneInf a, ZeroOneInf b) {
    if (a == ZeroOneInf::zero || b == ZeroOneInf::zero) return ZeroOneInf::zero;
    if (a == ZeroOneInf::one) return b;
    if (b == ZeroOneInf::one) return a;
    return ZeroOneInf::inf;
  }
  static constexpr bool commutative_mul = true;
};

template <>
struct semiring_traits<Schedule> {
  static Schedule zero() { return Schedule::zero(); }
  static Schedule one() { return Schedule::one(); }
  static Schedule add(const Schedule& a, const Schedule& b) { return a + b; }
  static Schedule mul(const Schedule& a, const Schedule& b) { return a * b; }
  static constexpr bool commutative_mul = false;
};

template <class T>
concept Semiring = requires(const T& a, const T& b) {
  { semiring_traits<T>::zero() } -> std::convertible_to<T>;
  { semiring_traits<T>::one() } -> std::convertible_to<T>;
  { semiring_traits<T>::add(a, b) } -> std::convertible_to<T>;
  { semiring_traits<T>::mul(a, b) } -> std::convertible_to<T>;
  { a == b } -> std::convertible_to<bool>;
};

// --- dynamically tagged elements --------------------------------------------

enum class Instance { nat, zoi, schedule };

using Element = std::variant<Nat, ZeroOneInf, Schedule>;

Instance instance_of(const Element& e);
std::string to_string(Instance i);
std::string to_string(const Element& e);

/// Throws Error(mismatch) if either operand belongs to another instance.
Element sr_add(Instance instance, const Element& a, const Element& b);
Element sr_mul(Instance instance, const Element& a, const Element& b);
Element sr_zero(Instance instance);
Element sr_one(Instance instance);

}  // namespace pia
