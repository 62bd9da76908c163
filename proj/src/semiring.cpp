// SPDX-License-Identifier: Apache-2.0

#include "pia/semiring.hpp"

#include <cassert>

#include "pia/error.hpp"

namespace pia {

std::string to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::type: return "type-error";
    case ErrorKind::unsat: return "unsatisfiable";
    case ErrorKind::solver: return "solver-failure";
    case ErrorKind::io: return "io-error";
    case ErrorKind::internal: return "internal-error";
    case ErrorKind::mismatch: return "instance-mismatch";
  }
  return "error";
}

bool Stage::is_contractive(const Rational& scale, const Rational& phase) {
  return scale >= 0 && scale <= 1 && phase >= 0 && scale + phase <= 1;
}

Stage Stage::make(Rational scale, Rational phase) {
  scale.canonicalize();
  phase.canonicalize();
  if (!is_contractive(scale, phase))
    throw Error(ErrorKind::type, "non-contractive stage (" + to_string(scale) + ", " +
                                     to_string(phase) + ")");
  return Stage(std::move(scale), std::move(phase));
}

Stage Stage::compose(const Stage& inner) const {
  Stage out(scale_ * inner.scale_, scale_ * inner.phase_ + phase_);
  assert(is_contractive(out.scale_, out.phase_));
  return out;
}

std::string Stage::str() const { return "(" + to_string(scale_) + ", " + to_string(phase_) + ")"; }

StageOrders stage_orders(const Stage& x, const Stage& y) {
  StageOrders o{};
  const Rational x0 = x.start(), x1 = x.end(), y0 = y.start(), y1 = y.end();
  o.subset = x0 >= y0 && x1 <= y1;
  o.egli_milner_leq = x0 <= y0 && x1 <= y1;
  o.disjoint = x1 < y0 || y1 < x0;
  o.fifo = o.egli_milner_leq;
  o.strict_fifo = o.fifo && x0 != y0 && x1 != y1;
  o.strictly_before = o.egli_milner_leq && o.disjoint;
  return o;
}

Schedule::Schedule(std::initializer_list<Stage> stages) {
  for (const auto& s : stages) insert(s);
}

Schedule::Schedule(const std::vector<Stage>& stages) {
  for (const auto& s : stages) insert(s);
}

void Schedule::insert(const Stage& x, std::uint64_t multiplicity) {
  if (multiplicity == 0) return;
  entries_[x] += multiplicity;
}

std::uint64_t Schedule::multiplicity(const Stage& x) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? 0 : it->second;
}

std::uint64_t Schedule::size() const {
  std::uint64_t n = 0;
  for (const auto& [_, m] : entries_) n += m;
  return n;
}

std::vector<Stage> Schedule::stages() const {
  std::vector<Stage> out;
  for (const auto& [x, m] : entries_)
    for (std::uint64_t i = 0; i < m; ++i) out.push_back(x);
  return out;
}

Schedule Schedule::operator+(const Schedule& other) const {
  Schedule out = *this;
  for (const auto& [x, m] : other.entries_) out.insert(x, m);
  return out;
}

Schedule Schedule::operator*(const Schedule& other) const {
  Schedule out;
  for (const auto& [y, m] : entries_)
    for (const auto& [z, n] : other.entries_) out.insert(y.compose(z), m * n);
  return out;
}

std::string Schedule::str() const {
  std::string s = "[";
  bool first = true;
  for (const auto& x : stages()) {
    if (!first) s += ";";
    first = false;
    s += x.str();
  }
  return s + "]";
}

std::uint64_t schedule_size(const Schedule& j) { return j.size(); }

bool is_pipeline(const Schedule& j) {
  for (const auto& [_, m] : j.entries())
    if (m != 1) return false;
  const auto xs = j.stages();
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = a + 1; b < xs.size(); ++b)
      if (!strict_fifo(xs[a], xs[b]) && !strict_fifo(xs[b], xs[a])) return false;
  return true;
}

Instance instance_of(const Element& e) {
  switch (e.index()) {
    case 0: return Instance::nat;
    case 1: return Instance::zoi;
    default: return Instance::schedule;
  }
}

std::string to_string(Instance i) {
  switch (i) {
    case Instance::nat: return "nat";
    case Instance::zoi: return "zoi";
    case Instance::schedule: return "schedule";
  }
  return "?";
}

std::string to_string(const Element& e) {
  struct V {
    std::string operator()(const Nat& n) const { return std::to_string(n.value); }
    std::string operator()(ZeroOneInf z) const {
      return z == ZeroOneInf::zero ? "0" : z == ZeroOneInf::one ? "1" : "inf";
    }
    std::string operator()(const Schedule& s) const { return s.str(); }
  };
  return std::visit(V{}, e);
}

namespace {

void require(Instance instance, const Element& e) {
  if (instance_of(e) != instance)
    throw Error(ErrorKind::mismatch, "semiring instance mismatch: expected " + to_string(instance) +
                                         ", got " + to_string(instance_of(e)));
}

template <class T>
Element binary(const Element& a, const Element& b, bool add) {
  const T& x = std::get<T>(a);
  const T& y = std::get<T>(b);
  return add ? Element(semiring_traits<T>::add(x, y)) : Element(semiring_traits<T>::mul(x, y));
}

Element dispatch(Instance instance, const Element& a, const Element& b, bool add) {
  require(instance, a);
  require(instance, b);
  switch (instance) {
    case Instance::nat: return binary<Nat>(a, b, add);
    case Instance::zoi: return binary<ZeroOneInf>(a, b, add);
    case Instance::schedule: return binary<Schedule>(a, b, add);
  }
  throw Error(ErrorKind::internal, "unknown semiring instance");
}

}  // namespace

Element sr_add(Instance instance, const Element& a, const Element& b) {
  return dispatch(instance, a, b, true);
}

Element sr_mul(Instance instance, const Element& a, const Element& b) {
  return dispatch(instance, a, b, false);
}

Element sr_zero(Instance instance) {
  switch (instance) {
    case Instance::nat: return semiring_traits<Nat>::zero();
    case Instance::zoi: return semiring_traits<ZeroOneInf>::zero();
    case Instance::schedule: return semiring_traits<Schedule>::zero();
  }
  throw Error(ErrorKind::internal, "unknown semiring instance");
}

Element sr_one(Instance instance) {
  switch (instance) {
    case Instance::nat: return semiring_traits<Nat>::one();
    case Instance::zoi: return semiring_traits<ZeroOneInf>::one();
    case Instance::schedule: return semiring_traits<Schedule>::one();
  }
  throw Error(ErrorKind::internal, "unknown semiring instance");
}

}  // namespace pia
