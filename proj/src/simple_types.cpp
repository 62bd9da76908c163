// SPDX-License-Identifier: Apache-2.0

#include "pia/simple_types.hpp"

#include <map>
#include <optional>

#include "pia/error.hpp"

namespace pia {

SimpleType SimpleType::arrow(SimpleType dom, SimpleType cod) {
  SimpleType t(Kind::arrow);
  t.dom_ = std::make_shared<const SimpleType>(std::move(dom));
  t.cod_ = std::make_shared<const SimpleType>(std::move(cod));
  return t;
}

SimpleType SimpleType::of(const Type& t) {
  if (auto b = t.as_base()) return b->base == BaseType::com ? com() : exp();
  return arrow(of(t.dom()), of(t.cod()));
}

std::string SimpleType::str() const {
  switch (kind_) {
    case Kind::com: return "com";
    case Kind::exp: return "exp";
    case Kind::arrow: break;
  }
  std::string d = dom_->str();
  if (dom_->is_arrow()) d = "(" + d + ")";
  return d + " -> " + cod_->str();
}

bool operator==(const SimpleType& a, const SimpleType& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ != SimpleType::Kind::arrow) return true;
  return *a.dom_ == *b.dom_ && *a.cod_ == *b.cod_;
}

namespace {

// Union-find over type nodes.
class Unifier {
 public:
  enum class Tag { var, com, exp, arrow };
  struct Node {
    Tag tag;
    int dom = -1, cod = -1;
    bool ground = false;  // var restricted to com/exp
  };

  int fresh(bool ground = false) {
    nodes_.push_back({Tag::var, -1, -1, ground});
    parent_.push_back(static_cast<int>(parent_.size()));
    return static_cast<int>(nodes_.size()) - 1;
  }
  int base(Tag t) {
    int n = fresh();
    nodes_[n].tag = t;
    return n;
  }
  int arrow(int d, int c) {
    int n = fresh();
    nodes_[n] = {Tag::arrow, d, c, false};
    return n;
  }
  int from(const SimpleType& t) {
    switch (t.kind()) {
      case SimpleType::Kind::com: return base(Tag::com);
      case SimpleType::Kind::exp: return base(Tag::exp);
      case SimpleType::Kind::arrow: break;
    }
    return arrow(from(t.dom()), from(t.cod()));
  }

  int find(int n) {
    while (parent_[n] != n) n = parent_[n] = parent_[parent_[n]];
    return n;
  }

  void unify(int a, int b, const std::string& where) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    Node& x = nodes_[a];
    Node& y = nodes_[b];
    if (x.tag == Tag::var || y.tag == Tag::var) {
      if (x.tag != Tag::var) std::swap(a, b);
      Node& v = nodes_[a];
      Node& o = nodes_[b];
      if (v.ground && o.tag == Tag::arrow)
        throw Error(ErrorKind::type, where + ": expected a ground type, got " + str(b));
      if (occurs(a, b)) throw Error(ErrorKind::type, where + ": infinite type");
      o.ground = o.ground || v.ground;
      parent_[a] = b;
      return;
    }
    if (x.tag != y.tag)
      throw Error(ErrorKind::type, where + ": cannot match " + str(a) + " with " + str(b));
    if (x.tag == Tag::arrow) {
      int xd = x.dom, xc = x.cod, yd = y.dom, yc = y.cod;
      parent_[a] = b;
      unify(xd, yd, where);
      unify(xc, yc, where);
    }
  }

  SimpleType resolve(int n) {
    n = find(n);
    const Node& x = nodes_[n];
    switch (x.tag) {
      case Tag::com:
      case Tag::var: return SimpleType::com();
      case Tag::exp: return SimpleType::exp();
      case Tag::arrow: break;
    }
    return SimpleType::arrow(resolve(x.dom), resolve(x.cod));
  }

  std::string str(int n) {
    n = find(n);
    const Node& x = nodes_[n];
    switch (x.tag) {
      case Tag::com: return "com";
      case Tag::exp: return "exp";
      case Tag::var: return "'t" + std::to_string(n);
      case Tag::arrow: break;
    }
    std::string d = str(x.dom);
    if (nodes_[find(x.dom)].tag == Tag::arrow) d = "(" + d + ")";
    return d + " -> " + str(x.cod);
  }

 private:
  bool occurs(int v, int t) {
    t = find(t);
    if (t == v) return true;
    const Node& x = nodes_[t];
    return x.tag == Tag::arrow && (occurs(v, x.dom) || occurs(v, x.cod));
  }

  std::vector<Node> nodes_;
  std::vector<int> parent_;
};

struct Pending {
  int type = -1;
  int binder = -1;
  std::vector<Pending> children;
};

class Inferer {
 public:
  explicit Inferer(const std::vector<Declaration>& declared) {
    for (const auto& d : declared) globals_[d.name] = u_.from(SimpleType::of(d.type));
  }

  Pending walk(const Term& t) {
    Pending p;
    if (auto v = t.as<Term::Var>()) {
      auto it = scope_.find(v->name);
      if (it != scope_.end() && !it->second.empty()) {
        p.type = it->second.back();
      } else if (auto g = globals_.find(v->name); g != globals_.end()) {
        p.type = g->second;
      } else {
        throw Error(ErrorKind::type, "unbound identifier '" + v->name + "'");
      }
    } else if (auto c = t.as<Term::Const>()) {
      p.type = constant(*c);
    } else if (auto l = t.as<Term::Lambda>()) {
      p.binder = l->binder ? u_.from(SimpleType::of(l->binder->type)) : u_.fresh();
      scope_[l->name].push_back(p.binder);
      p.children.push_back(walk(*l->body));
      scope_[l->name].pop_back();
      p.type = u_.arrow(p.binder, p.children[0].type);
    } else {
      auto a = t.as<Term::App>();
      p.children.push_back(walk(*a->fun));
      p.children.push_back(walk(*a->arg));
      p.type = u_.fresh();
      u_.unify(p.children[0].type, u_.arrow(p.children[1].type, p.type),
               "application of " + pretty(*a->fun));
    }
    return p;
  }

  TypedTerm resolve(const Pending& p) {
    TypedTerm out;
    out.type = u_.resolve(p.type);
    if (p.binder >= 0) out.binder = u_.resolve(p.binder);
    for (const auto& c : p.children) out.children.push_back(resolve(c));
    return out;
  }

 private:
  int constant(const Term::Const& c) {
    using T = Unifier::Tag;
    auto ground = [&] {
      if (c.sigma) return u_.base(*c.sigma == BaseType::com ? T::com : T::exp);
      return u_.fresh(true);
    };
    auto fn = [&](std::vector<int> args, int res) {
      for (auto it = args.rbegin(); it != args.rend(); ++it) res = u_.arrow(*it, res);
      return res;
    };
    switch (c.id) {
      case ConstId::one: return u_.base(T::exp);
      case ConstId::skip: return u_.base(T::com);
      case ConstId::comp:
      case ConstId::seq:
      case ConstId::par: return fn({u_.base(T::com), u_.base(T::com)}, u_.base(T::com));
      case ConstId::op: return fn({u_.base(T::exp), u_.base(T::exp)}, u_.base(T::exp));
      case ConstId::if_: {
        int s = ground();
        return fn({u_.base(T::exp), s, s}, s);
      }
      case ConstId::new_: {
        int s = ground();
        int acc = fn({u_.base(T::exp)}, u_.base(T::com));
        return fn({fn({u_.base(T::exp), acc}, s)}, s);
      }
    }
    throw Error(ErrorKind::internal, "unknown constant");
  }

  Unifier u_;
  std::map<std::string, int> globals_;
  std::map<std::string, std::vector<int>> scope_;
};

}  // namespace

TypedTerm infer_simple(const Term& t, const std::vector<Declaration>& declared) {
  Inferer inf(declared);
  Pending p = inf.walk(t);
  return inf.resolve(p);
}

}  // namespace pia
