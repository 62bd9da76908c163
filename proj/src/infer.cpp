// SPDX-License-Identifier: Apache-2.0

#include "pia/infer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "pia/error.hpp"

namespace pia {

std::string to_string(Rel r) {
  switch (r) {
    case Rel::contractive: return "contractive";
    case Rel::not_identity: return "neq-id";
    case Rel::before: return "before";
    case Rel::strict_fifo: return "sfifo";
    case Rel::em_leq: return "em-leq";
    case Rel::nonzero_scale: return "nonzero-scale";
  }
  return "?";
}

namespace {

std::string sexpr(const Annot& a) {
  if (auto v = a.as<Annot::Var>()) return v->name;
  if (auto c = a.as<Annot::Concrete>()) return c->value.str();
  if (auto s = a.as<Annot::Sum>()) {
    std::string out = "(+";
    for (const auto& t : s->terms) out += " " + sexpr(t);
    return out + ")";
  }
  if (auto p = a.as<Annot::Prod>()) {
    std::string out = "(*";
    for (const auto& t : p->factors) out += " " + sexpr(t);
    return out + ")";
  }
  return a.str();
}

/// Product with unit folding and flattening.
Annot mul(const Annot& a, const Annot& b) {
  auto is_one = [](const Annot& x) {
    auto c = x.as<Annot::Concrete>();
    return c && c->value == Schedule::one();
  };
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  if (a.as<Annot::Concrete>() && b.as<Annot::Concrete>())
    return Annot::concrete(a.as<Annot::Concrete>()->value * b.as<Annot::Concrete>()->value);
  std::vector<Annot> f;
  for (const Annot* x : {&a, &b}) {
    if (auto p = x->as<Annot::Prod>())
      f.insert(f.end(), p->factors.begin(), p->factors.end());
    else
      f.push_back(*x);
  }
  return Annot::prod(std::move(f));
}

Constraint eq(Annot l, Annot r) {
  Constraint c{Constraint::Kind::eq, std::move(l), std::move(r)};
  return c;
}

}  // namespace

std::string Constraint::str() const {
  switch (kind) {
    case Kind::eq:
    case Kind::def: return "(= " + sexpr(lhs) + " " + sexpr(rhs) + ")";
    case Kind::pred:
      return "(" + to_string(rel) + " " + sexpr(lhs) + (binary ? " " + sexpr(rhs) : "") + ")";
    case Kind::bound: {
      const char* op = cmp == Cmp::eq ? "=" : cmp == Cmp::le ? "<=" : ">=";
      return std::string("(") + op + " (" + (component == Component::scale ? "scale" : "phase") +
             " " + sexpr(lhs) + ") " + to_string(value) + ")";
    }
    case Kind::pipe: return "(pipe " + sexpr(lhs) + ")";
    case Kind::size: return "(size " + sexpr(lhs) + " " + std::to_string(size) + ")";
  }
  return "?";
}

std::size_t ConstraintSystem::count(VarKind k) const {
  return static_cast<std::size_t>(
      std::count_if(vars.begin(), vars.end(), [&](const VarInfo& v) { return v.kind == k; }));
}

std::string ConstraintSystem::dump() const {
  std::string out;
  for (const auto& c : constraints) out += c.str() + "\n";
  return out;
}

std::vector<Constraint> flatten_type_eq(const Type& a, const Type& b) {
  std::vector<Constraint> out;
  std::function<void(const Type&, const Type&)> go = [&](const Type& x, const Type& y) {
    if (x.as_base() && y.as_base()) {
      if (x.as_base()->base != y.as_base()->base)
        throw Error(ErrorKind::internal, "skeleton mismatch: " + pretty(x) + " vs " + pretty(y));
      return;
    }
    if (!x.as_arrow() || !y.as_arrow())
      throw Error(ErrorKind::internal, "skeleton mismatch: " + pretty(x) + " vs " + pretty(y));
    out.push_back(eq(x.annot(), y.annot()));
    go(x.dom(), y.dom());
    go(x.cod(), y.cod());
  };
  go(a, b);
  return out;
}

// --- generation ----------------------------------------------------------------

namespace {

struct Entry {
  std::string name;
  Annot annot;
  Type type;
};

struct Result {
  std::vector<Entry> ctx;
  Type type;
  Term term = Term::constant(ConstId::skip);
};

class Generator {
 public:
  Generator(const Document& doc, const GenOptions& opts) : doc_(doc), opts_(opts) {
    sys_.pipeline = opts.pipeline;
    for (const auto& d : doc.declarations) collect_names(d.type, d.annot);
  }

  ConstraintSystem run() {
    TypedTerm typed = infer_simple(doc_.term, doc_.declarations);
    Result r = walk(doc_.term, typed);
    Document j;
    for (const auto& d : doc_.declarations) {
      Annot jd = d.annot ? resolve(*d.annot, "context of " + d.name)
                         : fresh(VarKind::schedule, "context of " + d.name);
      Type td = resolve(d.type, "declared type of " + d.name);
      contract(jd, td, d.name, r.ctx);
      j.declarations.push_back({d.name, jd, td});
    }
    if (!r.ctx.empty()) throw Error(ErrorKind::type, "unbound identifier '" + r.ctx.front().name + "'");
    if (doc_.type) {
      Type t = resolve(*doc_.type, "result type");
      for (auto& c : flatten_type_eq(t, r.type)) add(c);
      j.type = t;
    } else {
      j.type = r.type;
    }
    j.term = r.term;
    sys_.judgment = std::move(j);
    if (opts_.pipeline)
      for (const auto& v : sys_.vars)
        if (v.kind == VarKind::schedule)
          add(Constraint{Constraint::Kind::pipe, Annot::var(v.id, v.name, v.kind)});
    return std::move(sys_);
  }

 private:
  void collect_names(const Type& t, const std::optional<Annot>& a) {
    if (a) collect_names(*a);
    if (auto ar = t.as_arrow()) {
      collect_names(ar->annot);
      collect_names(t.dom(), {});
      collect_names(t.cod(), {});
    }
  }
  void collect_names(const Annot& a) {
    if (auto h = a.as<Annot::Hole>(); h && !h->name.empty()) used_.insert(h->name);
    if (auto s = a.as<Annot::Symbol>()) used_.insert(s->name);
  }

  std::string fresh_name(const char* prefix) {
    while (true) {
      std::string n = prefix + std::to_string(++counter_[prefix]);
      if (used_.insert(n).second) return n;
    }
  }

  Annot fresh(VarKind k, std::string origin, std::string name = {}) {
    if (name.empty()) name = fresh_name(k == VarKind::schedule ? "J" : "x");
    int id = static_cast<int>(sys_.vars.size());
    sys_.vars.push_back({id, name, k, std::move(origin)});
    return Annot::var(id, name, k);
  }

  Annot stage_param(const std::string& origin) {
    Annot x = fresh(VarKind::stage, origin);
    return x;
  }

  void add(Constraint c) { sys_.constraints.push_back(std::move(c)); }
  void pred(Rel r, Annot a) {
    Constraint c{Constraint::Kind::pred, std::move(a)};
    c.rel = r;
    add(std::move(c));
  }
  void pred(Rel r, Annot a, Annot b) {
    Constraint c{Constraint::Kind::pred, std::move(a), std::move(b)};
    c.rel = r;
    c.binary = true;
    add(std::move(c));
  }
  void bound(Annot a, Component comp, Cmp cmp, Rational v) {
    Constraint c{Constraint::Kind::bound, std::move(a)};
    c.component = comp;
    c.cmp = cmp;
    c.value = std::move(v);
    add(std::move(c));
  }

  Annot write_stage() {
    if (opts_.write_stage) return Annot::concrete(Schedule{*opts_.write_stage});
    if (!sys_.write_stage) {
      Annot w = fresh(VarKind::stage, "write stage", used_.count("w") && !symbols_.count("w")
                                                         ? fresh_name("w")
                                                         : "w");
      sys_.write_stage = w.as<Annot::Var>()->id;
      bound(w, Component::scale, Cmp::eq, opts_.write_scale);
      bound(w, Component::phase, Cmp::ge, 0);
      symbols_["w"] = w;
    }
    return symbols_.at("w");
  }

  /// Replaces holes and symbols by variables.
  Annot resolve(const Annot& a, const std::string& origin) {
    if (auto h = a.as<Annot::Hole>()) {
      if (!h->name.empty()) {
        auto it = named_.find(h->name);
        if (it != named_.end()) return it->second;
      }
      Annot v = fresh(VarKind::schedule, origin, h->name);
      if (!h->name.empty()) named_.emplace(h->name, v);
      if (h->size) {
        Constraint c{Constraint::Kind::size, v};
        c.size = *h->size;
        add(std::move(c));
      }
      return v;
    }
    if (auto s = a.as<Annot::Symbol>()) {
      if (s->name == "w") return write_stage();
      auto it = symbols_.find(s->name);
      if (it != symbols_.end()) return it->second;
      Annot v = fresh(VarKind::stage, "stage " + s->name, s->name);
      symbols_.emplace(s->name, v);
      return v;
    }
    if (auto s = a.as<Annot::Sum>()) {
      std::vector<Annot> t;
      for (const auto& x : s->terms) t.push_back(resolve(x, origin));
      return Annot::sum(std::move(t));
    }
    if (auto p = a.as<Annot::Prod>()) {
      Annot out = Annot::concrete(Schedule::one());
      for (const auto& x : p->factors) out = mul(out, resolve(x, origin));
      return out;
    }
    return a;
  }

  Type resolve(const Type& t, const std::string& origin) {
    if (t.as_base()) return t;
    return Type::arrow(resolve(t.annot(), origin), resolve(t.dom(), origin),
                       resolve(t.cod(), origin));
  }

  Type fresh_type(const SimpleType& s, const std::string& origin) {
    switch (s.kind()) {
      case SimpleType::Kind::com: return Type::com();
      case SimpleType::Kind::exp: return Type::exp();
      case SimpleType::Kind::arrow: break;
    }
    Annot j = fresh(VarKind::schedule, origin);
    return Type::arrow(j, fresh_type(s.dom(), origin), fresh_type(s.cod(), origin));
  }

  /// Contraction (or weakening) of all entries named `name` into `j`·`t`.
  void contract(const Annot& j, const Type& t, const std::string& name, std::vector<Entry>& ctx) {
    std::vector<Annot> uses;
    std::vector<Entry> rest;
    for (auto& e : ctx) {
      if (e.name == name) {
        uses.push_back(e.annot);
        for (auto& c : flatten_type_eq(t, e.type)) add(c);
      } else {
        rest.push_back(std::move(e));
      }
    }
    ctx = std::move(rest);
    if (uses.empty()) return;  // weakening
    Annot sum = Annot::sum(uses);
    auto v = j.as<Annot::Var>();
    std::set<int> in_sum;
    sum.collect_vars(in_sum);
    if (v && v->kind == VarKind::schedule && !defined_.count(v->id) && !in_sum.count(v->id)) {
      defined_.insert(v->id);
      add(Constraint{Constraint::Kind::def, j, sum});
    } else {
      add(eq(j, sum));
    }
  }

  Result constant(const Term::Const& c, const SimpleType& st) {
    std::string origin = to_string(c.id) + "#" + std::to_string(++const_counter_);
    std::vector<Annot> params;
    for (const auto& p : c.params) params.push_back(resolve(p, origin));
    auto param = [&](std::size_t i, VarKind k) {
      if (i < params.size()) return params[i];
      Annot a = fresh(k, origin);
      params.push_back(a);
      return a;
    };
    const Type com = Type::com(), exp = Type::exp();
    Result r;
    std::optional<BaseType> sigma = c.sigma;
    switch (c.id) {
      case ConstId::one: r.type = exp; break;
      case ConstId::skip: r.type = com; break;
      case ConstId::op:
      case ConstId::comp:
      case ConstId::seq:
      case ConstId::par: {
        Annot x = param(0, VarKind::stage);
        Annot y = c.id == ConstId::par ? x : param(1, VarKind::stage);
        const Type& g = c.id == ConstId::op ? exp : com;
        r.type = Type::arrow(x, g, Type::arrow(y, g, g));
        pred(Rel::contractive, x);
        if (c.id != ConstId::par) pred(Rel::contractive, y);
        if (c.id == ConstId::op) {
          pred(Rel::not_identity, x);
          pred(Rel::not_identity, y);
        }
        if (c.id == ConstId::seq) pred(Rel::before, x, y);
        break;
      }
      case ConstId::if_: {
        Annot x = param(0, VarKind::stage);
        Annot y = param(1, VarKind::stage);
        sigma = st.cod().cod().cod().kind() == SimpleType::Kind::com ? BaseType::com : BaseType::exp;
        Type s = Type::base(*sigma);
        r.type = Type::arrow(x, exp, Type::arrow(y, s, Type::arrow(y, s, s)));
        pred(Rel::contractive, x);
        pred(Rel::contractive, y);
        pred(Rel::before, x, y);
        break;
      }
      case ConstId::new_: {
        Annot j = param(0, VarKind::schedule);
        Annot k = param(1, VarKind::schedule);
        sigma = st.cod().kind() == SimpleType::Kind::com ? BaseType::com : BaseType::exp;
        Type s = Type::base(*sigma);
        Type acc = Type::arrow(write_stage(), exp, com);
        Type body = Type::arrow(j, exp, Type::arrow(k, acc, s));
        r.type = Type::arrow(Annot::concrete(Schedule::one()), body, s);
        pred(Rel::nonzero_scale, k);
        break;
      }
    }
    if (c.id != ConstId::if_ && c.id != ConstId::new_) sigma.reset();
    r.term = Term::constant(c.id, params, sigma);
    return r;
  }

  Result walk(const Term& t, const TypedTerm& typed) {
    if (auto v = t.as<Term::Var>()) {
      Type ty = fresh_type(typed.type, "use of " + v->name);
      return {{{v->name, Annot::concrete(Schedule::one()), ty}}, ty, t};
    }
    if (auto c = t.as<Term::Const>()) return constant(*c, typed.type);
    if (auto l = t.as<Term::Lambda>()) {
      Result body = walk(*l->body, typed.children[0]);
      std::string origin = "binder " + l->name;
      Annot j;
      Type tx;
      if (l->binder) {
        j = resolve(l->binder->annot, origin);
        tx = resolve(l->binder->type, origin);
      } else {
        j = fresh(VarKind::schedule, origin);
        tx = fresh_type(typed.binder, origin);
      }
      contract(j, tx, l->name, body.ctx);
      Result r;
      r.ctx = std::move(body.ctx);
      r.type = Type::arrow(j, tx, body.type);
      r.term = Term::lambda(l->name, body.term, Binder{j, tx});
      return r;
    }
    auto a = t.as<Term::App>();
    Result f = walk(*a->fun, typed.children[0]);
    Result n = walk(*a->arg, typed.children[1]);
    if (!f.type.as_arrow()) throw Error(ErrorKind::internal, "application of non-function");
    for (auto& c : flatten_type_eq(f.type.dom(), n.type)) add(c);
    Result r;
    r.ctx = std::move(f.ctx);
    const Annot& j = f.type.annot();
    for (auto& e : n.ctx) r.ctx.push_back({e.name, mul(j, e.annot), e.type});
    r.type = f.type.cod();
    r.term = Term::app(f.term, n.term);
    return r;
  }

  const Document& doc_;
  GenOptions opts_;
  ConstraintSystem sys_;
  std::set<std::string> used_;
  std::map<std::string, int> counter_;
  std::map<std::string, Annot> named_;
  std::map<std::string, Annot> symbols_;
  std::set<int> defined_;
  int const_counter_ = 0;
};

}  // namespace

ConstraintSystem generate(const Document& doc, const GenOptions& opts) {
  return Generator(doc, opts).run();
}

// --- substitution -----------------------------------------------------------

Schedule evaluate(const Annot& a, const Model& m) {
  if (auto c = a.as<Annot::Concrete>()) return c->value;
  if (auto v = a.as<Annot::Var>()) {
    auto it = m.find(v->id);
    if (it == m.end()) throw Error(ErrorKind::internal, "model has no value for " + v->name);
    return it->second;
  }
  if (auto s = a.as<Annot::Sum>()) {
    Schedule out;
    for (const auto& t : s->terms) out = out + evaluate(t, m);
    return out;
  }
  if (auto p = a.as<Annot::Prod>()) {
    Schedule out = Schedule::one();
    for (const auto& t : p->factors) out = out * evaluate(t, m);
    return out;
  }
  throw Error(ErrorKind::internal, "unresolved annotation " + a.str());
}

Annot substitute(const Annot& a, const Model& m) { return Annot::concrete(evaluate(a, m)); }

Type substitute(const Type& t, const Model& m) {
  if (t.as_base()) return t;
  return Type::arrow(substitute(t.annot(), m), substitute(t.dom(), m), substitute(t.cod(), m));
}

Term substitute(const Term& t, const Model& m) {
  if (t.as<Term::Var>()) return t;
  if (auto c = t.as<Term::Const>()) {
    std::vector<Annot> ps;
    for (const auto& p : c->params) ps.push_back(substitute(p, m));
    return Term::constant(c->id, ps, c->sigma);
  }
  if (auto l = t.as<Term::Lambda>()) {
    std::optional<Binder> b;
    if (l->binder) b = Binder{substitute(l->binder->annot, m), substitute(l->binder->type, m)};
    return Term::lambda(l->name, substitute(*l->body, m), b);
  }
  auto a = t.as<Term::App>();
  return Term::app(substitute(*a->fun, m), substitute(*a->arg, m));
}

Document substitute(const ConstraintSystem& sys, const Model& m) {
  Document d;
  for (const auto& decl : sys.judgment.declarations)
    d.declarations.push_back(
        {decl.name, decl.annot ? std::optional<Annot>(substitute(*decl.annot, m)) : std::nullopt,
         substitute(decl.type, m)});
  d.term = substitute(sys.judgment.term, m);
  if (sys.judgment.type) d.type = substitute(*sys.judgment.type, m);
  return d;
}

// --- verification -------------------------------------------------------------

namespace {

bool rel_holds(Rel r, const Stage& x, const Stage* y) {
  switch (r) {
    case Rel::contractive: return Stage::is_contractive(x.scale(), x.phase());
    case Rel::not_identity: return !x.is_identity();
    case Rel::nonzero_scale: return x.scale() != 0;
    case Rel::before: return strictly_before(x, *y);
    case Rel::strict_fifo: return strict_fifo(x, *y);
    case Rel::em_leq: return stage_orders(x, *y).egli_milner_leq;
  }
  return false;
}

}  // namespace

Verification verify(const ConstraintSystem& sys, const Model& m, double tolerance) {
  Verification out;
  auto fail = [&](const Constraint& c, const std::string& why) {
    out.failures.push_back(c.str() + ": " + why);
  };
  for (const auto& c : sys.constraints) {
    switch (c.kind) {
      case Constraint::Kind::eq:
      case Constraint::Kind::def: {
        Schedule l = evaluate(c.lhs, m), r = evaluate(c.rhs, m);
        if (l == r) break;
        out.exact = false;
        if (l.size() != r.size()) {
          out.within_tolerance = false;
          out.max_residual = std::numeric_limits<double>::infinity();
          fail(c, "sizes " + std::to_string(l.size()) + " and " + std::to_string(r.size()));
          break;
        }
        auto ls = l.stages(), rs = r.stages();
        double res = 0;
        for (std::size_t i = 0; i < ls.size(); ++i) {
          res = std::max(res, std::abs(to_double(ls[i].scale() - rs[i].scale())));
          res = std::max(res, std::abs(to_double(ls[i].phase() - rs[i].phase())));
        }
        out.max_residual = std::max(out.max_residual, res);
        if (res > tolerance) out.within_tolerance = false;
        fail(c, l.str() + " != " + r.str());
        break;
      }
      case Constraint::Kind::pred: {
        Schedule l = evaluate(c.lhs, m);
        bool ok = true;
        if (c.binary) {
          Schedule r = evaluate(c.rhs, m);
          for (const auto& x : l.stages())
            for (const auto& y : r.stages()) ok = ok && rel_holds(c.rel, x, &y);
        } else {
          for (const auto& x : l.stages()) ok = ok && rel_holds(c.rel, x, nullptr);
        }
        if (!ok) {
          out.exact = out.within_tolerance = false;
          fail(c, "violated");
        }
        break;
      }
      case Constraint::Kind::bound: {
        Schedule l = evaluate(c.lhs, m);
        bool ok = l.size() == 1;
        if (ok) {
          const Stage x = l.stages().front();
          const Rational& v = c.component == Component::scale ? x.scale() : x.phase();
          ok = c.cmp == Cmp::eq ? v == c.value : c.cmp == Cmp::le ? v <= c.value : v >= c.value;
        }
        if (!ok) {
          out.exact = out.within_tolerance = false;
          fail(c, "violated by " + l.str());
        }
        break;
      }
      case Constraint::Kind::pipe: {
        Schedule l = evaluate(c.lhs, m);
        if (!is_pipeline(l)) {
          out.exact = out.within_tolerance = false;
          fail(c, l.str() + " is not a pipeline");
        }
        break;
      }
      case Constraint::Kind::size: {
        Schedule l = evaluate(c.lhs, m);
        if (l.size() != c.size) {
          out.exact = out.within_tolerance = false;
          fail(c, "size " + std::to_string(l.size()));
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace pia
