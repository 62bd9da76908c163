// SPDX-License-Identifier: Apache-2.0

#include "pia/check.hpp"

#include <functional>
#include <map>

#include "pia/error.hpp"

namespace pia {

std::string to_string(Derivation::Rule r) {
  switch (r) {
    case Derivation::Rule::identity: return "Identity";
    case Derivation::Rule::constant: return "Constant";
    case Derivation::Rule::application: return "Application";
    case Derivation::Rule::abstraction: return "Abstraction";
    case Derivation::Rule::abs_con: return "Abs-con";
    case Derivation::Rule::abs_weak: return "Abs-weak";
    case Derivation::Rule::root: return "Contraction+/Weakening+";
    case Derivation::Rule::contraction: return "Contraction";
  }
  return "?";
}

std::string Derivation::str() const {
  std::string out;
  std::function<void(const Derivation&, int)> go = [&](const Derivation& d, int depth) {
    out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + to_string(d.rule) + "  ";
    for (std::size_t i = 0; i < d.ctx.size(); ++i) {
      if (i) out += ", ";
      out += d.ctx[i].name + " : " + d.ctx[i].annot.str() + "·" + pretty(d.ctx[i].type);
    }
    out += (d.ctx.empty() ? "⊢ " : " ⊢ ") + pretty(d.term) + " : " + pretty(d.type);
    for (const auto& g : d.groups) {
      if (g.size() < 2) continue;
      out += "  [";
      for (std::size_t i = 0; i < g.size(); ++i) out += (i ? " + " : "") + g[i];
      out += "]";
    }
    out += "\n";
    for (const auto& c : d.children) go(c, depth + 1);
  };
  go(*this, 0);
  return out;
}

namespace {

struct Reject {
  std::string reason;
  std::string detail;
};

Schedule concrete(const Annot& a, const std::string& where) {
  if (!a.is_concrete()) throw Reject{"non-concrete annotation", a.str() + " in " + where};
  return a.value();
}

Type concrete(const Type& t, const std::string& where) {
  if (t.as_base()) return t;
  return Type::arrow(Annot::concrete(concrete(t.annot(), where)), concrete(t.dom(), where),
                     concrete(t.cod(), where));
}

Stage single_stage(const Annot& a, const std::string& what) {
  Schedule s = concrete(a, what);
  if (s.size() != 1) throw Reject{"constant side condition", what + " must be a single stage, got " + s.str()};
  return s.stages()[0];
}

Annot one_stage(const Stage& x) { return Annot::concrete(Schedule{x}); }

class Checker {
 public:
  Checker(const Document& j, const CheckOptions& opts) : doc_(j), opts_(opts) {}

  Derivation run() {
    std::map<std::string, Type> declared;
    for (const auto& d : doc_.declarations) {
      if (!declared.emplace(d.name, concrete(d.type, "declaration of " + d.name)).second)
        throw Reject{"context/term variable mismatch", "'" + d.name + "' is declared twice"};
    }
    Derivation body = walk(doc_.term, declared);
    Derivation root{Derivation::Rule::root, {}, body.term, body.type, {}, {}};
    std::vector<CtxEntry> rest = body.ctx;
    for (const auto& d : doc_.declarations) {
      if (!d.annot) throw Reject{"non-concrete annotation", "no context annotation for " + d.name};
      Schedule j = concrete(*d.annot, "context of " + d.name);
      Type t = declared.at(d.name);
      root.groups.push_back(merge(d.name, j, rest, "context entry " + d.name));
      root.ctx.push_back({d.name, d.name, j, t});
    }
    if (!rest.empty())
      throw Reject{"context/term variable mismatch", "free identifier '" + rest.front().base + "' is not declared"};
    if (doc_.type) {
      Type t = concrete(*doc_.type, "result type");
      if (!(t == root.type))
        throw Reject{"type mismatch", "declared result type " + pretty(t) + ", derived " + pretty(root.type)};
    }
    root.children.push_back(std::move(body));
    return root;
  }

 private:
  /// Removes the entries for `base` from ctx and checks that their
  /// annotations sum to j. Returns the merged linear names.
  std::vector<std::string> merge(const std::string& base, const Schedule& j, std::vector<CtxEntry>& ctx,
                                 const std::string& where) {
    std::vector<std::string> names;
    std::vector<CtxEntry> rest;
    Schedule sum;
    for (auto& e : ctx) {
      if (e.base == base) {
        names.push_back(e.name);
        sum = sum + e.annot;
      } else {
        rest.push_back(std::move(e));
      }
    }
    ctx = std::move(rest);
    if (names.empty()) return names;  // weakening: any annotation
    if (!(sum == j)) {
      if (names.size() == 1)
        throw Reject{"scaling mismatch", where + ": annotation " + j.str() + " but the use carries " + sum.str()};
      throw Reject{"annotation sum mismatch", where + ": annotation " + j.str() + " but " +
                                                  std::to_string(names.size()) + " uses sum to " + sum.str()};
    }
    return names;
  }

  Derivation walk(const Term& t, const std::map<std::string, Type>& env) {
    if (auto v = t.as<Term::Var>()) {
      auto it = env.find(v->name);
      if (it == env.end())
        throw Reject{"context/term variable mismatch", "identifier '" + v->name + "' has no type"};
      std::string lin = v->name + "#" + std::to_string(++uses_[v->name]);
      return {Derivation::Rule::identity,
              {{lin, v->name, Schedule::one(), it->second}},
              Term::var(lin),
              it->second,
              {},
              {}};
    }
    if (auto c = t.as<Term::Const>()) return constant(*c, std::nullopt);
    if (auto l = t.as<Term::Lambda>()) {
      if (!l->binder) throw Reject{"non-concrete annotation", "binder " + l->name + " has no annotation"};
      Schedule j = concrete(l->binder->annot, "binder " + l->name);
      Type tx = concrete(l->binder->type, "binder " + l->name);
      auto inner = env;
      inner[l->name] = tx;
      Derivation body = walk(*l->body, inner);
      std::vector<CtxEntry> ctx = body.ctx;
      auto names = merge(l->name, j, ctx, "binder " + l->name);
      Derivation::Rule rule = names.empty()       ? Derivation::Rule::abs_weak
                              : names.size() == 1 ? Derivation::Rule::abstraction
                                                  : Derivation::Rule::abs_con;
      Type ty = Type::arrow(Annot::concrete(j), tx, body.type);
      Term term = Term::lambda(l->name, body.term, Binder{Annot::concrete(j), tx});
      Derivation d{rule, std::move(ctx), term, ty, {}, {names}};
      d.children.push_back(std::move(body));
      return d;
    }
    auto a = t.as<Term::App>();
    auto nc = a->fun->as<Term::Const>();
    std::optional<Derivation> fo, no;
    if (nc && nc->id == ConstId::new_) {
      no = walk(*a->arg, env);
      fo = constant(*nc, no->type);
    } else {
      fo = walk(*a->fun, env);
      no = walk(*a->arg, env);
    }
    Derivation f = std::move(*fo), n = std::move(*no);
    if (!f.type.as_arrow())
      throw Reject{"type mismatch", "applying " + pretty(f.term) + " of type " + pretty(f.type)};
    if (!(f.type.dom() == n.type))
      throw Reject{"type mismatch", "argument of type " + pretty(n.type) + " where " + pretty(f.type.dom()) +
                                        " is expected"};
    Schedule j = f.type.annot().value();
    std::vector<CtxEntry> ctx = f.ctx;
    for (const auto& e : n.ctx) ctx.push_back({e.name, e.base, j * e.annot, e.type});
    Derivation d{Derivation::Rule::application, std::move(ctx), Term::app(f.term, n.term), f.type.cod(), {}, {}};
    d.children.push_back(std::move(f));
    d.children.push_back(std::move(n));
    return d;
  }

  /// `arg` is the argument type when `new` is applied; it fixes w.
  Derivation constant(const Term::Const& c, const std::optional<Type>& arg) {
    std::string what = to_string(c.id);
    if (c.params.size() != param_count(c.id))
      throw Reject{"non-concrete annotation", what + " needs " + std::to_string(param_count(c.id)) + " parameter(s)"};
    const Type com = Type::com(), exp = Type::exp();
    Type ty;
    std::vector<Annot> params;
    switch (c.id) {
      case ConstId::one: ty = exp; break;
      case ConstId::skip: ty = com; break;
      case ConstId::op:
      case ConstId::comp:
      case ConstId::seq:
      case ConstId::par: {
        Stage x = single_stage(c.params[0], what + " parameter x");
        Stage y = c.id == ConstId::par ? x : single_stage(c.params[1], what + " parameter y");
        const Type& g = c.id == ConstId::op ? exp : com;
        if (c.id == ConstId::op && (x.is_identity() || y.is_identity()))
          throw Reject{"constant side condition", "op stages must differ from the identity"};
        if (c.id == ConstId::seq && !strictly_before(x, y))
          throw Reject{"constant side condition", "seq needs " + x.str() + " < " + y.str()};
        ty = Type::arrow(one_stage(x), g, Type::arrow(one_stage(y), g, g));
        params.push_back(one_stage(x));
        if (c.id != ConstId::par) params.push_back(one_stage(y));
        break;
      }
      case ConstId::if_: {
        if (!c.sigma) throw Reject{"non-concrete annotation", "if without a result type"};
        Stage x = single_stage(c.params[0], "if parameter x");
        Stage y = single_stage(c.params[1], "if parameter y");
        if (!strictly_before(x, y))
          throw Reject{"constant side condition", "if needs " + x.str() + " < " + y.str()};
        Type s = Type::base(*c.sigma);
        ty = Type::arrow(one_stage(x), exp, Type::arrow(one_stage(y), s, Type::arrow(one_stage(y), s, s)));
        params = {one_stage(x), one_stage(y)};
        break;
      }
      case ConstId::new_: {
        if (!c.sigma) throw Reject{"non-concrete annotation", "new without a result type"};
        Schedule j = concrete(c.params[0], "new parameter J");
        Schedule k = concrete(c.params[1], "new parameter K");
        for (const auto& x : k.stages())
          if (x.scale() == 0)
            throw Reject{"constant side condition", "new: K contains the instantaneous stage " + x.str()};
        Stage w = write_stage(arg);
        Type s = Type::base(*c.sigma);
        Type acc = Type::arrow(one_stage(w), exp, com);
        Type body = Type::arrow(Annot::concrete(j), exp, Type::arrow(Annot::concrete(k), acc, s));
        ty = Type::arrow(Annot::concrete(Schedule::one()), body, s);
        params = {Annot::concrete(j), Annot::concrete(k)};
        break;
      }
    }
    return {Derivation::Rule::constant, {}, Term::constant(c.id, params, c.sigma), ty, {}, {}};
  }

  Stage write_stage(const std::optional<Type>& arg) {
    // arg = J·exp -> K·([w]·exp -> com) -> σ
    if (arg && arg->as_arrow() && arg->cod().as_arrow() && arg->cod().dom().as_arrow()) {
      Schedule w = arg->cod().dom().annot().value();
      if (w.size() != 1) throw Reject{"type mismatch", "the write stage must be a single stage, got " + w.str()};
      return w.stages()[0];
    }
    if (opts_.write_stage) return *opts_.write_stage;
    throw Reject{"non-concrete annotation", "write stage of an unapplied new is unknown"};
  }

  const Document& doc_;
  CheckOptions opts_;
  std::map<std::string, int> uses_;
};

}  // namespace

CheckResult check_judgment(const Document& j, const CheckOptions& opts) {
  CheckResult r;
  try {
    r.derivation = Checker(j, opts).run();
    r.accepted = true;
  } catch (const Reject& e) {
    r.reason = e.reason;
    r.detail = e.detail;
  }
  return r;
}

CheckResult check_source(const std::string& text, const CheckOptions& opts) {
  Document d;
  try {
    d = parse_document(text);
  } catch (const Error& e) {
    std::string msg = e.what();
    if (msg.find("non-contractive stage") == std::string::npos) throw;
    CheckResult r;
    r.reason = "non-contractive stage";
    r.detail = msg;
    return r;
  }
  return check_judgment(d, opts);
}

}  // namespace pia
