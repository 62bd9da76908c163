// SPDX-License-Identifier: Apache-2.0

#include "pia/syntax.hpp"

#include <cctype>
#include <functional>
#include <sstream>

#include "pia/error.hpp"

namespace pia {

// --- annotations -------------------------------------------------------------

Annot Annot::sum(std::vector<Annot> terms) {
  if (terms.empty()) return concrete(Schedule::zero());
  if (terms.size() == 1) return terms.front();
  return Annot(Sum{std::move(terms)});
}

Annot Annot::prod(std::vector<Annot> factors) {
  if (factors.empty()) return concrete(Schedule::one());
  if (factors.size() == 1) return factors.front();
  return Annot(Prod{std::move(factors)});
}

bool Annot::is_concrete() const {
  if (as<Concrete>()) return true;
  if (auto s = as<Sum>()) {
    for (const auto& t : s->terms)
      if (!t.is_concrete()) return false;
    return true;
  }
  if (auto p = as<Prod>()) {
    for (const auto& t : p->factors)
      if (!t.is_concrete()) return false;
    return true;
  }
  return false;
}

Schedule Annot::value() const {
  if (auto c = as<Concrete>()) return c->value;
  if (auto s = as<Sum>()) {
    Schedule out;
    for (const auto& t : s->terms) out = out + t.value();
    return out;
  }
  if (auto p = as<Prod>()) {
    Schedule out = Schedule::one();
    for (const auto& t : p->factors) out = out * t.value();
    return out;
  }
  throw Error(ErrorKind::type, "annotation " + str() + " is not concrete");
}

void Annot::collect_vars(std::set<int>& out) const {
  if (auto v = as<Var>()) out.insert(v->id);
  if (auto s = as<Sum>())
    for (const auto& t : s->terms) t.collect_vars(out);
  if (auto p = as<Prod>())
    for (const auto& t : p->factors) t.collect_vars(out);
}

namespace {

// Stage-like factors print inside a single bracket pair: [w×b].
bool stage_like(const Annot& a) {
  if (auto v = a.as<Annot::Var>()) return v->kind == VarKind::stage;
  if (a.as<Annot::Symbol>()) return true;
  if (auto c = a.as<Annot::Concrete>()) return c->value.size() == 1;
  if (auto p = a.as<Annot::Prod>()) {
    for (const auto& f : p->factors)
      if (!stage_like(f)) return false;
    return true;
  }
  return false;
}

std::string stage_inner(const Annot& a) {
  if (auto v = a.as<Annot::Var>()) return v->name;
  if (auto s = a.as<Annot::Symbol>()) return s->name;
  if (auto c = a.as<Annot::Concrete>()) return c->value.stages().front().str();
  std::string out;
  for (const auto& f : a.as<Annot::Prod>()->factors) {
    if (!out.empty()) out += "×";
    out += stage_inner(f);
  }
  return out;
}

}  // namespace

std::string Annot::str() const {
  if (auto c = as<Concrete>()) return c->value.str();
  if (stage_like(*this)) return "[" + stage_inner(*this) + "]";
  if (auto v = as<Var>()) return v->name;
  if (auto h = as<Hole>()) {
    std::string s = "?" + h->name;
    if (h->size) s += "#" + std::to_string(*h->size);
    return s;
  }
  if (auto s = as<Sum>()) {
    std::string out = "(";
    for (std::size_t i = 0; i < s->terms.size(); ++i) {
      if (i) out += " + ";
      out += s->terms[i].str();
    }
    return out + ")";
  }
  std::string out;
  for (const auto& f : as<Prod>()->factors) {
    if (!out.empty()) out += "×";
    out += f.str();
  }
  return out;
}

bool operator==(const Annot& a, const Annot& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->index() != b.node_->index()) return false;
  struct V {
    const Annot::Node& other;
    bool operator()(const Annot::Concrete& x) const {
      return x.value == std::get<Annot::Concrete>(other).value;
    }
    bool operator()(const Annot::Var& x) const { return x.id == std::get<Annot::Var>(other).id; }
    bool operator()(const Annot::Hole& x) const {
      const auto& y = std::get<Annot::Hole>(other);
      return x.name == y.name && x.size == y.size;
    }
    bool operator()(const Annot::Symbol& x) const {
      return x.name == std::get<Annot::Symbol>(other).name;
    }
    bool operator()(const Annot::Sum& x) const { return x.terms == std::get<Annot::Sum>(other).terms; }
    bool operator()(const Annot::Prod& x) const {
      return x.factors == std::get<Annot::Prod>(other).factors;
    }
  };
  return std::visit(V{*b.node_}, *a.node_);
}

// --- types -------------------------------------------------------------------

Type Type::arrow(Annot annot, Type dom, Type cod) {
  return Type(Arrow{std::move(annot), std::make_shared<const Type>(std::move(dom)),
                    std::make_shared<const Type>(std::move(cod))});
}

Type Type::acc() { return arrow(Annot::symbol("w"), exp(), com()); }

bool Type::is_concrete() const {
  if (as_base()) return true;
  return annot().is_concrete() && dom().is_concrete() && cod().is_concrete();
}

std::string Type::str() const { return pretty(*this); }

bool operator==(const Type& a, const Type& b) {
  if (a.node_ == b.node_) return true;
  if (auto x = a.as_base()) {
    auto y = b.as_base();
    return y && x->base == y->base;
  }
  if (!b.as_arrow()) return false;
  return a.annot() == b.annot() && a.dom() == b.dom() && a.cod() == b.cod();
}

bool same_skeleton(const Type& a, const Type& b) {
  if (auto x = a.as_base()) {
    auto y = b.as_base();
    return y && x->base == y->base;
  }
  if (!b.as_arrow()) return false;
  return same_skeleton(a.dom(), b.dom()) && same_skeleton(a.cod(), b.cod());
}

// --- terms -------------------------------------------------------------------

std::string to_string(ConstId c) {
  switch (c) {
    case ConstId::one: return "1";
    case ConstId::skip: return "skip";
    case ConstId::comp: return "comp";
    case ConstId::seq: return "seq";
    case ConstId::par: return "par";
    case ConstId::op: return "op";
    case ConstId::if_: return "if";
    case ConstId::new_: return "new";
  }
  return "?";
}

std::size_t param_count(ConstId c) {
  switch (c) {
    case ConstId::one:
    case ConstId::skip: return 0;
    case ConstId::par: return 1;
    case ConstId::comp:
    case ConstId::seq:
    case ConstId::op:
    case ConstId::if_:
    case ConstId::new_: return 2;
  }
  return 0;
}

Term Term::lambda(std::string name, Term body, std::optional<Binder> binder) {
  return Term(Lambda{std::move(name), std::move(binder), std::make_shared<const Term>(std::move(body))});
}

Term Term::app(Term fun, Term arg) {
  return Term(App{std::make_shared<const Term>(std::move(fun)),
                  std::make_shared<const Term>(std::move(arg))});
}

Term Term::constant(ConstId id, std::vector<Annot> params, std::optional<BaseType> sigma) {
  return Term(Const{id, sigma, std::move(params)});
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->index() != b.node_->index()) return false;
  if (auto x = a.as<Term::Var>()) return x->name == b.as<Term::Var>()->name;
  if (auto x = a.as<Term::Lambda>()) {
    auto y = b.as<Term::Lambda>();
    return x->name == y->name && x->binder == y->binder && *x->body == *y->body;
  }
  if (auto x = a.as<Term::App>()) {
    auto y = b.as<Term::App>();
    return *x->fun == *y->fun && *x->arg == *y->arg;
  }
  auto x = a.as<Term::Const>();
  auto y = b.as<Term::Const>();
  return x->id == y->id && x->sigma == y->sigma && x->params == y->params;
}

namespace {

void free_vars_into(const Term& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (auto v = t.as<Term::Var>()) {
    if (!bound.count(v->name)) out.insert(v->name);
  } else if (auto l = t.as<Term::Lambda>()) {
    bool fresh = bound.insert(l->name).second;
    free_vars_into(*l->body, bound, out);
    if (fresh) bound.erase(l->name);
  } else if (auto a = t.as<Term::App>()) {
    free_vars_into(*a->fun, bound, out);
    free_vars_into(*a->arg, bound, out);
  }
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> bound, out;
  free_vars_into(t, bound, out);
  return out;
}

std::string reader_name(const std::string& x) { return x + "_r"; }
std::string writer_name(const std::string& x) { return x + "_w"; }

// --- lexer -------------------------------------------------------------------

namespace {

enum class Tok { ident, opident, number, sym, end };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
      ++i;
    }
  };
  auto starts = [&](std::string_view s) { return src.compare(i, s.size(), s) == 0; };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (starts("//")) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t{Tok::sym, "", line, col};
    std::size_t start = i;
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) advance(1);
      t.kind = Tok::ident;
    } else if ((c == '*' || c == '+' || c == '-') && i + 1 < src.size() &&
               std::isalnum(static_cast<unsigned char>(src[i + 1]))) {
      advance(1);
      while (i < src.size() && ident_char(src[i])) advance(1);
      t.kind = Tok::opident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      auto digits = [&] {
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
      };
      digits();
      auto frac = [&] {
        if (i + 1 < src.size() && src[i] == '.' &&
            std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
          advance(1);
          digits();
        }
      };
      frac();
      if (i + 1 < src.size() && src[i] == '/' &&
          std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
        advance(1);
        digits();
        frac();
      }
      t.kind = Tok::number;
    } else {
      static const char* const syms[] = {"->", "||", ":=", "⊸", "·", "×", "λ", "(", ")", "[", "]",
                                         "{",  "}",  ";",  "!", ":", ",", "?", "#", ".", "\\", "+"};
      bool found = false;
      for (const char* s : syms) {
        if (starts(s)) {
          advance(std::string_view(s).size());
          found = true;
          break;
        }
      }
      if (!found)
        throw Error(ErrorKind::parse, std::to_string(line) + ":" + std::to_string(col) +
                                          ": unexpected character '" + std::string(1, c) + "'");
    }
    t.text = src.substr(start, i - start);
    if (t.text == "⊸") t.text = "->";
    if (t.text == "λ") t.text = "\\";
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::end, "", line, col});
  return out;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {"new", "if",  "then", "else", "skip", "op",
                                          "seq", "par", "comp", "com",  "exp",  "acc"};
  return k;
}

// --- parser ------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  Term term() { return seq_term(); }

  /// `J·θ` or `θ`; returns (annotation, type). An annotated entry without a
  /// trailing arrow is a context annotation.
  std::pair<std::optional<Annot>, Type> entry() {
    std::optional<Annot> a;
    if (starts_annot()) {
      a = annot_expr();
      expect_dot();
    }
    Type dom = type_atom();
    if (accept("->")) return {std::nullopt, Type::arrow(a ? *a : Annot::hole(), dom, type())};
    return {a, dom};
  }

  Type type() {
    auto [a, t] = entry();
    if (a) fail("annotation " + a->str() + " needs an arrow");
    return t;
  }

  Annot annot_expr() {
    std::vector<Annot> terms{annot_prod()};
    while (accept("+")) terms.push_back(annot_prod());
    return Annot::sum(std::move(terms));
  }

  void finish() {
    if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw Error(ErrorKind::parse, std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + msg);
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool is(std::string_view s, std::size_t k = 0) const {
    const Token& t = peek(k);
    return (t.kind == Tok::sym || t.kind == Tok::ident) && t.text == s;
  }
  bool accept(std::string_view s) {
    if (!is(s)) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }
  void expect_dot() {
    if (!accept("·") && !accept(".")) fail("expected '·'");
  }
  std::string ident() {
    if (peek().kind != Tok::ident || keywords().count(peek().text)) fail("expected identifier");
    return next().text;
  }
  std::string binder_name() {
    if (peek().kind == Tok::opident) return next().text;
    return ident();
  }

  // --- annotations

  bool starts_annot() const {
    const Token& t = peek();
    if (t.kind == Tok::sym) return t.text == "[" || t.text == "?";
    return t.kind == Tok::ident && !keywords().count(t.text);
  }

  Annot annot_prod() {
    std::vector<Annot> f{annot_atom()};
    while (accept("×")) f.push_back(annot_atom());
    return Annot::prod(std::move(f));
  }

  Annot annot_atom() {
    if (accept("?")) {
      std::string name;
      std::optional<std::uint64_t> size;
      if (peek().kind == Tok::ident) name = next().text;
      if (accept("#")) {
        if (peek().kind != Tok::number) fail("expected size after '#'");
        size = std::stoull(next().text);
      }
      return Annot::hole(name, size);
    }
    if (accept("(")) {
      Annot a = annot_expr();
      expect(")");
      return a;
    }
    if (accept("[")) {
      std::vector<Annot> elems;
      if (!accept("]")) {
        do {
          std::vector<Annot> factors{bracket_factor()};
          while (accept("×")) factors.push_back(bracket_factor());
          elems.push_back(Annot::prod(std::move(factors)));
        } while (accept(";"));
        expect("]");
      }
      Annot a = Annot::sum(elems);
      if (elems.empty()) return Annot::concrete(Schedule::zero());
      if (a.is_concrete()) return Annot::concrete(a.value());
      return a;
    }
    if (peek().kind == Tok::ident && !keywords().count(peek().text)) return Annot::hole(next().text);
    fail("expected annotation");
  }

  Annot bracket_factor() {
    if (accept("(")) {
      Rational s = number();
      expect(",");
      Rational p = number();
      expect(")");
      return Annot::concrete(Schedule{Stage::make(s, p)});
    }
    if (peek().kind == Tok::ident) return Annot::symbol(next().text);
    fail("expected stage");
  }

  Rational number() {
    if (peek().kind != Tok::number) fail("expected number");
    auto r = parse_rational(peek().text);
    if (!r) fail("bad number '" + peek().text + "'");
    ++pos_;
    return *r;
  }

  // --- types

  Type type_atom() {
    if (accept("com")) return Type::com();
    if (accept("exp")) return Type::exp();
    if (accept("acc")) return Type::acc();
    if (accept("(")) {
      Type t = type();
      expect(")");
      return t;
    }
    fail("expected type");
  }

  // --- terms

  Term seq_term() {
    Term lhs = par_term();
    if (accept(";")) return Term::app(Term::constant(ConstId::seq), lhs, seq_term());
    return lhs;
  }

  Term par_term() {
    Term lhs = assign_term();
    if (accept("||")) return Term::app(Term::constant(ConstId::par), lhs, par_term());
    return lhs;
  }

  Term assign_term() {
    if (peek().kind == Tok::ident && is(":=", 1)) {
      std::string x = next().text;
      ++pos_;
      if (!cells_.count(x)) fail("'" + x + "' is not a store variable");
      return Term::app(Term::var(writer_name(x)), infix_term());
    }
    return infix_term();
  }

  Term infix_term() {
    Term lhs = app_term();
    while (true) {
      if (accept("+")) {
        lhs = Term::app(Term::constant(ConstId::op), lhs, app_term());
      } else if (peek().kind == Tok::opident) {
        Term op = Term::var(next().text);
        lhs = Term::app(op, lhs, app_term());
      } else {
        return lhs;
      }
    }
  }

  bool starts_atom() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::ident: return t.text != "then" && t.text != "else";
      case Tok::number: return true;
      case Tok::sym: return t.text == "(" || t.text == "!" || t.text == "\\";
      default: return false;
    }
  }

  Term app_term() {
    if (!starts_atom()) fail(peek().kind == Tok::end ? "unexpected end of input" : "expected term");
    Term t = atom();
    while (starts_atom()) {
      // binders extend to the right; they may only close an application
      t = Term::app(t, atom());
    }
    return t;
  }

  Term atom() {
    const Token tok = peek();
    if (accept("(")) {
      if (peek().kind == Tok::opident && is(")", 1)) {
        Term v = Term::var(next().text);
        ++pos_;
        return v;
      }
      Term t = term();
      expect(")");
      return t;
    }
    if (accept("!")) {
      std::string x = ident();
      if (!cells_.count(x)) fail("'" + x + "' is not a store variable");
      return Term::var(reader_name(x));
    }
    if (accept("\\")) return lambda_rest();
    if (tok.kind == Tok::number) {
      if (tok.text != "1") fail("unknown constant '" + tok.text + "'");
      ++pos_;
      return Term::constant(ConstId::one);
    }
    if (tok.kind != Tok::ident) fail("expected term");
    if (accept("skip")) return Term::constant(ConstId::skip);
    if (is("if") && !is("{", 1)) {
      ++pos_;
      Term c = term();
      expect("then");
      Term m = term();
      expect("else");
      Term n = infix_term();
      return Term::app(Term::app(Term::constant(ConstId::if_), c), m, n);
    }
    if (is("new") && peek(1).kind == Tok::ident && (is(".", 2) || is("·", 2))) {
      pos_ += 1;
      std::string x = ident();
      ++pos_;
      cells_.insert(x);
      Term body = term();
      cells_.erase(x);
      Term inner = Term::lambda(reader_name(x), Term::lambda(writer_name(x), body));
      return Term::app(Term::constant(ConstId::new_), inner);
    }
    static const std::map<std::string, ConstId> consts = {
        {"op", ConstId::op},   {"seq", ConstId::seq}, {"par", ConstId::par},
        {"comp", ConstId::comp}, {"if", ConstId::if_}, {"new", ConstId::new_}};
    if (auto it = consts.find(tok.text); it != consts.end()) {
      ++pos_;
      return const_params(it->second);
    }
    if (keywords().count(tok.text)) fail("unexpected '" + tok.text + "'");
    std::string x = next().text;
    if (cells_.count(x)) fail("store variable '" + x + "' must be read with !" + x);
    return Term::var(x);
  }

  Term const_params(ConstId id) {
    std::optional<BaseType> sigma;
    std::vector<Annot> params;
    if (accept("{")) {
      if (!accept("}")) {
        if (id == ConstId::new_ || id == ConstId::if_) {
          if (accept("com"))
            sigma = BaseType::com;
          else if (accept("exp"))
            sigma = BaseType::exp;
          else
            fail("expected com or exp");
          if (!accept(";")) {
            expect("}");
            return Term::constant(id, {}, sigma);
          }
        }
        do params.push_back(annot_expr());
        while (accept(";"));
        expect("}");
      }
    }
    if (!params.empty() && params.size() != param_count(id))
      fail(to_string(id) + " takes " + std::to_string(param_count(id)) + " stage parameters");
    return Term::constant(id, std::move(params), sigma);
  }

  Term lambda_rest() {
    std::string x = binder_name();
    std::optional<Binder> b;
    if (accept(":")) {
      std::optional<Annot> a;
      if (starts_annot()) {
        a = annot_expr();
        expect_dot();
      }
      Type t = type_atom();
      b = Binder{a ? *a : Annot::hole(), t};
    }
    expect_dot();
    bool shadow = cells_.erase(x) > 0;
    Term body = term();
    if (shadow) cells_.insert(x);
    return Term::lambda(x, body, b);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> cells_;
};

}  // namespace

Term parse_term(const std::string& source) {
  Parser p(source);
  Term t = p.term();
  p.finish();
  return t;
}

Type parse_type(const std::string& source) {
  Parser p(source);
  Type t = p.type();
  p.finish();
  return t;
}

Annot parse_annot(const std::string& source) {
  Parser p(source);
  Annot a = p.annot_expr();
  p.finish();
  return a;
}

Document parse_document(const std::string& source) {
  Document doc;
  std::istringstream in(source);
  std::string line, term_text;
  int lineno = 0;
  auto body_of = [](const std::string& l, std::string_view kw) -> std::optional<std::string> {
    std::size_t i = l.find_first_not_of(" \t");
    if (i == std::string::npos || l.compare(i, kw.size(), kw) != 0) return std::nullopt;
    std::size_t j = i + kw.size();
    if (j < l.size() && !std::isspace(static_cast<unsigned char>(l[j]))) return std::nullopt;
    return l.substr(j);
  };
  auto located = [&](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::parse) throw;
      throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": " + e.what());
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto d = body_of(line, "declare")) {
      located([&] {
        Declaration decl;
        auto toks = lex(*d);
        if (toks.size() < 2 || (toks[0].kind != Tok::ident && toks[0].kind != Tok::opident) ||
            toks[1].text != ":")
          throw Error(ErrorKind::parse, "expected 'declare NAME : TYPE'");
        decl.name = toks[0].text;
        auto colon = d->find(':');
        Parser q(d->substr(colon + 1));
        auto [a, t] = q.entry();
        q.finish();
        decl.annot = a;
        decl.type = t;
        doc.declarations.push_back(std::move(decl));
      });
      term_text += "\n";
    } else if (auto t = body_of(line, "type")) {
      located([&] { doc.type = parse_type(*t); });
      term_text += "\n";
    } else {
      term_text += line + "\n";
    }
  }
  doc.term = parse_term(term_text);
  return doc;
}

// --- pretty-printer ------------------------------------------------------------

namespace {

bool is_opident(const std::string& s) {
  return s.size() > 1 && (s[0] == '*' || s[0] == '+' || s[0] == '-');
}

std::string dom_str(const Annot& a, const Type& t) {
  std::string ts = pretty(t);
  if (t.as_arrow()) ts = "(" + ts + ")";
  return a.str() + "·" + ts;
}

/// Matches App(...App(head, a1)..., an) and returns head and args.
Term spine(const Term& t, std::vector<Term>& args) {
  Term cur = t;
  while (auto a = cur.as<Term::App>()) {
    args.insert(args.begin(), *a->arg);
    cur = *a->fun;
  }
  return cur;
}

bool bare_const(const Term& t, ConstId id) {
  auto c = t.as<Term::Const>();
  return c && c->id == id && c->params.empty() && !c->sigma;
}

// Checks that the store-block names can be resugared without capture.
bool sugarable(const std::string& r, const std::string& w, const Term& body, bool& ok,
               std::set<std::string>& bound) {
  if (auto v = body.as<Term::Var>()) {
    if (v->name == w && !bound.count(w)) ok = false;  // writer used unapplied
    return ok;
  }
  if (auto l = body.as<Term::Lambda>()) {
    if (l->name == r || l->name == w) ok = false;
    bool fresh = bound.insert(l->name).second;
    sugarable(r, w, *l->body, ok, bound);
    if (fresh) bound.erase(l->name);
    return ok;
  }
  if (auto a = body.as<Term::App>()) {
    auto f = a->fun->as<Term::Var>();
    if (!(f && f->name == w)) sugarable(r, w, *a->fun, ok, bound);
    sugarable(r, w, *a->arg, ok, bound);
  }
  return ok;
}

struct Printer {
  PrettyOptions opts;
  std::set<std::string> cells;

  // Levels: 0 seq, 1 par, 2 assign, 3 infix, 4 app, 5 atom.
  std::string print(const Term& t, int level) {
    auto wrap = [&](int mine, std::string s) { return mine < level ? "(" + s + ")" : s; };
    if (auto v = t.as<Term::Var>()) {
      for (const auto& c : cells)
        if (v->name == reader_name(c)) return "!" + c;
      return is_opident(v->name) ? "(" + v->name + ")" : v->name;
    }
    if (auto c = t.as<Term::Const>()) return const_str(*c);
    if (auto l = t.as<Term::Lambda>()) {
      std::string s = "\\" + l->name;
      if (l->binder) s += " : " + dom_str(l->binder->annot, l->binder->type) + " ";
      std::set<std::string> saved = cells;
      cells.erase(l->name);
      s += ". " + print(*l->body, 0);
      cells = saved;
      return wrap(0, s);
    }
    std::vector<Term> args;
    Term head = spine(t, args);
    if (args.size() == 2 && bare_const(head, ConstId::seq))
      return wrap(0, print(args[0], 1) + "; " + print(args[1], 0));
    if (args.size() == 2 && bare_const(head, ConstId::par))
      return wrap(1, print(args[0], 2) + " || " + print(args[1], 1));
    if (args.size() == 2 && bare_const(head, ConstId::op))
      return wrap(3, print(args[0], 3) + " + " + print(args[1], 4));
    if (args.size() == 3 && bare_const(head, ConstId::if_))
      return wrap(0, "if " + print(args[0], 0) + " then " + print(args[1], 0) + " else " +
                          print(args[2], 3));
    if (auto v = head.as<Term::Var>(); v && args.size() == 2 && is_opident(v->name))
      return wrap(3, print(args[0], 3) + " " + v->name + " " + print(args[1], 4));
    if (auto v = head.as<Term::Var>(); v && args.size() == 1) {
      for (const auto& c : cells)
        if (v->name == writer_name(c)) return wrap(2, c + " := " + print(args[0], 3));
    }
    if (opts.sugar && args.size() == 1 && bare_const(head, ConstId::new_)) {
      if (auto outer = args[0].as<Term::Lambda>(); outer && !outer->binder) {
        if (auto inner = outer->body->as<Term::Lambda>(); inner && !inner->binder) {
          const std::string& r = outer->name;
          const std::string& w = inner->name;
          if (r.size() > 2 && w.size() > 2 && r.substr(r.size() - 2) == "_r" &&
              w.substr(w.size() - 2) == "_w" && r.substr(0, r.size() - 2) == w.substr(0, w.size() - 2)) {
            std::string x = r.substr(0, r.size() - 2);
            bool ok = !free_vars(*inner->body).count(x);
            std::set<std::string> bound;
            if (ok && sugarable(r, w, *inner->body, ok, bound)) {
              std::set<std::string> saved = cells;
              cells.insert(x);
              std::string s = "new " + x + ". " + print(*inner->body, 0);
              cells = saved;
              return wrap(0, s);
            }
          }
        }
      }
    }
    // Plain application; binders in argument position need parentheses
    // unless they are last.
    std::string s = print(head, 5);
    for (std::size_t i = 0; i < args.size(); ++i) s += " " + print(args[i], 5);
    return wrap(4, s);
  }

  static std::string const_str(const Term::Const& c) {
    std::string s = to_string(c.id);
    if (c.id == ConstId::one || c.id == ConstId::skip) return s;
    bool braces = c.sigma || !c.params.empty() || c.id == ConstId::if_ || c.id == ConstId::new_;
    if (!braces) return s;
    s += "{";
    bool first = true;
    if (c.sigma) {
      s += *c.sigma == BaseType::com ? "com" : "exp";
      first = false;
    }
    for (const auto& p : c.params) {
      if (!first) s += ";";
      first = false;
      s += p.str();
    }
    return s + "}";
  }
};

}  // namespace

std::string pretty(const Term& t, const PrettyOptions& opts) {
  Printer p{opts, {}};
  return p.print(t, 0);
}

std::string pretty(const Type& t) {
  if (auto b = t.as_base()) return b->base == BaseType::com ? "com" : "exp";
  return dom_str(t.annot(), t.dom()) + " -> " + pretty(t.cod());
}

std::string pretty(const Declaration& d) {
  std::string s = d.name + " : ";
  if (d.annot) return s + dom_str(*d.annot, d.type);
  return s + pretty(d.type);
}

std::string pretty(const Document& d, const PrettyOptions& opts) {
  std::string s;
  for (const auto& decl : d.declarations) s += "declare " + pretty(decl) + "\n";
  s += pretty(d.term, opts) + "\n";
  if (d.type) s += "type " + pretty(*d.type) + "\n";
  return s;
}

}  // namespace pia
