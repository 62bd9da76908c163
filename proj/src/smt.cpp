// SPDX-License-Identifier: Apache-2.0

#include "pia/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>

#include "pia/error.hpp"

namespace pia {

// --- s-expressions -----------------------------------------------------------

std::string SExpr::str() const {
  if (is_atom()) return atom;
  std::string s = "(";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) s += " ";
    s += list[i].str();
  }
  return s + ")";
}

std::vector<SExpr> parse_sexprs(const std::string& text) {
  std::vector<std::vector<SExpr>> stack(1);
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      stack.emplace_back();
      ++i;
    } else if (c == ')') {
      if (stack.size() < 2) throw Error(ErrorKind::solver, "unbalanced ')' in solver output");
      SExpr e;
      e.list = std::move(stack.back());
      stack.pop_back();
      stack.back().push_back(std::move(e));
      ++i;
    } else if (c == '"' || c == '|') {
      std::size_t j = text.find(c, i + 1);
      if (j == std::string::npos) throw Error(ErrorKind::solver, "unterminated literal in solver output");
      stack.back().push_back(SExpr{text.substr(i, j - i + 1), {}});
      i = j + 1;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
             text[j] != ')')
        ++j;
      stack.back().push_back(SExpr{text.substr(i, j - i), {}});
      i = j;
    }
  }
  if (stack.size() != 1) throw Error(ErrorKind::solver, "unbalanced '(' in solver output");
  return std::move(stack.front());
}

std::optional<Rational> sexpr_rational(const SExpr& e) {
  if (e.is_atom()) return parse_rational(e.atom);
  if (e.list.size() == 2 && e.list[0].atom == "-") {
    auto v = sexpr_rational(e.list[1]);
    if (v) *v = -*v;
    return v;
  }
  if (e.list.size() == 3 && e.list[0].atom == "/") {
    auto n = sexpr_rational(e.list[1]);
    auto d = sexpr_rational(e.list[2]);
    if (!n || !d || *d == 0) return std::nullopt;
    Rational r = *n / *d;
    r.canonicalize();
    return r;
  }
  return std::nullopt;
}

// --- stage terms ----------------------------------------------------------------

std::string str(const StageTerm& t, const std::vector<std::string>& names) {
  if (t.empty()) return "I";
  std::string s;
  for (const auto& f : t) {
    if (!s.empty()) s += "∘";
    if (auto i = std::get_if<int>(&f))
      s += names.at(static_cast<std::size_t>(*i));
    else
      s += std::get<Stage>(f).str();
  }
  return s;
}

Stage evaluate(const StageTerm& t, const std::vector<Stage>& values) {
  Stage out = Stage::identity();
  for (const auto& f : t) {
    const Stage& x = std::holds_alternative<int>(f) ? values.at(static_cast<std::size_t>(std::get<int>(f)))
                                                    : std::get<Stage>(f);
    out = out.compose(x);
  }
  return out;
}

bool holds(const StageAtom& a, const std::vector<Stage>& values) {
  using K = StageAtom::Kind;
  if (a.kind == K::falsum) return false;
  Stage x = evaluate(a.a, values);
  switch (a.kind) {
    case K::eq: return x == evaluate(a.b, values);
    case K::before: return strictly_before(x, evaluate(a.b, values));
    case K::strict_fifo: return strict_fifo(x, evaluate(a.b, values));
    case K::em_leq: return stage_orders(x, evaluate(a.b, values)).egli_milner_leq;
    case K::lex_leq: {
      Stage y = evaluate(a.b, values);
      return x.phase() < y.phase() || (x.phase() == y.phase() && x.scale() <= y.scale());
    }
    case K::not_identity: return !x.is_identity();
    case K::nonzero_scale: return x.scale() != 0;
    case K::bound: {
      const Rational& v = a.component == Component::scale ? x.scale() : x.phase();
      return a.cmp == Cmp::eq ? v == a.value : a.cmp == Cmp::le ? v <= a.value : v >= a.value;
    }
    case K::falsum: break;
  }
  return false;
}

bool holds(const StageProblem& p, const std::vector<Stage>& values) {
  for (const auto& a : p.atoms)
    if (!holds(a, values)) return false;
  return true;
}

// --- reduction ------------------------------------------------------------------

ReducedProblem reduce(const StageProblem& p) {
  using K = StageAtom::Kind;
  const std::size_t n = p.names.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  std::map<std::size_t, Stage> value;  // by class root
  bool conflict = false;
  auto pin = [&](std::size_t root, const Stage& s) {
    if (!Stage::is_contractive(s.scale(), s.phase())) conflict = true;
    auto [it, fresh] = value.emplace(root, s);
    if (!fresh && !(it->second == s)) conflict = true;
  };
  auto single = [](const StageTerm& t) -> const int* {
    return t.size() == 1 ? std::get_if<int>(&t[0]) : nullptr;
  };
  auto constant = [](const StageTerm& t) -> std::optional<Stage> {
    if (t.empty()) return Stage::identity();
    if (t.size() == 1)
      if (auto s = std::get_if<Stage>(&t[0])) return *s;
    return std::nullopt;
  };
  std::vector<bool> eliminated(p.atoms.size(), false);
  for (std::size_t k = 0; k < p.atoms.size(); ++k) {
    const StageAtom& a = p.atoms[k];
    if (a.kind != K::eq) continue;
    const int *u = single(a.a), *v = single(a.b);
    if (u && v) {
      std::size_t ru = find(static_cast<std::size_t>(*u)), rv = find(static_cast<std::size_t>(*v));
      if (ru != rv) {
        parent[rv] = ru;
        if (auto it = value.find(rv); it != value.end()) {
          Stage s = it->second;
          value.erase(it);
          pin(ru, s);
        }
      }
      eliminated[k] = true;
    } else if (u) {
      if (auto c = constant(a.b)) {
        pin(find(static_cast<std::size_t>(*u)), *c);
        eliminated[k] = true;
      }
    } else if (v) {
      if (auto c = constant(a.a)) {
        pin(find(static_cast<std::size_t>(*v)), *c);
        eliminated[k] = true;
      }
    }
  }

  ReducedProblem r;
  std::map<std::size_t, int> index;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = find(i);
    if (auto it = value.find(root); it != value.end()) {
      r.map.push_back(it->second);
      continue;
    }
    auto [it, fresh] = index.emplace(root, static_cast<int>(r.problem.names.size()));
    if (fresh) r.problem.names.push_back(p.names[root]);
    r.map.push_back(it->second);
  }
  auto rewrite = [&](const StageTerm& t) {
    StageTerm out;
    for (const auto& f : t) {
      StageFactor g = std::holds_alternative<int>(f) ? r.map[static_cast<std::size_t>(std::get<int>(f))] : f;
      if (auto s = std::get_if<Stage>(&g)) {
        if (s->is_identity()) continue;
        if (!out.empty())
          if (auto last = std::get_if<Stage>(&out.back())) {
            *last = last->compose(*s);
            continue;
          }
      }
      out.push_back(g);
    }
    return out;
  };
  auto is_ground = [](const StageTerm& t) {
    return std::all_of(t.begin(), t.end(), [](const StageFactor& f) { return std::holds_alternative<Stage>(f); });
  };
  if (conflict) r.problem.atoms.push_back({K::falsum, {}, {}});
  for (std::size_t k = 0; k < p.atoms.size(); ++k) {
    if (eliminated[k]) continue;
    StageAtom a = p.atoms[k];
    a.a = rewrite(a.a);
    a.b = rewrite(a.b);
    if (a.kind != K::falsum && is_ground(a.a) && is_ground(a.b)) {
      if (!holds(a, {})) r.problem.atoms.push_back({K::falsum, {}, {}});
      continue;
    }
    r.problem.atoms.push_back(std::move(a));
  }
  return r;
}

std::vector<Stage> expand(const ReducedProblem& r, const std::vector<Stage>& values) {
  std::vector<Stage> out;
  for (const auto& f : r.map)
    out.push_back(std::holds_alternative<Stage>(f) ? std::get<Stage>(f)
                                                   : values.at(static_cast<std::size_t>(std::get<int>(f))));
  return out;
}

// --- emission -------------------------------------------------------------------

namespace {

std::string real(const Rational& r) {
  auto lit = [](const mpz_class& z) { return z.get_str() + ".0"; };
  mpz_class n = r.get_num(), d = r.get_den();
  bool neg = n < 0;
  if (neg) n = -n;
  std::string s = d == 1 ? lit(n) : "(/ " + lit(n) + " " + lit(d) + ")";
  return neg ? "(- " + s + ")" : s;
}

std::string size_expr(const SizeProblem& p, const SizeTerm& t) {
  switch (t.kind) {
    case SizeTerm::Kind::var: return p.names.at(static_cast<std::size_t>(t.var));
    case SizeTerm::Kind::lit: return std::to_string(t.lit);
    case SizeTerm::Kind::add:
    case SizeTerm::Kind::mul: break;
  }
  if (t.args.empty()) return t.kind == SizeTerm::Kind::add ? "0" : "1";
  if (t.args.size() == 1) return size_expr(p, t.args[0]);
  std::string s = t.kind == SizeTerm::Kind::add ? "(+" : "(*";
  for (const auto& a : t.args) s += " " + size_expr(p, a);
  return s + ")";
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
  return out;
}

// Scale and phase of a composition chain: s = s1 s2 ..., p = p1 + s1 (p2 + s2 (...)).
struct Affine {
  std::string scale, phase;
};

Affine affine(const StageProblem& p, const StageTerm& t) {
  // Fold from the innermost factor outwards.
  std::string s = "1.0", ph = "0.0";
  bool identity = true;
  for (auto it = t.rbegin(); it != t.rend(); ++it) {
    std::string fs, fp;
    if (auto i = std::get_if<int>(&*it)) {
      fs = scale_symbol(p, static_cast<std::size_t>(*i));
      fp = phase_symbol(p, static_cast<std::size_t>(*i));
    } else {
      fs = real(std::get<Stage>(*it).scale());
      fp = real(std::get<Stage>(*it).phase());
    }
    if (identity) {
      s = fs;
      ph = fp;
      identity = false;
    } else {
      ph = "(+ " + fp + " (* " + fs + " " + ph + "))";
      s = "(* " + fs + " " + s + ")";
    }
  }
  return {s, ph};
}

}  // namespace

std::string scale_symbol(const StageProblem& p, std::size_t i) {
  return "s" + std::to_string(i) + "_" + sanitize(p.names.at(i));
}

std::string phase_symbol(const StageProblem& p, std::size_t i) {
  return "p" + std::to_string(i) + "_" + sanitize(p.names.at(i));
}

std::string SmtScript::text() const {
  std::string s = "(set-logic " + logic + ")\n";
  for (const auto& d : declarations) s += d + "\n";
  for (const auto& a : assertions) s += "(assert " + a + ")\n";
  for (const auto& c : commands) s += c + "\n";
  return s;
}

SmtScript emit_sizes(const SizeProblem& p, std::uint64_t bound, std::uint64_t lower) {
  SmtScript s;
  s.logic = "QF_NIA";
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    s.declarations.push_back("(declare-fun " + p.names[i] + " () Int)");
    std::uint64_t lo = p.bounded.at(i) ? lower : 0;
    s.assertions.push_back("(>= " + p.names[i] + " " + std::to_string(lo) + ")");
    if (p.bounded.at(i)) s.assertions.push_back("(<= " + p.names[i] + " " + std::to_string(bound) + ")");
  }
  for (const auto& [l, r] : p.eqs) s.assertions.push_back("(= " + size_expr(p, l) + " " + size_expr(p, r) + ")");
  s.commands = {"(check-sat)", "(get-model)"};
  return s;
}

SmtScript emit_stages(const StageProblem& p) {
  using K = StageAtom::Kind;
  SmtScript s;
  s.logic = "QF_NRA";
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    std::string sc = scale_symbol(p, i), ph = phase_symbol(p, i);
    s.declarations.push_back("(declare-fun " + sc + " () Real)");
    s.declarations.push_back("(declare-fun " + ph + " () Real)");
    s.assertions.push_back("(<= 0.0 " + sc + ")");
    s.assertions.push_back("(<= " + sc + " 1.0)");
    s.assertions.push_back("(<= 0.0 " + ph + ")");
    s.assertions.push_back("(<= (+ " + sc + " " + ph + ") 1.0)");
  }
  for (const auto& a : p.atoms) {
    if (a.kind == K::falsum) {
      s.assertions.push_back("false");
      continue;
    }
    Affine x = affine(p, a.a);
    Affine y = a.kind == K::eq || a.kind == K::before || a.kind == K::strict_fifo || a.kind == K::em_leq ||
                           a.kind == K::lex_leq
                   ? affine(p, a.b)
                   : Affine{};
    std::string xe = "(+ " + x.scale + " " + x.phase + ")";
    std::string ye = "(+ " + y.scale + " " + y.phase + ")";
    switch (a.kind) {
      case K::eq:
        s.assertions.push_back("(= " + x.scale + " " + y.scale + ")");
        s.assertions.push_back("(= " + x.phase + " " + y.phase + ")");
        break;
      case K::before: s.assertions.push_back("(< " + xe + " " + y.phase + ")"); break;
      case K::strict_fifo:
        s.assertions.push_back("(< " + x.phase + " " + y.phase + ")");
        s.assertions.push_back("(< " + xe + " " + ye + ")");
        break;
      case K::em_leq:
        s.assertions.push_back("(<= " + x.phase + " " + y.phase + ")");
        s.assertions.push_back("(<= " + xe + " " + ye + ")");
        break;
      case K::lex_leq:
        s.assertions.push_back("(or (< " + x.phase + " " + y.phase + ") (and (= " + x.phase + " " + y.phase +
                               ") (<= " + x.scale + " " + y.scale + ")))");
        break;
      case K::not_identity:
        s.assertions.push_back("(not (and (= " + x.scale + " 1.0) (= " + x.phase + " 0.0)))");
        break;
      case K::nonzero_scale: s.assertions.push_back("(not (= " + x.scale + " 0.0))"); break;
      case K::bound: {
        const char* op = a.cmp == Cmp::eq ? "=" : a.cmp == Cmp::le ? "<=" : ">=";
        const std::string& v = a.component == Component::scale ? x.scale : x.phase;
        s.assertions.push_back(std::string("(") + op + " " + v + " " + real(a.value) + ")");
        break;
      }
      case K::falsum: break;
    }
  }
  s.commands = {"(check-sat)", "(get-model)"};
  return s;
}

// --- solver process -------------------------------------------------------------

std::string default_solver_command() {
  if (const char* env = std::getenv("PIA_SOLVER"); env && *env) return env;
  return "z3 -in -smt2";
}

std::string to_string(SolverResult::Status s) {
  switch (s) {
    case SolverResult::Status::sat: return "sat";
    case SolverResult::Status::unsat: return "unsat";
    case SolverResult::Status::unknown: return "unknown";
    case SolverResult::Status::timeout: return "timeout";
  }
  return "?";
}

namespace {

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream in(cmd);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

SolverResult run_solver(const std::string& script, const SolverConfig& cfg) {
  auto argv_s = split_command(cfg.command);
  if (argv_s.empty()) throw Error(ErrorKind::solver, "empty solver command");
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw Error(ErrorKind::solver, std::string("pipe: ") + std::strerror(errno));
  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) throw Error(ErrorKind::solver, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in_pipe[0], 0);
    dup2(out_pipe[1], 1);
    dup2(out_pipe[1], 2);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  signal(SIGPIPE, SIG_IGN);

  std::size_t written = 0;
  std::string output;
  bool timed_out = false;
  int in_fd = in_pipe[1];
  char buf[65536];
  while (true) {
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > cfg.timeout_seconds) {
      timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    pollfd fds[2];
    int n = 0;
    fds[n++] = {out_pipe[0], POLLIN, 0};
    if (in_fd >= 0) fds[n++] = {in_fd, POLLOUT, 0};
    int rc = poll(fds, static_cast<nfds_t>(n), 100);
    if (rc < 0 && errno != EINTR) break;
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = write(in_fd, script.data() + written, script.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = script.size();
      if (written >= script.size()) {
        close(in_fd);
        in_fd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      ssize_t r = read(out_pipe[0], buf, sizeof buf);
      if (r <= 0) break;
      output.append(buf, static_cast<std::size_t>(r));
    }
  }
  if (in_fd >= 0) close(in_fd);
  close(out_pipe[0]);
  int status = 0;
  waitpid(pid, &status, 0);

  SolverResult res;
  res.output = output;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (timed_out) {
    res.status = SolverResult::Status::timeout;
    return res;
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
    throw Error(ErrorKind::solver, "cannot run solver '" + cfg.command + "'");
  std::vector<SExpr> items = parse_sexprs(output);
  if (items.empty()) throw Error(ErrorKind::solver, "no output from solver '" + cfg.command + "'");
  const std::string& head = items[0].atom;
  if (head == "sat")
    res.status = SolverResult::Status::sat;
  else if (head == "unsat")
    res.status = SolverResult::Status::unsat;
  else if (head == "unknown" || head == "timeout")
    res.status = SolverResult::Status::unknown;
  else
    throw Error(ErrorKind::solver, "unexpected solver output: " + output.substr(0, 200));
  for (std::size_t i = 1; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (e.is_atom()) continue;
    if (!e.list.empty() && e.list[0].atom == "error") {
      // get-model after unsat or unknown is expected to fail.
      if (res.status != SolverResult::Status::sat) continue;
      throw Error(ErrorKind::solver, "solver error: " + e.str());
    }
    for (const SExpr& b : e.list) {
      if (b.is_atom()) continue;
      // (define-fun name () Sort value) or (name value)
      if (b.list.size() == 5 && b.list[0].atom == "define-fun")
        res.values[b.list[1].atom] = b.list[4];
      else if (b.list.size() == 2 && b.list[0].is_atom())
        res.values[b.list[0].atom] = b.list[1];
    }
  }
  return res;
}

std::vector<Stage> read_stages(const StageProblem& p, const SolverResult& r) {
  std::vector<Stage> out;
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    auto get = [&](const std::string& sym) {
      auto it = r.values.find(sym);
      if (it == r.values.end()) return Rational(0);  // unconstrained symbols may be omitted
      auto v = sexpr_rational(it->second);
      if (!v) throw Error(ErrorKind::solver, "non-rational model value for " + sym + ": " + it->second.str());
      return *v;
    };
    Rational s = get(scale_symbol(p, i)), ph = get(phase_symbol(p, i));
    if (!Stage::is_contractive(s, ph))
      throw Error(ErrorKind::solver, "solver returned a non-contractive stage for " + p.names[i]);
    out.push_back(Stage::make(s, ph));
  }
  return out;
}

std::map<std::string, std::uint64_t> read_sizes(const SizeProblem& p, const SolverResult& r) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& n : p.names) {
    auto it = r.values.find(n);
    std::uint64_t v = 0;
    if (it != r.values.end()) {
      auto q = sexpr_rational(it->second);
      if (!q || q->get_den() != 1 || *q < 0)
        throw Error(ErrorKind::solver, "bad size value for " + n + ": " + it->second.str());
      v = q->get_num().get_ui();
    }
    out[n] = v;
  }
  return out;
}

// --- grid oracle ------------------------------------------------------------------

std::optional<std::vector<Stage>> brute_oracle(const StageProblem& p, const Rational& step,
                                               std::size_t max_unknowns) {
  const std::size_t n = p.names.size();
  if (n > max_unknowns)
    throw Error(ErrorKind::mismatch, "grid oracle: " + std::to_string(n) + " unknowns exceed the limit of " +
                                         std::to_string(max_unknowns));
  if (step <= 0 || step > 1) throw Error(ErrorKind::mismatch, "grid oracle: step must be in (0, 1]");
  std::vector<Stage> grid;
  for (Rational s = 0; s <= 1; s += step)
    for (Rational ph = 0; s + ph <= 1; ph += step) grid.push_back(Stage::make(s, ph));

  // Atoms are checked as soon as their highest unknown is assigned.
  std::vector<std::vector<const StageAtom*>> at(n + 1);
  for (const auto& a : p.atoms) {
    int hi = -1;
    for (const StageTerm* t : {&a.a, &a.b})
      for (const auto& f : *t)
        if (auto i = std::get_if<int>(&f)) hi = std::max(hi, *i);
    at[static_cast<std::size_t>(hi + 1)].push_back(&a);
  }
  for (const StageAtom* a : at[0])
    if (!holds(*a, {})) return std::nullopt;

  std::vector<Stage> values(n, Stage::identity());
  std::function<bool(std::size_t)> go = [&](std::size_t k) {
    if (k == n) return true;
    for (const Stage& g : grid) {
      values[k] = g;
      bool ok = true;
      for (const StageAtom* a : at[k + 1])
        if (!holds(*a, values)) {
          ok = false;
          break;
        }
      if (ok && go(k + 1)) return true;
    }
    return false;
  };
  if (go(0)) return values;
  return std::nullopt;
}

}  // namespace pia
