// SPDX-License-Identifier: Apache-2.0

#include "pia/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <future>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "pia/error.hpp"

namespace pia {

// --- configuration ----------------------------------------------------------------

GenOptions SolveConfig::gen_options() const {
  GenOptions g;
  g.pipeline = pipeline;
  g.write_stage = write_stage;
  g.write_scale = write_scale;
  return g;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Rational config_rational(const std::string& key, const std::string& v) {
  auto r = parse_rational(v);
  if (!r) throw Error(ErrorKind::io, "config: bad number for " + key + ": '" + v + "'");
  return *r;
}

std::uint64_t config_natural(const std::string& key, const std::string& v) {
  Rational r = config_rational(key, v);
  if (r < 0 || r.get_den() != 1) throw Error(ErrorKind::io, "config: " + key + " must be a natural number");
  return r.get_num().get_ui();
}

bool config_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::io, "config: " + key + " must be true or false");
}

void validate(const SolveConfig& c) {
  if (c.size_bound_start < 1) throw Error(ErrorKind::io, "config: size_bound_start must be at least 1");
  if (c.size_bound_max < c.size_bound_start)
    throw Error(ErrorKind::io, "config: size_bound_max is below size_bound_start");
  Rational ws = c.write_stage ? c.write_stage->scale() : c.write_scale;
  if (ws <= 0 || ws > 1) throw Error(ErrorKind::io, "config: the write stage needs a scale in (0, 1]");
}

}  // namespace

SolveConfig parse_config(const std::string& text, SolveConfig c) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eqpos = line.find('=');
    if (eqpos == std::string::npos)
      throw Error(ErrorKind::io, "config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eqpos)), v = trim(line.substr(eqpos + 1));
    if (key == "write_stage") {
      auto comma = v.find(',');
      if (comma == std::string::npos) throw Error(ErrorKind::io, "config: write_stage is scale,phase");
      Rational s = config_rational(key, trim(v.substr(0, comma)));
      Rational p = config_rational(key, trim(v.substr(comma + 1)));
      if (!Stage::is_contractive(s, p)) throw Error(ErrorKind::io, "config: write_stage is not contractive");
      c.write_stage = Stage::make(s, p);
    } else if (key == "write_scale") {
      c.write_scale = config_rational(key, v);
    } else if (key == "pipeline") {
      c.pipeline = config_bool(key, v);
    } else if (key == "size_bound_start") {
      c.size_bound_start = config_natural(key, v);
    } else if (key == "size_bound_max") {
      c.size_bound_max = config_natural(key, v);
    } else if (key == "order_retry_budget") {
      c.order_retry_budget = config_natural(key, v);
    } else if (key == "sequential") {
      c.sequential = config_bool(key, v);
    } else if (key == "jobs") {
      c.jobs = config_natural(key, v);
    } else if (key == "solver") {
      c.solver.command = v;
    } else if (key == "timeout") {
      c.solver.timeout_seconds = to_double(config_rational(key, v));
    } else if (key.rfind("fix.", 0) == 0 && key.size() > 4) {
      try {
        c.fixed[key.substr(4)] = parse_annot(v).value();
      } catch (const Error& e) {
        throw Error(ErrorKind::io, "config: bad schedule for " + key + ": " + e.what());
      }
    } else {
      throw Error(ErrorKind::io, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

SolveConfig load_config(const std::string& path, SolveConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

// --- shared helpers -----------------------------------------------------------------

namespace {

const VarInfo& info(const ConstraintSystem& sys, int id) { return sys.vars.at(static_cast<std::size_t>(id)); }

std::map<int, Schedule> fixed_vars(const ConstraintSystem& sys, const SolveConfig& cfg) {
  std::map<int, Schedule> out;
  for (const auto& [name, value] : cfg.fixed) {
    auto it = std::find_if(sys.vars.begin(), sys.vars.end(), [&](const VarInfo& v) { return v.name == name; });
    if (it == sys.vars.end()) throw Error(ErrorKind::io, "fixed value for unknown variable '" + name + "'");
    if (it->kind == VarKind::stage && value.size() != 1)
      throw Error(ErrorKind::io, "stage variable '" + name + "' needs a single stage");
    out[it->id] = value;
  }
  return out;
}

std::map<int, Annot> definitions(const ConstraintSystem& sys) {
  std::map<int, Annot> out;
  for (const auto& c : sys.constraints)
    if (c.kind == Constraint::Kind::def) out.emplace(c.lhs.as<Annot::Var>()->id, c.rhs);
  return out;
}

std::string symbol_name(const std::string& name) {
  std::string out;
  for (char ch : name) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ? ch : '_';
  return out;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// --- sizes --------------------------------------------------------------------------

namespace {

struct SizeAbstraction {
  SizeProblem problem;
  std::map<int, int> index;  // var id -> size-problem variable
};

SizeTerm size_lit(std::uint64_t n) { return {SizeTerm::Kind::lit, -1, n, {}}; }

SizeTerm size_term(const Annot& a, const ConstraintSystem& sys, const std::map<int, Schedule>& fixed,
                   const std::map<int, int>& index) {
  if (auto c = a.as<Annot::Concrete>()) return size_lit(c->value.size());
  if (auto v = a.as<Annot::Var>()) {
    if (auto f = fixed.find(v->id); f != fixed.end()) return size_lit(f->second.size());
    if (info(sys, v->id).kind == VarKind::stage) return size_lit(1);
    return {SizeTerm::Kind::var, index.at(v->id), 0, {}};
  }
  SizeTerm t;
  std::vector<Annot> parts;
  if (auto s = a.as<Annot::Sum>()) {
    t.kind = SizeTerm::Kind::add;
    parts = s->terms;
  } else if (auto p = a.as<Annot::Prod>()) {
    t.kind = SizeTerm::Kind::mul;
    parts = p->factors;
  } else {
    throw Error(ErrorKind::internal, "unresolved annotation " + a.str());
  }
  for (const auto& x : parts) t.args.push_back(size_term(x, sys, fixed, index));
  return t;
}

std::uint64_t size_value(const SizeTerm& t, const std::vector<std::uint64_t>& v) {
  switch (t.kind) {
    case SizeTerm::Kind::var: return v.at(static_cast<std::size_t>(t.var));
    case SizeTerm::Kind::lit: return t.lit;
    case SizeTerm::Kind::add: {
      std::uint64_t s = 0;
      for (const auto& a : t.args) s += size_value(a, v);
      return s;
    }
    case SizeTerm::Kind::mul: {
      std::uint64_t s = 1;
      for (const auto& a : t.args) s *= size_value(a, v);
      return s;
    }
  }
  return 0;
}

SizeAbstraction abstract_sizes(const ConstraintSystem& sys, const SolveConfig& cfg) {
  SizeAbstraction out;
  auto fixed = fixed_vars(sys, cfg);
  auto defs = definitions(sys);
  for (const auto& v : sys.vars) {
    if (v.kind != VarKind::schedule || fixed.count(v.id)) continue;
    out.index[v.id] = static_cast<int>(out.problem.names.size());
    out.problem.names.push_back("n" + std::to_string(v.id) + "_" + symbol_name(v.name));
    out.problem.bounded.push_back(!defs.count(v.id));
  }
  auto term = [&](const Annot& a) { return size_term(a, sys, fixed, out.index); };
  for (const auto& c : sys.constraints) {
    switch (c.kind) {
      case Constraint::Kind::eq:
      case Constraint::Kind::def: out.problem.eqs.emplace_back(term(c.lhs), term(c.rhs)); break;
      case Constraint::Kind::size: out.problem.eqs.emplace_back(term(c.lhs), size_lit(c.size)); break;
      default: break;
    }
  }
  return out;
}

}  // namespace

SizeProblem size_problem(const ConstraintSystem& sys, const SolveConfig& cfg) {
  return abstract_sizes(sys, cfg).problem;
}

SizePhase solve_sizes(const ConstraintSystem& sys, const SolveConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  SizeAbstraction abs = abstract_sizes(sys, cfg);
  const SizeProblem& p = abs.problem;
  SizePhase out;
  if (p.names.empty()) {
    for (const auto& [l, r] : p.eqs)
      if (size_value(l, {}) != size_value(r, {}))
        throw Error(ErrorKind::unsat, "size-unsatisfiable: concrete schedule sizes disagree");
    out.seconds = since(t0);
    return out;
  }
  bool any_bounded = std::find(p.bounded.begin(), p.bounded.end(), true) != p.bounded.end();
  // Nonzero sizes for free schedules are tried over every bound before
  // allowing 𝟘, which would discard the argument.
  for (std::uint64_t lower : {std::uint64_t{1}, std::uint64_t{0}}) {
    if (lower == 1 && !any_bounded) continue;
    for (std::uint64_t b = std::max(cfg.size_bound_start, lower); b <= cfg.size_bound_max; ++b) {
      SmtScript s = emit_sizes(p, b, lower);
      out.last_script = s.text();
      out.variables = s.variables();
      out.assertions = s.assertions.size();
      out.bound = b;
      ++out.solver_calls;
      SolverResult r = run_solver(out.last_script, cfg.solver);
      if (r.status == SolverResult::Status::sat) {
        auto named = read_sizes(p, r);
        for (const auto& [id, i] : abs.index) out.sizes[id] = named.at(p.names[static_cast<std::size_t>(i)]);
        out.seconds = since(t0);
        return out;
      }
      if (r.status != SolverResult::Status::unsat)
        throw Error(ErrorKind::solver, "solver-timeout: size phase returned " + to_string(r.status));
      if (!any_bounded) break;
    }
  }
  throw Error(ErrorKind::unsat,
              "size-unsatisfiable: no size model with bound up to " + std::to_string(cfg.size_bound_max));
}

// --- stage lowering -----------------------------------------------------------------

namespace {

bool ground(const StageTerm& t) {
  return std::all_of(t.begin(), t.end(), [](const StageFactor& f) { return std::holds_alternative<Stage>(f); });
}

StageTerm compose(const StageTerm& a, const StageTerm& b) {
  StageTerm out = a;
  for (const auto& f : b) {
    if (auto s = std::get_if<Stage>(&f)) {
      if (s->is_identity()) continue;
      if (!out.empty())
        if (auto last = std::get_if<Stage>(&out.back())) {
          *last = last->compose(*s);
          continue;
        }
    }
    out.push_back(f);
  }
  return out;
}

std::vector<StageTerm> stage_list(const Schedule& s) {
  std::vector<StageTerm> out;
  for (const auto& x : s.stages()) out.push_back(x.is_identity() ? StageTerm{} : StageTerm{x});
  return out;
}

Schedule ground_value(const std::vector<StageTerm>& l) {
  Schedule s;
  for (const auto& t : l) s = s + Schedule{evaluate(t, {})};
  return s;
}

}  // namespace

Lowering::Lowering(const ConstraintSystem& sys, const Sizes& sizes, const SolveConfig& cfg)
    : sys_(&sys), fixed_(fixed_vars(sys, cfg)), defs_(definitions(sys)) {
  const bool pipe = sys.pipeline;
  const auto chain_kind = pipe ? StageAtom::Kind::strict_fifo : StageAtom::Kind::lex_leq;

  auto push = [&](StageAtom a) {
    bool g = ground(a.a) && ground(a.b);
    if (!g) {
      fixed_atoms_.push_back(std::move(a));
    } else if (!holds(a, {})) {
      fixed_atoms_.push_back(StageAtom{StageAtom::Kind::falsum, {}, {}});
    }
  };

  // Unknowns for free variables, in variable order.
  for (const auto& v : sys.vars) {
    if (fixed_.count(v.id) || defs_.count(v.id)) continue;
    std::size_t n = v.kind == VarKind::stage ? 1 : sizes.at(v.id);
    auto& idx = unknowns_[v.id];
    for (std::size_t i = 0; i < n; ++i) {
      idx.push_back(static_cast<int>(names_.size()));
      names_.push_back(n == 1 ? v.name : v.name + "." + std::to_string(i));
    }
    for (std::size_t i = 0; i + 1 < n; ++i) push({chain_kind, {idx[i]}, {idx[i + 1]}});
  }

  std::map<int, std::vector<StageTerm>> def_lists;
  std::map<int, int> def_items;
  std::set<int> expanding;
  std::function<std::vector<StageTerm>(const Annot&)> list;
  std::function<std::vector<StageTerm>(int)> var_list = [&](int id) -> std::vector<StageTerm> {
    if (auto f = fixed_.find(id); f != fixed_.end()) return stage_list(f->second);
    if (auto u = unknowns_.find(id); u != unknowns_.end()) {
      std::vector<StageTerm> out;
      for (int i : u->second) out.push_back({i});
      return out;
    }
    if (auto d = def_lists.find(id); d != def_lists.end()) return d->second;
    if (!expanding.insert(id).second)
      throw Error(ErrorKind::internal, "cyclic definition of " + info(sys, id).name);
    auto l = list(defs_.at(id));
    expanding.erase(id);
    return def_lists[id] = l;
  };
  list = [&](const Annot& a) -> std::vector<StageTerm> {
    if (auto c = a.as<Annot::Concrete>()) return stage_list(c->value);
    if (auto v = a.as<Annot::Var>()) return var_list(v->id);
    if (auto s = a.as<Annot::Sum>()) {
      std::vector<StageTerm> out;
      for (const auto& t : s->terms) {
        auto l = list(t);
        out.insert(out.end(), l.begin(), l.end());
      }
      return out;
    }
    if (auto p = a.as<Annot::Prod>()) {
      std::vector<StageTerm> out{StageTerm{}};
      for (const auto& f : p->factors) {
        auto l = list(f);
        std::vector<StageTerm> next;
        for (const auto& x : out)
          for (const auto& y : l) next.push_back(compose(x, y));
        out = std::move(next);
      }
      return out;
    }
    throw Error(ErrorKind::internal, "unresolved annotation " + a.str());
  };

  auto new_item = [&](std::string what, std::size_t n) {
    if (n < 2) return -1;
    items_.push_back({std::move(what), n});
    return static_cast<int>(items_.size()) - 1;
  };
  // A defined schedule in pipeline mode is kept in its guessed chain order.
  auto def_perm = [&](int id) {
    auto l = var_list(id);
    auto it = def_items.find(id);
    if (it == def_items.end()) {
      it = def_items.emplace(id, new_item("order of " + info(sys, id).name, l.size())).first;
      chains_.push_back({Perm{it->second, l}, StageAtom::Kind::strict_fifo});
    }
    return Perm{it->second, l};
  };
  // Sides whose list order is already canonical: free variables (chained),
  // concrete schedules (sorted) and, in pipeline mode, defined variables.
  auto canonical = [&](const Annot& a) -> std::optional<Perm> {
    if (auto c = a.as<Annot::Concrete>()) {
      if (!pipe || is_pipeline(c->value) || c->value.size() < 2) return Perm{-1, stage_list(c->value)};
      return std::nullopt;
    }
    if (auto v = a.as<Annot::Var>()) {
      if (auto f = fixed_.find(v->id); f != fixed_.end()) {
        if (!pipe || is_pipeline(f->second) || f->second.size() < 2) return Perm{-1, var_list(v->id)};
        return std::nullopt;
      }
      if (unknowns_.count(v->id)) return Perm{-1, var_list(v->id)};
      if (pipe) return def_perm(v->id);
    }
    return std::nullopt;
  };

  for (const auto& c : sys.constraints) {
    switch (c.kind) {
      case Constraint::Kind::eq: {
        auto l = list(c.lhs), r = list(c.rhs);
        if (l.size() != r.size()) {
          push({StageAtom::Kind::falsum, {}, {}});
          break;
        }
        if (l.empty()) break;
        bool lg = std::all_of(l.begin(), l.end(), ground), rg = std::all_of(r.begin(), r.end(), ground);
        if (lg && rg) {
          if (!(ground_value(l) == ground_value(r))) push({StageAtom::Kind::falsum, {}, {}});
          break;
        }
        auto cl = canonical(c.lhs), cr = canonical(c.rhs);
        std::string what = "equation " + c.str();
        if (cl && cr) {
          eqs_.push_back({*cl, *cr});
        } else if (cl) {
          eqs_.push_back({*cl, Perm{new_item(what, r.size()), r}});
        } else if (cr) {
          eqs_.push_back({Perm{new_item(what, l.size()), l}, *cr});
        } else {
          eqs_.push_back({Perm{-1, l}, Perm{new_item(what, r.size()), r}});
        }
        break;
      }
      case Constraint::Kind::pipe: {
        auto v = c.lhs.as<Annot::Var>();
        if (v && defs_.count(v->id) && !fixed_.count(v->id)) {
          def_perm(v->id);
        } else if (v && fixed_.count(v->id)) {
          if (!is_pipeline(fixed_.at(v->id))) push({StageAtom::Kind::falsum, {}, {}});
        } else if (!v) {
          auto l = list(c.lhs);
          chains_.push_back({Perm{new_item("pipeline " + c.str(), l.size()), l}, StageAtom::Kind::strict_fifo});
        }
        break;
      }
      case Constraint::Kind::pred: {
        auto l = list(c.lhs);
        auto r = c.binary ? list(c.rhs) : std::vector<StageTerm>{StageTerm{}};
        for (const auto& x : l)
          for (const auto& y : r) {
            switch (c.rel) {
              case Rel::contractive:
                // Unknowns are contractive by construction and composition preserves it.
                if (ground(x) && !Stage::is_contractive(evaluate(x, {}).scale(), evaluate(x, {}).phase()))
                  push({StageAtom::Kind::falsum, {}, {}});
                break;
              case Rel::not_identity: push({StageAtom::Kind::not_identity, x, {}}); break;
              case Rel::nonzero_scale: push({StageAtom::Kind::nonzero_scale, x, {}}); break;
              case Rel::before: push({StageAtom::Kind::before, x, y}); break;
              case Rel::strict_fifo: push({StageAtom::Kind::strict_fifo, x, y}); break;
              case Rel::em_leq: push({StageAtom::Kind::em_leq, x, y}); break;
            }
          }
        break;
      }
      case Constraint::Kind::bound:
        for (const auto& x : list(c.lhs)) push({StageAtom::Kind::bound, x, {}, c.component, c.cmp, c.value});
        break;
      case Constraint::Kind::def:
      case Constraint::Kind::size: break;
    }
  }
}

Lowering::Guess Lowering::identity_guess() const {
  Guess g;
  for (const auto& it : items_) {
    std::vector<std::size_t> p(it.size);
    std::iota(p.begin(), p.end(), 0);
    g.push_back(std::move(p));
  }
  return g;
}

bool Lowering::advance(Guess& g, std::size_t attempt) {
  if (g.empty() || attempt == 0) return false;
  auto& p = g[(attempt - 1) % g.size()];
  std::next_permutation(p.begin(), p.end());
  return true;
}

std::vector<StageTerm> Lowering::ordered(const Perm& p, const Guess& g) const {
  if (p.item < 0) return p.list;
  const auto& perm = g.at(static_cast<std::size_t>(p.item));
  std::vector<StageTerm> out;
  for (std::size_t i : perm) out.push_back(p.list.at(i));
  return out;
}

StageProblem Lowering::problem(const Guess& g) const {
  StageProblem p;
  p.names = names_;
  p.atoms = fixed_atoms_;
  auto push = [&](StageAtom a) {
    if (ground(a.a) && ground(a.b)) {
      if (!holds(a, {})) p.atoms.push_back({StageAtom::Kind::falsum, {}, {}});
    } else {
      p.atoms.push_back(std::move(a));
    }
  };
  for (const auto& [perm, kind] : chains_) {
    auto l = ordered(perm, g);
    for (std::size_t i = 0; i + 1 < l.size(); ++i) push({kind, l[i], l[i + 1]});
  }
  for (const auto& [lp, rp] : eqs_) {
    auto l = ordered(lp, g), r = ordered(rp, g);
    for (std::size_t i = 0; i < l.size(); ++i) push({StageAtom::Kind::eq, l[i], r[i]});
  }
  return p;
}

Model Lowering::model(const std::vector<Stage>& values) const {
  Model m;
  for (const auto& [id, s] : fixed_) m[id] = s;
  for (const auto& [id, idx] : unknowns_) {
    Schedule s;
    for (int i : idx) s = s + Schedule{values.at(static_cast<std::size_t>(i))};
    m[id] = s;
  }
  std::map<int, Annot> pending;
  for (const auto& [id, a] : defs_)
    if (!fixed_.count(id)) pending.emplace(id, a);
  while (!pending.empty()) {
    bool progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      std::set<int> vs;
      it->second.collect_vars(vs);
      if (std::all_of(vs.begin(), vs.end(), [&](int v) { return m.count(v); })) {
        m[it->first] = evaluate(it->second, m);
        it = pending.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
    if (!progress) throw Error(ErrorKind::internal, "cyclic definitions in model reconstruction");
  }
  return m;
}

// --- stage solving --------------------------------------------------------------------

StagePhase solve_stages(const ConstraintSystem& sys, const Sizes& sizes, const SolveConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  Lowering low(sys, sizes, cfg);
  StagePhase out;
  out.guess_items = low.items().size();

  struct Attempt {
    StageProblem problem;
    std::string script;
    std::optional<SolverResult> result;
    std::optional<Error> error;
  };
  auto run = [&](Attempt& a) {
    try {
      if (a.problem.names.empty()) {
        SolverResult r;
        r.status = holds(a.problem, {}) ? SolverResult::Status::sat : SolverResult::Status::unsat;
        a.result = r;
      } else {
        a.result = run_solver(a.script, cfg.solver);
      }
    } catch (const Error& e) {
      a.error = e;
    }
  };

  std::size_t width = cfg.sequential ? 1 : cfg.jobs ? cfg.jobs : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  const std::size_t budget = std::max<std::size_t>(1, cfg.order_retry_budget);
  const std::size_t total = low.items().empty() ? 1 : budget;
  Lowering::Guess guess = low.identity_guess();
  bool inconclusive = false;
  for (std::size_t start = 0; start < total; start += width) {
    std::vector<Attempt> batch;
    for (std::size_t k = start; k < std::min(total, start + width); ++k) {
      Lowering::advance(guess, k);
      Attempt a;
      a.problem = low.problem(guess);
      SmtScript s = emit_stages(a.problem);
      a.script = s.text();
      out.variables = s.variables();
      out.assertions = s.assertions.size();
      batch.push_back(std::move(a));
    }
    if (batch.size() == 1) {
      run(batch[0]);
    } else {
      std::vector<std::future<void>> fs;
      for (auto& a : batch) fs.push_back(std::async(std::launch::async, [&run, &a] { run(a); }));
      for (auto& f : fs) f.get();
    }
    // Lowest attempt index wins, so parallel and sequential runs agree.
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Attempt& a = batch[i];
      out.attempts = start + i + 1;
      out.last_script = a.script;
      if (a.error) throw *a.error;
      if (a.result->status == SolverResult::Status::timeout)
        throw Error(ErrorKind::solver, "solver-timeout: stage phase exceeded " +
                                           std::to_string(cfg.solver.timeout_seconds) + " s");
      if (a.result->status == SolverResult::Status::unknown) {
        inconclusive = true;
        continue;
      }
      if (a.result->status != SolverResult::Status::sat) continue;
      std::vector<Stage> values;
      try {
        values = a.problem.names.empty() ? std::vector<Stage>{} : read_stages(a.problem, *a.result);
      } catch (const Error&) {
        // Irrational (root-obj) model: treat the guess as failed and move on.
        inconclusive = true;
        continue;
      }
      if (!holds(a.problem, values))
        throw Error(ErrorKind::solver, "solver model violates the stage encoding");
      out.model = low.model(values);
      out.seconds = since(t0);
      return out;
    }
  }
  if (inconclusive)
    throw Error(ErrorKind::solver, "solver returned unknown or irrational models for every order guess");
  throw Error(ErrorKind::unsat, "pipeline-unsatisfiable: " + std::to_string(out.attempts) +
                                    " order guess(es) over " + std::to_string(out.guess_items) +
                                    " item(s) failed");
}

// --- end to end ---------------------------------------------------------------------------

InferResult infer_end_to_end(const Document& doc, const SolveConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  InferResult r;
  r.system = generate(doc, cfg.gen_options());
  r.sizes = solve_sizes(r.system, cfg);
  r.stages = solve_stages(r.system, r.sizes.sizes, cfg);
  r.judgment = substitute(r.system, r.stages.model);
  r.verification = verify(r.system, r.stages.model);
  CheckOptions co;
  co.write_stage = cfg.write_stage;
  if (r.system.write_stage && r.stages.model.count(*r.system.write_stage))
    co.write_stage = r.stages.model.at(*r.system.write_stage).stages().at(0);
  r.check = check_judgment(r.judgment, co);
  r.stats.schedule_vars = r.system.count(VarKind::schedule);
  r.stats.stage_vars = r.system.count(VarKind::stage);
  r.stats.smt_variables = r.sizes.variables + r.stages.variables;
  r.stats.smt_assertions = r.sizes.assertions + r.stages.assertions;
  r.stats.size_bound = r.sizes.bound;
  r.stats.order_attempts = r.stages.attempts;
  r.stats.wall_ms = since(t0) * 1000;
  return r;
}

}  // namespace pia
