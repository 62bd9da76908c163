// SPDX-License-Identifier: Apache-2.0

#include "pia/denote.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "pia/error.hpp"

namespace pia {

using games::Arena;
using games::Play;
using games::Strategy;
using Path = std::vector<std::string>;

namespace {

std::string copy_label(std::size_t i, std::uint64_t k) { return "c" + std::to_string(i) + "." + std::to_string(k); }

std::string join(const Path& p, std::size_t from = 0, std::size_t to = std::string::npos) {
  std::string s;
  for (std::size_t i = from; i < std::min(to, p.size()); ++i) s += (i > from ? "/" : "") + p[i];
  return s;
}

bool is_tag(const std::string& s) { return !s.empty() && s[0] == '@'; }

/// End of the tags of a context path `a/<entry>/<leaf>/<tags>/...`.
std::size_t tags_end(const Path& p) {
  std::size_t i = 3;
  while (i < p.size() && is_tag(p[i])) ++i;
  return i;
}

/// Moves of one play looked up by key.
class View {
 public:
  View(const Arena& a, const Play& p) {
    for (std::size_t i = 0; i < p.size(); ++i) at_[a.move(p[i]).key()] = i;
  }
  bool actual(const std::string& path) const { return at_.count(path + ":q") > 0; }
  /// Position of the question (actual or dummy) at path.
  std::size_t asked(const std::string& path) const {
    auto it = at_.find(path + ":q");
    return it != at_.end() ? it->second : at_.at(path + ":~q");
  }
  /// Position of the answer (actual or dummy) at path.
  std::size_t answered(const std::string& path) const {
    auto a = answer(path);
    return a ? a->second : at_.at(path + ":~a");
  }
  /// The actual answer at path, with its position in the play.
  std::optional<std::pair<std::string, std::size_t>> answer(const std::string& path) const {
    auto it = at_.lower_bound(path + ":");
    for (; it != at_.end() && it->first.compare(0, path.size() + 1, path + ":") == 0; ++it) {
      std::string id = it->first.substr(path.size() + 1);
      if (id != "q" && id != "~q" && id != "~a") return std::make_pair(id, it->second);
    }
    return std::nullopt;
  }
  std::string value(const std::string& path) const {
    auto a = answer(path);
    return a ? a->first : "";
  }

 private:
  std::map<std::string, std::size_t> at_;
};

Schedule annot_of(const Type& t) { return t.annot().value(); }

}  // namespace

Arena type_arena(const Type& t, unsigned max_int) {
  if (auto b = t.as_base()) return b->base == BaseType::exp ? games::exp_arena(max_int) : games::com_arena();
  return games::arrow(games::schedule_action(annot_of(t), type_arena(t.dom(), max_int)), type_arena(t.cod(), max_int));
}

Strategy constant_strategy(ConstId id, const Type& type, unsigned max_int) {
  Arena arena = games::arrow(games::empty_arena(), type_arena(type, max_int));
  const std::string cap = std::to_string(max_int);
  auto clamp = [&](long v) { return std::to_string(std::min<long>(v, static_cast<long>(max_int))); };
  std::function<bool(const View&)> keep;
  switch (id) {
    case ConstId::skip: keep = [](const View&) { return true; }; break;
    case ConstId::one:
      keep = [&](const View& v) { return !v.actual("r") || v.value("r") == clamp(1); };
      break;
    case ConstId::op:
    case ConstId::comp:
    case ConstId::seq:
    case ConstId::par:
      keep = [&, id](const View& v) {
        const bool on = v.actual("r/r/r");
        if (v.actual("r/a/c0.0") != on || v.actual("r/r/a/c0.0") != on) return false;
        // seq asks its second argument once the first has answered.
        if (id == ConstId::seq && v.answered("r/a/c0.0") > v.asked("r/r/a/c0.0")) return false;
        if (!on || id != ConstId::op) return true;
        return v.value("r/r/r") == clamp(std::stol(v.value("r/a/c0.0")) + std::stol(v.value("r/r/a/c0.0")));
      };
      break;
    case ConstId::if_:
      keep = [](const View& v) {
        const bool on = v.actual("r/r/r/r");
        if (v.actual("r/a/c0.0") != on) return false;
        // Branches are entered once the guard has answered.
        const std::size_t guard = v.answered("r/a/c0.0");
        if (guard > v.asked("r/r/a/c0.0") || guard > v.asked("r/r/r/a/c0.0")) return false;
        if (!on) return !v.actual("r/r/a/c0.0") && !v.actual("r/r/r/a/c0.0");
        const bool first = v.value("r/a/c0.0") != "0";
        const std::string taken = first ? "r/r/a/c0.0" : "r/r/r/a/c0.0";
        const std::string other = first ? "r/r/r/a/c0.0" : "r/r/a/c0.0";
        return v.actual(taken) && !v.actual(other) && v.value("r/r/r/r") == v.value(taken);
      };
      break;
    case ConstId::new_: {
      // 𝟙·(J·exp ⊸ K·acc ⊸ σ) ⊸ σ; the body is at r/a/c0.0.
      const Type& body = type.dom();
      std::vector<std::string> reads, writes;
      const Schedule js = annot_of(body), ks = annot_of(body.cod());
      std::size_t i = 0;
      for (const auto& [x, n] : js.entries()) {
        for (std::uint64_t k = 0; k < n; ++k) reads.push_back("r/a/c0.0/a/" + copy_label(i, k));
        ++i;
      }
      i = 0;
      for (const auto& [x, n] : ks.entries()) {
        for (std::uint64_t k = 0; k < n; ++k) writes.push_back("r/a/c0.0/r/a/" + copy_label(i, k));
        ++i;
      }
      keep = [reads, writes](const View& v) {
        const bool on = v.actual("r/r");
        if (v.actual("r/a/c0.0/r/r") != on) return false;
        if (on && v.value("r/r") != v.value("r/a/c0.0/r/r")) return false;
        for (const auto& w : writes)
          if (v.actual(w + "/a/c0.0") != v.actual(w + "/r")) return false;
        // A read returns the most recent value written before its answer.
        for (const auto& r : reads) {
          auto ans = v.answer(r);
          if (!ans) continue;
          std::string current = "0";
          std::size_t latest = 0;
          for (const auto& w : writes) {
            auto val = v.answer(w + "/a/c0.0");
            if (val && val->second < ans->second && val->second >= latest) {
              latest = val->second;
              current = val->first;
            }
          }
          if (ans->first != current) return false;
        }
        return true;
      };
      break;
    }
  }
  Strategy s = games::strategy_from(arena, [&](const Arena& a, const Play& p) { return keep(View(a, p)); });
  return id == ConstId::new_ ? games::saturate(s) : s;
}

namespace {

class Denoter {
 public:
  explicit Denoter(unsigned max_int) : max_int_(max_int) {}

  Strategy root(const Derivation& d, bool hide = true) {
    if (d.rule != Derivation::Rule::root) throw Error(ErrorKind::internal, "denotation starts at the root");
    Strategy s = hide ? go(d.children.at(0)) : application(d.children.at(0), false);
    if (!hide) return s;
    for (std::size_t i = 0; i < d.ctx.size(); ++i) {
      const CtxEntry& e = d.ctx[i];
      const auto& group = d.groups.at(i);
      if (group.empty())
        s = weaken(s, e.annot, e.type, {"a", e.name});
      else
        s = canonicalize(s, {group.begin(), group.end()}, e.annot, {"a", e.name}, false);
    }
    std::vector<std::pair<std::string, Arena>> parts;
    for (const auto& e : d.ctx) parts.emplace_back(e.name, games::schedule_action(e.annot, type_arena(e.type, max_int_)));
    Arena expected = games::arrow(games::tensor(parts), type_arena(d.type, max_int_));
    if (!(s.arena == expected)) throw Error(ErrorKind::internal, "denotation ended on an unexpected arena");
    return s;
  }

 private:
  Strategy go(const Derivation& d) {
    using R = Derivation::Rule;
    switch (d.rule) {
      case R::identity: {
        const std::string& leaf = d.ctx.at(0).name;
        return games::relabel(games::copycat(type_arena(d.type, max_int_)), [&](const Path& p) {
          if (p[0] != "a") return p;
          Path q{"a", leaf, leaf};
          q.insert(q.end(), p.begin() + 1, p.end());
          return q;
        });
      }
      case R::constant: return constant_strategy(d.term.as<Term::Const>()->id, d.type, max_int_);
      case R::application: return application(d, true);
      case R::abstraction:
      case R::abs_con: {
        const auto& group = d.groups.at(0);
        return canonicalize(go(d.children.at(0)), {group.begin(), group.end()}, annot_of(d.type), {"r", "a"}, true);
      }
      case R::abs_weak: {
        Strategy s = games::relabel(go(d.children.at(0)), [](const Path& p) {
          if (p[0] != "r") return p;
          Path q = p;
          q.insert(q.begin() + 1, "r");
          return q;
        });
        return weaken(s, annot_of(d.type), d.type.dom(), {"r", "a"});
      }
      case R::contraction: {
        const auto& group = d.groups.at(0);
        std::string merged;
        for (const auto& n : group) merged += (merged.empty() ? "" : "+") + n;
        const std::set<std::string> names(group.begin(), group.end());
        return games::relabel(go(d.children.at(0)), [&](const Path& p) {
          if (p[0] != "a" || !names.count(p.at(1))) return p;
          Path q = p;
          q[1] = merged;
          return q;
        });
      }
      case R::root: break;
    }
    throw Error(ErrorKind::internal, "unexpected root inside a derivation");
  }

  Strategy application(const Derivation& d, bool hide) {
    if (d.rule != Derivation::Rule::application) throw Error(ErrorKind::internal, "not an application");
    Strategy f = go(d.children.at(0));
    Strategy n = go(d.children.at(1));
    std::vector<Strategy> spokes;
    const Schedule j = annot_of(d.children[0].type);
    std::size_t i = 0;
    for (const auto& [x, mult] : j.entries()) {
      Strategy timed = games::retime(n, x);
      for (std::uint64_t k = 0; k < mult; ++k) {
        std::string tag = "@" + x.str() + "#" + std::to_string(k);
        std::replace(tag.begin(), tag.end(), '/', '|');
        tags_.emplace(tag, x);
        const std::string label = copy_label(i, k);
        spokes.push_back(games::relabel(timed, [&](const Path& p) {
          Path q = p;
          if (p[0] == "r") {
            q = {"r", "a", label};
            q.insert(q.end(), p.begin() + 1, p.end());
          } else {
            q.insert(q.begin() + 3, tag);
          }
          return q;
        }));
      }
      ++i;
    }
    Strategy s = games::interact(f, spokes, hide);
    if (!hide) return s;
    return games::relabel(s, [](const Path& p) {
      if (p[0] != "r") return p;
      Path q = p;
      q.erase(q.begin() + 1);
      return q;
    });
  }

  /// Replaces the copies of the given entries by canonical labels under
  /// `target`; with `curry` the result side moves from r/… to r/r/….
  Strategy canonicalize(const Strategy& s, const std::set<std::string>& entries, const Schedule& j, const Path& target,
                        bool curry) {
    auto selected = [&](const Path& p) { return p.size() >= 3 && p[0] == "a" && entries.count(p[1]); };
    // Copies by stage, each named by its leaf and tags.
    std::map<Stage, std::set<std::string>> copies;
    for (const auto& m : s.arena.moves()) {
      if (!selected(m.path)) continue;
      const std::size_t end = tags_end(m.path);
      Stage st = Stage::identity();
      for (std::size_t t = end; t-- > 3;) st = tags_.at(m.path[t]).compose(st);
      copies[st].insert(join(m.path, 2, end));
    }
    std::map<std::string, std::string> label;
    std::size_t i = 0;
    std::uint64_t total = 0;
    for (const auto& [x, mult] : j.entries()) {
      auto it = copies.find(x);
      const std::size_t have = it == copies.end() ? 0 : it->second.size();
      if (have != mult)
        throw Error(ErrorKind::internal, "copies of stage " + x.str() + " do not match the annotation " + j.str());
      std::uint64_t k = 0;
      if (it != copies.end())
        for (const auto& prov : it->second) label[prov] = copy_label(i, k++);
      total += mult;
      ++i;
    }
    std::size_t found = 0;
    for (const auto& [x, set] : copies) found += set.size();
    if (found != total) throw Error(ErrorKind::internal, "copies outside the annotation " + j.str());
    return games::relabel(s, [&](const Path& p) {
      if (selected(p)) {
        const std::size_t end = tags_end(p);
        Path q = target;
        q.push_back(label.at(join(p, 2, end)));
        q.insert(q.end(), p.begin() + static_cast<long>(end), p.end());
        return q;
      }
      if (curry && p[0] == "r") {
        Path q = p;
        q.insert(q.begin() + 1, "r");
        return q;
      }
      return p;
    });
  }

  /// Adds unused copies of J·θ under `target`, played with dummies only.
  Strategy weaken(const Strategy& s, const Schedule& j, const Type& t, const Path& target) {
    Arena part = games::schedule_action(j, type_arena(t, max_int_));
    if (part.size() == 0) return s;
    Arena ext = games::graft(s.arena, part, target);
    std::vector<Play> fill;
    for (const auto& p : games::legal_plays(part)) {
      if (!std::all_of(p.begin(), p.end(), [&](int m) { return part.move(m).dummy; })) continue;
      Play q;
      for (int m : p) {
        games::Move mv = part.move(m);
        Path path = target;
        path.insert(path.end(), mv.path.begin(), mv.path.end());
        mv.path = path;
        q.push_back(*ext.find(mv.key()));
      }
      fill.push_back(std::move(q));
    }
    return games::extend(s, ext, fill);
  }

  unsigned max_int_;
  std::map<std::string, Stage> tags_;
};

}  // namespace

Strategy denote(const Derivation& root, unsigned max_int) { return Denoter(max_int).root(root); }

Strategy denote(const Document& judgment, unsigned max_int) {
  CheckResult r = check_judgment(judgment);
  if (!r.accepted) throw Error(ErrorKind::type, r.reason + ": " + r.detail);
  return denote(*r.derivation, max_int);
}

Strategy denote_trace(const Derivation& root, unsigned max_int) { return Denoter(max_int).root(root, false); }

// --- derivation variants -----------------------------------------------------

namespace {

std::string merged_name(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : "+") + n;
  return out;
}

/// Recomputes contexts bottom-up after the tree was rearranged.
void refresh(Derivation& d) {
  using R = Derivation::Rule;
  for (auto& c : d.children) refresh(c);
  switch (d.rule) {
    case R::identity:
    case R::constant:
    case R::root: break;
    case R::application: {
      d.ctx = d.children[0].ctx;
      Schedule j = annot_of(d.children[0].type);
      for (const auto& e : d.children[1].ctx) d.ctx.push_back({e.name, e.base, j * e.annot, e.type});
      break;
    }
    case R::abstraction:
    case R::abs_con:
    case R::abs_weak: {
      const std::set<std::string> names(d.groups[0].begin(), d.groups[0].end());
      d.ctx.clear();
      for (const auto& e : d.children[0].ctx)
        if (!names.count(e.name)) d.ctx.push_back(e);
      break;
    }
    case R::contraction: {
      const std::set<std::string> names(d.groups[0].begin(), d.groups[0].end());
      d.ctx.clear();
      CtxEntry merged{merged_name(d.groups[0]), "", Schedule::zero(), Type::com()};
      for (const auto& e : d.children[0].ctx) {
        if (!names.count(e.name)) {
          d.ctx.push_back(e);
          continue;
        }
        merged.base = e.base;
        merged.type = e.type;
        merged.annot = merged.annot + e.annot;
      }
      d.ctx.push_back(merged);
      break;
    }
  }
}

Derivation contract(Derivation child, std::vector<std::string> names) {
  Derivation c{Derivation::Rule::contraction, {}, child.term, child.type, {}, {std::move(names)}};
  c.children.push_back(std::move(child));
  return c;
}

/// Wraps `d` in binary contractions of `names`, left or right nested.
/// Returns the name of the merged entry.
std::string bracket(Derivation& d, const std::vector<std::string>& names, bool left) {
  if (names.size() < 2) return names.empty() ? "" : names[0];
  if (left) {
    std::string acc = names[0];
    for (std::size_t i = 1; i < names.size(); ++i) {
      d = contract(std::move(d), {acc, names[i]});
      acc = merged_name({acc, names[i]});
    }
    return acc;
  }
  std::string acc = names.back();
  for (std::size_t i = names.size() - 1; i-- > 0;) {
    d = contract(std::move(d), {names[i], acc});
    acc = merged_name({names[i], acc});
  }
  return acc;
}

std::set<std::string> linear_names(const Derivation& d) {
  std::set<std::string> out;
  for (const auto& e : d.ctx) out.insert(e.name);
  return out;
}

/// Owners of groups: the root (one group per declaration) and binders.
void owners(Derivation& d, std::vector<std::pair<Derivation*, std::size_t>>& out) {
  using R = Derivation::Rule;
  if (d.rule == R::root)
    for (std::size_t i = 0; i < d.groups.size(); ++i) out.emplace_back(&d, i);
  if (d.rule == R::abstraction || d.rule == R::abs_con) out.emplace_back(&d, 0);
  for (auto& c : d.children) owners(c, out);
}

/// Application children below `d` holding at least two of `names`.
void push_sites(Derivation& d, const std::set<std::string>& names, std::vector<Derivation*>& out) {
  if (d.rule == Derivation::Rule::application)
    for (auto& c : d.children) {
      std::size_t n = 0;
      for (const auto& x : linear_names(c)) n += names.count(x);
      if (n >= 2) out.push_back(&c);
    }
  for (auto& c : d.children) push_sites(c, names, out);
}

}  // namespace

std::vector<Derivation> derivation_variants(const Derivation& root) {
  std::vector<Derivation> out;
  std::vector<std::pair<Derivation*, std::size_t>> base_owners;
  Derivation probe = root;
  owners(probe, base_owners);
  for (std::size_t oi = 0; oi < base_owners.size(); ++oi) {
    const auto group = base_owners[oi].first->groups[base_owners[oi].second];
    if (group.size() < 2) continue;
    // Explicit contractions below the owner, in both bracketings.
    for (bool left : {true, false}) {
      if (!left && group.size() < 3) break;
      Derivation v = root;
      std::vector<std::pair<Derivation*, std::size_t>> os;
      owners(v, os);
      auto [owner, gi] = os[oi];
      std::string merged = bracket(owner->children[0], group, left);
      owner->groups[gi] = {merged};
      refresh(v);
      out.push_back(std::move(v));
    }
    // Contractions pushed into application subterms.
    std::vector<Derivation*> sites;
    push_sites(*base_owners[oi].first, {group.begin(), group.end()}, sites);
    for (std::size_t si = 0; si < sites.size(); ++si) {
      Derivation v = root;
      std::vector<std::pair<Derivation*, std::size_t>> os;
      owners(v, os);
      auto [owner, gi] = os[oi];
      std::vector<Derivation*> vs;
      push_sites(*owner, {group.begin(), group.end()}, vs);
      Derivation& site = *vs[si];
      std::vector<std::string> inside, rest;
      const auto here = linear_names(site);
      for (const auto& n : group) (here.count(n) ? inside : rest).push_back(n);
      std::string merged = bracket(site, inside, true);
      rest.insert(rest.begin(), merged);
      owner->groups[gi] = rest;
      refresh(v);
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace pia
