// SPDX-License-Identifier: Apache-2.0

#include "pia/games.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <numeric>

#include "pia/error.hpp"

namespace pia::games {

namespace {

std::string join(const std::vector<std::string>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) s += (i ? "/" : "") + path[i];
  return s;
}

std::vector<std::string> with_prefix(const std::string& label, const std::vector<std::string>& path) {
  std::vector<std::string> out{label};
  out.insert(out.end(), path.begin(), path.end());
  return out;
}

std::string copy_label(std::size_t i, std::uint64_t k) { return "c" + std::to_string(i) + "." + std::to_string(k); }

std::optional<std::pair<std::size_t, std::uint64_t>> parse_copy(const std::string& label) {
  std::size_t i = 0;
  unsigned long long k = 0;
  char tail = 0;
  if (std::sscanf(label.c_str(), "c%zu.%llu%c", &i, &k, &tail) != 2) return std::nullopt;
  return std::make_pair(i, static_cast<std::uint64_t>(k));
}

std::string interval_str(const std::pair<Rational, Rational>& iv) {
  return "[" + to_string(iv.first) + ", " + to_string(iv.second) + "]";
}

/// Transitive closure that is also closed under ≍ on both sides.
void close(Relation& r, const Arena& a) {
  const std::size_t n = a.size();
  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t m = 0; m < n; ++m) classes[a.alt(static_cast<int>(m))].push_back(m);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (r[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (r[k][j] && !r[i][j]) r[i][j] = 1;
    for (const auto& [rep, members] : classes) {
      if (members.size() < 2) continue;
      for (std::size_t j = 0; j < n; ++j) {
        bool row = false, col = false;
        for (auto m : members) {
          row = row || r[m][j];
          col = col || r[j][m];
        }
        for (auto m : members) {
          if (row && !r[m][j]) r[m][j] = 1, changed = true;
          if (col && !r[j][m]) r[j][m] = 1, changed = true;
        }
      }
    }
  }
}

/// Depth-first enumeration of the legal plays of an arena.
class Enumerator {
 public:
  Enumerator(const Arena& a, std::function<bool(const std::vector<char>&, int)> allow, std::size_t limit)
      : a_(a), allow_(std::move(allow)), limit_(limit), n_(a.size()) {
    const Relation& prec = a.precedence();
    cls_.resize(n_);
    std::set<int> reps;
    for (std::size_t m = 0; m < n_; ++m) reps.insert(cls_[m] = a.alt(static_cast<int>(m)));
    classes_ = reps.size();
    preds_.resize(n_);
    for (std::size_t m = 0; m < n_; ++m) {
      std::set<int> ps;
      for (std::size_t p = 0; p < n_; ++p)
        if (prec[p][m]) ps.insert(cls_[p]);
      preds_[m].assign(ps.begin(), ps.end());
    }
    answer_class_.assign(n_, -1);
    for (std::size_t q = 0; q < n_; ++q) {
      if (!a.move(static_cast<int>(q)).question) continue;
      for (int b : a.enabled(static_cast<int>(q)))
        if (!a.move(b).question) answer_class_[q] = cls_[static_cast<std::size_t>(b)];
      if (answer_class_[q] >= 0) askers_[answer_class_[q]].push_back(static_cast<int>(q));
    }
    placed_.assign(n_, 0);
    class_placed_.assign(n_, 0);
  }

  std::vector<Play> run() {
    dfs();
    return std::move(out_);
  }

 private:
  void dfs() {
    if (cur_.size() == classes_) {
      if (out_.size() >= limit_) throw Error(ErrorKind::internal, "play enumeration exceeds " + std::to_string(limit_));
      out_.push_back(cur_);
      return;
    }
    for (std::size_t m = 0; m < n_; ++m) {
      if (placed_[m] || class_placed_[static_cast<std::size_t>(cls_[m])]) continue;
      if (!ready(m)) continue;
      placed_[m] = 1;
      class_placed_[static_cast<std::size_t>(cls_[m])] = 1;
      cur_.push_back(static_cast<int>(m));
      dfs();
      cur_.pop_back();
      class_placed_[static_cast<std::size_t>(cls_[m])] = 0;
      placed_[m] = 0;
    }
  }

  bool ready(std::size_t m) const {
    for (int c : preds_[m])
      if (!class_placed_[static_cast<std::size_t>(c)]) return false;
    const int mi = static_cast<int>(m);
    if (!a_.initial(mi)) {
      int count = 0;
      for (int e : a_.enablers(mi)) count += placed_[static_cast<std::size_t>(e)];
      if (count != 1) return false;
    }
    const Move& mv = a_.move(mi);
    if (mv.question) {
      // A question whose answers are already decided can never be answered.
      if (answer_class_[m] < 0 || class_placed_[static_cast<std::size_t>(answer_class_[m])]) return false;
    } else {
      auto it = askers_.find(cls_[m]);
      if (it != askers_.end())
        for (int q : it->second)
          if (placed_[static_cast<std::size_t>(q)] && !a_.enables(q, mi)) return false;
    }
    return !allow_ || allow_(placed_, mi);
  }

  const Arena& a_;
  std::function<bool(const std::vector<char>&, int)> allow_;
  std::size_t limit_;
  std::size_t n_;
  std::size_t classes_ = 0;
  std::vector<int> cls_;
  std::vector<std::vector<int>> preds_;
  std::vector<int> answer_class_;
  std::map<int, std::vector<int>> askers_;
  std::vector<char> placed_, class_placed_;
  Play cur_;
  std::vector<Play> out_;
};

Strategy with_arena(const Arena& a, std::set<Play> plays) { return Strategy{a, std::move(plays)}; }

}  // namespace

// --- moves and arenas --------------------------------------------------------

std::string Move::key() const { return join(path) + ":" + id; }

std::string Move::str() const { return key() + "@" + to_string(time); }

int Arena::add(Move m) {
  std::string k = m.key();
  if (index_.count(k)) throw Error(ErrorKind::internal, "duplicate move " + k);
  const int i = static_cast<int>(moves_.size());
  index_[k] = i;
  moves_.push_back(std::move(m));
  enablers_.emplace_back();
  enabled_.emplace_back();
  parent_.push_back(i);
  invalidate();
  return i;
}

void Arena::enable(int m, int n) {
  if (enables(m, n)) return;
  enablers_[static_cast<std::size_t>(n)].push_back(m);
  enabled_[static_cast<std::size_t>(m)].push_back(n);
  invalidate();
}

bool Arena::enables(int m, int n) const {
  const auto& e = enablers_[static_cast<std::size_t>(n)];
  return std::find(e.begin(), e.end(), m) != e.end();
}

int Arena::alt(int m) const {
  while (parent_[static_cast<std::size_t>(m)] != m) m = parent_[static_cast<std::size_t>(m)];
  return m;
}

void Arena::alternative(int m, int n) {
  int a = alt(m), b = alt(n);
  if (a == b) return;
  if (b < a) std::swap(a, b);
  parent_[static_cast<std::size_t>(b)] = a;
  invalidate();
}

std::optional<int> Arena::find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Relation& Arena::precedence() const {
  if (prec_) return *prec_;
  const std::size_t n = size();
  Relation r(n, std::vector<char>(n, 0));
  for (std::size_t m = 0; m < n; ++m) {
    for (int e : enablers_[m]) r[static_cast<std::size_t>(e)][m] = 1;
    for (std::size_t k = 0; k < n; ++k)
      if (moves_[m].time < moves_[k].time) r[m][k] = 1;
  }
  // Children of a thread finish before the parent: q ⊢ a, q' ⊢ a', q ⊢ q'.
  for (std::size_t q = 0; q < n; ++q) {
    if (!moves_[q].question) continue;
    for (int qq : enabled_[q]) {
      if (!move(qq).question) continue;
      for (int a : enabled_[q]) {
        if (move(a).question) continue;
        for (int aa : enabled(qq))
          if (!move(aa).question) r[static_cast<std::size_t>(aa)][static_cast<std::size_t>(a)] = 1;
      }
    }
  }
  close(r, *this);
  for (std::size_t m = 0; m < n; ++m)
    if (r[m][m]) throw Error(ErrorKind::internal, "arena precedence is not well-founded at " + moves_[m].str());
  prec_ = std::make_shared<const Relation>(std::move(r));
  return *prec_;
}

std::optional<std::pair<Rational, Rational>> Arena::may_interval() const {
  std::optional<Rational> lo, hi;
  for (std::size_t m = 0; m < size(); ++m) {
    if (!initial(static_cast<int>(m))) continue;
    if (!lo || moves_[m].time < *lo) lo = moves_[m].time;
    for (int a : enabled_[m])
      if (!move(a).question && (!hi || move(a).time > *hi)) hi = move(a).time;
  }
  if (!lo || !hi) return std::nullopt;
  return std::make_pair(*lo, *hi);
}

std::optional<std::pair<Rational, Rational>> Arena::must_interval() const {
  std::optional<Rational> lo, hi;
  for (std::size_t m = 0; m < size(); ++m) {
    if (!initial(static_cast<int>(m))) continue;
    if (!lo || moves_[m].time > *lo) lo = moves_[m].time;
    for (int a : enabled_[m])
      if (!move(a).question && (!hi || move(a).time < *hi)) hi = move(a).time;
  }
  if (!lo || !hi) return std::nullopt;
  return std::make_pair(*lo, *hi);
}

void Arena::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::internal, "not an arena: " + what); };
  const std::size_t n = size();
  for (std::size_t m = 0; m < n; ++m) {
    const Move& mv = moves_[m];
    if (mv.time < 0 || mv.time > 1) fail("timing of " + mv.str() + " outside [0,1]");
    if (initial(static_cast<int>(m)) && (mv.player != Player::O || !mv.question))
      fail("initial move " + mv.str() + " is not an O-question");
    for (int e : enablers_[m]) {
      const Move& en = move(e);
      if (en.player == mv.player) fail(en.str() + " enables " + mv.str() + " of the same player");
      if (!en.question) fail("answer " + en.str() + " enables " + mv.str());
      if (en.dummy && !mv.dummy) fail("dummy " + en.str() + " enables actual " + mv.str());
    }
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) {
      const int mi = static_cast<int>(m), ki = static_cast<int>(k);
      if (alt(mi) != alt(ki)) continue;
      const Move &a = moves_[m], &b = moves_[k];
      if (a.time != b.time || a.player != b.player || a.question != b.question)
        fail("alternatives " + a.str() + " and " + b.str() + " differ in timing or label");
      for (int e : enablers_[m])
        for (int f : enablers_[k])
          if (alt(e) != alt(f)) fail("alternatives " + a.str() + " and " + b.str() + " have unrelated enablers");
    }
  for (std::size_t q = 0; q < n; ++q) {
    std::optional<int> c;
    for (int a : enabled_[q]) {
      if (move(a).question) continue;
      if (c && *c != alt(a)) fail("answers of " + moves_[q].str() + " are not alternatives");
      c = alt(a);
    }
  }
  precedence();
}

bool operator==(const Arena& a, const Arena& b) {
  if (a.size() != b.size()) return false;
  std::vector<int> map(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) {
    auto k = b.find(a.moves_[m].key());
    if (!k) return false;
    map[m] = *k;
    const Move &x = a.moves_[m], &y = b.move(*k);
    if (x.time != y.time || x.player != y.player || x.question != y.question || x.dummy != y.dummy) return false;
  }
  for (std::size_t m = 0; m < a.size(); ++m)
    for (std::size_t k = 0; k < a.size(); ++k) {
      const int mi = static_cast<int>(m), ki = static_cast<int>(k);
      if (a.enables(mi, ki) != b.enables(map[m], map[k])) return false;
      if ((a.alt(mi) == a.alt(ki)) != (b.alt(map[m]) == b.alt(map[k]))) return false;
    }
  return true;
}

namespace {

Arena base_arena(const std::vector<std::string>& answers) {
  Arena a;
  int dq = a.add({{}, "~q", 0, Player::O, true, true});
  int da = a.add({{}, "~a", 1, Player::P, false, true});
  int q = a.add({{}, "q", 0, Player::O, true, false});
  a.enable(dq, da);
  a.alternative(dq, q);
  for (const auto& v : answers) {
    int n = a.add({{}, v, 1, Player::P, false, false});
    a.enable(q, n);
    a.alternative(da, n);
  }
  return a;
}

/// Copies `src` into `dst` with paths and timings transformed; returns the
/// index of each source move in `dst`.
std::vector<int> embed(Arena& dst, const Arena& src, const std::function<std::vector<std::string>(const std::vector<std::string>&)>& path,
                       const std::function<Rational(const Rational&)>& time, bool flip) {
  std::vector<int> at(src.size());
  for (std::size_t m = 0; m < src.size(); ++m) {
    Move mv = src.move(static_cast<int>(m));
    mv.path = path(mv.path);
    mv.time = time(mv.time);
    if (flip) mv.player = mv.player == Player::O ? Player::P : Player::O;
    at[m] = dst.add(std::move(mv));
  }
  for (std::size_t m = 0; m < src.size(); ++m) {
    for (int e : src.enablers(static_cast<int>(m))) dst.enable(at[static_cast<std::size_t>(e)], at[m]);
    dst.alternative(at[m], at[static_cast<std::size_t>(src.alt(static_cast<int>(m)))]);
  }
  return at;
}

Rational same(const Rational& t) { return t; }

}  // namespace

Arena exp_arena(unsigned max_int) {
  std::vector<std::string> answers;
  for (unsigned v = 0; v <= max_int; ++v) answers.push_back(std::to_string(v));
  return base_arena(answers);
}

Arena com_arena() { return base_arena({"done"}); }

Arena empty_arena() { return {}; }

Arena stage_action(const Stage& x, const Arena& a) {
  Arena out;
  embed(out, a, [](const auto& p) { return p; }, [&](const Rational& t) { return x.apply(t); }, false);
  return out;
}

Arena schedule_action(const Schedule& j, const Arena& a) {
  Arena out;
  std::size_t i = 0;
  for (const auto& [x, mult] : j.entries()) {
    for (std::uint64_t k = 0; k < mult; ++k) {
      std::string label = copy_label(i, k);
      embed(out, a, [&](const auto& p) { return with_prefix(label, p); }, [&](const Rational& t) { return x.apply(t); },
            false);
    }
    ++i;
  }
  return out;
}

Arena tensor(const std::vector<std::pair<std::string, Arena>>& parts) {
  Arena out;
  for (const auto& [label, a] : parts) embed(out, a, [&](const auto& p) { return with_prefix(label, p); }, same, false);
  return out;
}

Arena prefix(const std::string& label, const Arena& a) { return tensor({{label, a}}); }

Arena graft(const Arena& base, const Arena& part, const std::vector<std::string>& path) {
  Arena out;
  auto ib = embed(out, base, [](const auto& p) { return p; }, same, false);
  auto ip = embed(
      out, part,
      [&](const auto& p) {
        auto q = path;
        q.insert(q.end(), p.begin(), p.end());
        return q;
      },
      same, true);
  for (std::size_t e = 0; e < part.size(); ++e) {
    if (!part.initial(static_cast<int>(e))) continue;
    for (std::size_t f = 0; f < base.size(); ++f) {
      if (!base.initial(static_cast<int>(f))) continue;
      if (part.move(static_cast<int>(e)).dummy || !base.move(static_cast<int>(f)).dummy) out.enable(ib[f], ip[e]);
    }
  }
  return out;
}

Arena arrow(const Arena& a, const Arena& b, bool check) {
  if (check) {
    auto may = a.may_interval();
    if (may) {
      auto must = b.must_interval();
      if (!must || must->first > may->first || may->second > must->second)
        throw Error(ErrorKind::type, "causality violation: t_M of the argument " + interval_str(*may) +
                                         " is not inside t_m of the result " +
                                         (must ? interval_str(*must) : std::string("(empty)")));
    }
  }
  Arena out;
  auto ia = embed(out, a, [](const auto& p) { return with_prefix("a", p); }, same, true);
  auto ib = embed(out, b, [](const auto& p) { return with_prefix("r", p); }, same, false);
  for (std::size_t e = 0; e < a.size(); ++e) {
    if (!a.initial(static_cast<int>(e))) continue;
    for (std::size_t f = 0; f < b.size(); ++f) {
      if (!b.initial(static_cast<int>(f))) continue;
      if (a.move(static_cast<int>(e)).dummy || !b.move(static_cast<int>(f)).dummy) out.enable(ib[f], ia[e]);
    }
  }
  return out;
}

// --- plays -------------------------------------------------------------------

bool is_play(const Arena& a, const Play& p, std::string* why) {
  auto fail = [&](const std::string& w) {
    if (why) *why = w;
    return false;
  };
  std::vector<int> pos(a.size(), -1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || static_cast<std::size_t>(p[i]) >= a.size()) return fail("move out of range");
    if (pos[static_cast<std::size_t>(p[i])] >= 0) return fail("repeated move " + a.move(p[i]).str());
    pos[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
  }
  std::map<int, int> reps;
  for (int m : p)
    if (!reps.emplace(a.alt(m), m).second) return fail("two alternatives of " + a.move(m).str());
  for (std::size_t m = 0; m < a.size(); ++m)
    if (!reps.count(a.alt(static_cast<int>(m)))) return fail("no alternative of " + a.move(static_cast<int>(m)).str());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int m = p[i];
    if (!a.initial(m)) {
      int count = 0;
      for (int e : a.enablers(m)) count += pos[static_cast<std::size_t>(e)] >= 0;
      if (count != 1) return fail(a.move(m).str() + " has " + std::to_string(count) + " enablers in the play");
    }
    if (a.move(m).question) {
      int answers = 0;
      for (int b : a.enabled(m)) answers += !a.move(b).question && pos[static_cast<std::size_t>(b)] >= 0;
      if (answers != 1) return fail(a.move(m).str() + " has " + std::to_string(answers) + " answers");
    }
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (a.precedes(p[j], m)) return fail(a.move(p[j]).str() + " must precede " + a.move(m).str());
  }
  return true;
}

std::vector<Play> legal_plays(const Arena& a, std::size_t limit) { return Enumerator(a, {}, limit).run(); }

// --- strategies --------------------------------------------------------------

std::set<std::vector<std::string>> Strategy::keyed() const {
  std::set<std::vector<std::string>> out;
  for (const auto& p : plays) {
    std::vector<std::string> k;
    for (int m : p) k.push_back(arena.move(m).key());
    out.insert(std::move(k));
  }
  return out;
}

bool operator==(const Strategy& a, const Strategy& b) { return a.arena == b.arena && a.keyed() == b.keyed(); }

Strategy strategy_from(const Arena& arena, const std::function<bool(const Arena&, const Play&)>& keep) {
  std::set<Play> plays;
  for (auto& p : legal_plays(arena))
    if (keep(arena, p)) plays.insert(std::move(p));
  return with_arena(arena, std::move(plays));
}

Strategy copycat(const Arena& a) {
  Arena c = arrow(a, a);
  const int n = static_cast<int>(a.size());
  // Left copy first for P-moves of A, right copy first for O-moves.
  auto allow = [&](const std::vector<char>& placed, int m) {
    const int base = m < n ? m : m - n;
    const int twin = m < n ? m + n : m - n;
    const bool right = m >= n;
    const bool o_move = a.move(base).player == Player::O;
    const bool first = right == o_move;
    if (!first && !placed[static_cast<std::size_t>(twin)]) return false;
    if (first && placed[static_cast<std::size_t>(twin)]) return false;
    // The twin's class must not be represented by a different move.
    for (int k = 0; k < 2 * n; ++k)
      if (placed[static_cast<std::size_t>(k)] && k != twin && c.alt(k) == c.alt(twin)) return false;
    return true;
  };
  std::set<Play> plays;
  for (auto& p : Enumerator(c, allow, 2000000).run()) plays.insert(std::move(p));
  return with_arena(c, std::move(plays));
}

Strategy relabel(const Strategy& s,
                 const std::function<std::vector<std::string>(const std::vector<std::string>&)>& f) {
  Arena out;
  embed(out, s.arena, f, same, false);
  return with_arena(out, s.plays);
}

Strategy retime(const Strategy& s, const Stage& x) {
  Arena out;
  embed(out, s.arena, [](const auto& p) { return p; }, [&](const Rational& t) { return x.apply(t); }, false);
  return with_arena(out, s.plays);
}

namespace {

std::vector<std::string> tail(const std::vector<std::string>& p) { return {p.begin() + 1, p.end()}; }

/// Merges one play per part; see `interact`.
class Merger {
 public:
  struct Elem {
    Rational time;
    int visible = -1;          // index in the result arena
    int partner_seq = -1;      // for synchronized moves
    std::size_t partner_pos = 0;
    std::vector<std::pair<std::size_t, std::size_t>> preds;  // (seq, pos) of visible predecessors
  };

  explicit Merger(std::vector<std::vector<Elem>> seqs) : seqs_(std::move(seqs)) {}

  const std::vector<Play>& run() { return suffixes(std::vector<std::size_t>(seqs_.size(), 0)); }

 private:
  const std::vector<Play>& suffixes(const std::vector<std::size_t>& pos) {
    auto it = memo_.find(pos);
    if (it != memo_.end()) return it->second;
    std::vector<Play> out;
    bool done = true;
    for (std::size_t s = 0; s < seqs_.size(); ++s) done = done && pos[s] == seqs_[s].size();
    if (done) out.push_back({});
    for (std::size_t s = 0; s < seqs_.size(); ++s) {
      if (pos[s] == seqs_[s].size()) continue;
      const Elem& e = seqs_[s][pos[s]];
      std::vector<std::size_t> next = pos;
      next[s]++;
      if (e.partner_seq >= 0) {
        if (static_cast<std::size_t>(e.partner_seq) < s) continue;  // taken from the other side
        const auto ps = static_cast<std::size_t>(e.partner_seq);
        if (pos[ps] != e.partner_pos) continue;
        next[ps]++;
      }
      bool ok = true;
      for (std::size_t o = 0; o < seqs_.size() && ok; ++o) {
        if (o == s || (e.partner_seq >= 0 && o == static_cast<std::size_t>(e.partner_seq))) continue;
        if (pos[o] < seqs_[o].size() && seqs_[o][pos[o]].time < e.time) ok = false;
      }
      for (const auto& [ps, pp] : e.preds) ok = ok && pos[ps] > pp;
      if (!ok) continue;
      for (const auto& suffix : suffixes(next)) {
        Play p;
        if (e.visible >= 0) p.push_back(e.visible);
        p.insert(p.end(), suffix.begin(), suffix.end());
        out.push_back(std::move(p));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return memo_[pos] = std::move(out);
  }

  std::vector<std::vector<Elem>> seqs_;
  std::map<std::vector<std::size_t>, std::vector<Play>> memo_;
};

}  // namespace

Strategy interact(const Strategy& hub, const std::vector<Strategy>& spokes, bool hide) {
  std::vector<const Strategy*> parts{&hub};
  for (const auto& s : spokes) parts.push_back(&s);
  const std::size_t np = parts.size();
  // Shared moves: same key in the hub and one spoke.
  std::vector<std::vector<int>> partner(np);  // index of the same key in the other part, or -1
  std::vector<std::vector<int>> visible(np);  // index in the result arena, or -1
  for (std::size_t i = 0; i < np; ++i) {
    partner[i].assign(parts[i]->arena.size(), -1);
    visible[i].assign(parts[i]->arena.size(), -1);
  }
  std::map<std::string, std::size_t> owner;
  for (std::size_t i = 1; i < np; ++i)
    for (const auto& mv : parts[i]->arena.moves())
      if (!owner.emplace(mv.key(), i).second) throw Error(ErrorKind::mismatch, "spokes share the move " + mv.key());
  for (std::size_t m = 0; m < hub.arena.size(); ++m) {
    const Move& hm = hub.arena.move(static_cast<int>(m));
    auto it = owner.find(hm.key());
    if (it == owner.end()) continue;
    const Arena& sa = parts[it->second]->arena;
    const int k = *sa.find(hm.key());
    const Move& sm = sa.move(k);
    if (sm.time != hm.time || sm.question != hm.question || sm.dummy != hm.dummy || sm.player == hm.player)
      throw Error(ErrorKind::mismatch, "arena mismatch at " + hm.key());
    partner[0][m] = k;
    partner[it->second][static_cast<std::size_t>(k)] = static_cast<int>(m);
  }
  Arena out;
  std::vector<std::pair<std::size_t, int>> origin;
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t m = 0; m < parts[i]->arena.size(); ++m)
      if (partner[i][m] < 0 || (!hide && i == 0)) {
        visible[i][m] = out.add(parts[i]->arena.move(static_cast<int>(m)));
        origin.emplace_back(i, static_cast<int>(m));
      }
  auto other = [&](std::size_t i, int m) -> std::pair<std::size_t, int> {
    const int k = partner[i][static_cast<std::size_t>(m)];
    if (i != 0) return {0, k};
    return {owner.at(hub.arena.move(m).key()), k};
  };
  for (std::size_t v = 0; v < origin.size(); ++v) {
    const auto [i, m] = origin[v];
    // Visible enablers, reached through chains of hidden moves.
    std::set<std::pair<std::size_t, int>> seen;
    std::deque<std::pair<std::size_t, int>> work{{i, m}};
    while (!work.empty()) {
      auto [pi, pm] = work.front();
      work.pop_front();
      std::vector<std::pair<std::size_t, int>> sources{{pi, pm}};
      if (partner[pi][static_cast<std::size_t>(pm)] >= 0) sources.push_back(other(pi, pm));
      for (const auto& [si, sm] : sources)
        for (int e : parts[si]->arena.enablers(sm)) {
          if (!seen.insert({si, e}).second) continue;
          const auto [vi, ve] = visible[si][static_cast<std::size_t>(e)] < 0 && !hide && si != 0
                                    ? other(si, e)
                                    : std::pair<std::size_t, int>{si, e};
          if (visible[vi][static_cast<std::size_t>(ve)] >= 0)
            out.enable(visible[vi][static_cast<std::size_t>(ve)], static_cast<int>(v));
          else
            work.emplace_back(si, e);
        }
    }
    const int rep = parts[i]->arena.alt(m);
    if (visible[i][static_cast<std::size_t>(rep)] >= 0) out.alternative(static_cast<int>(v), visible[i][static_cast<std::size_t>(rep)]);
  }
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t m = 0; m < parts[i]->arena.size(); ++m) {
      if (visible[i][m] < 0) continue;
      for (std::size_t k = 0; k < m; ++k)
        if (visible[i][k] >= 0 && parts[i]->arena.alt(static_cast<int>(k)) == parts[i]->arena.alt(static_cast<int>(m)))
          out.alternative(visible[i][k], visible[i][m]);
    }
  const Relation& prec = out.precedence();

  // Index spoke plays by their shared subsequence (in hub indices).
  std::vector<std::map<Play, std::vector<const Play*>>> index(np);
  for (std::size_t i = 1; i < np; ++i)
    for (const auto& p : parts[i]->plays) {
      Play key;
      for (int m : p)
        if (partner[i][static_cast<std::size_t>(m)] >= 0) key.push_back(partner[i][static_cast<std::size_t>(m)]);
      index[i][key].push_back(&p);
    }

  std::set<Play> result;
  std::vector<const Play*> chosen(np);
  std::function<void(std::size_t)> pick = [&](std::size_t i) {
    if (i == np) {
      std::vector<std::vector<Merger::Elem>> seqs(np);
      std::vector<std::vector<std::size_t>> where(np);
      std::vector<std::pair<std::size_t, std::size_t>> at_visible(out.size(), {SIZE_MAX, 0});
      for (std::size_t s = 0; s < np; ++s) {
        where[s].assign(parts[s]->arena.size(), SIZE_MAX);
        for (std::size_t k = 0; k < chosen[s]->size(); ++k) where[s][static_cast<std::size_t>((*chosen[s])[k])] = k;
      }
      for (std::size_t s = 0; s < np; ++s)
        for (std::size_t k = 0; k < chosen[s]->size(); ++k) {
          const int m = (*chosen[s])[k];
          Merger::Elem e;
          e.time = parts[s]->arena.move(m).time;
          e.visible = visible[s][static_cast<std::size_t>(m)];
          if (partner[s][static_cast<std::size_t>(m)] >= 0) {
            auto [ps, pm] = other(s, m);
            e.partner_seq = static_cast<int>(ps);
            e.partner_pos = where[ps][static_cast<std::size_t>(pm)];
          }
          if (e.visible >= 0) at_visible[static_cast<std::size_t>(e.visible)] = {s, k};
          seqs[s].push_back(std::move(e));
        }
      for (std::size_t s = 0; s < np; ++s)
        for (auto& e : seqs[s]) {
          if (e.visible < 0) continue;
          for (std::size_t u = 0; u < out.size(); ++u)
            if (prec[u][static_cast<std::size_t>(e.visible)] && at_visible[u].first != SIZE_MAX)
              e.preds.push_back(at_visible[u]);
        }
      Merger merger(std::move(seqs));
      for (const auto& p : merger.run()) {
        std::string why;
        if (hide && !is_play(out, p, &why))
          throw Error(ErrorKind::internal, "interaction produced an illegal play: " + why);
        result.insert(p);
      }
      return;
    }
    Play key;
    for (int m : *chosen[0]) {
      const int k = partner[0][static_cast<std::size_t>(m)];
      if (k >= 0 && owner.at(hub.arena.move(m).key()) == i) key.push_back(m);
    }
    auto it = index[i].find(key);
    if (it == index[i].end()) return;
    for (const Play* p : it->second) {
      chosen[i] = p;
      pick(i + 1);
    }
  };
  for (const auto& h : hub.plays) {
    chosen[0] = &h;
    pick(1);
  }
  return with_arena(out, std::move(result));
}

namespace {

/// Checks that the `r` side of s and the `a` side of t are the same arena.
void check_middle(const Strategy& s, const Strategy& t) {
  std::size_t count = 0;
  for (const auto& mv : s.arena.moves()) {
    if (mv.path.empty() || mv.path[0] != "r") continue;
    ++count;
    Move m = mv;
    m.path[0] = "a";
    auto k = t.arena.find(m.key());
    if (!k) throw Error(ErrorKind::mismatch, "arena mismatch: " + mv.key() + " has no counterpart");
    const Move& o = t.arena.move(*k);
    if (o.time != mv.time || o.question != mv.question || o.dummy != mv.dummy || o.player == mv.player)
      throw Error(ErrorKind::mismatch, "arena mismatch at " + mv.key());
  }
  std::size_t theirs = 0;
  for (const auto& mv : t.arena.moves()) theirs += !mv.path.empty() && mv.path[0] == "a";
  if (count != theirs) throw Error(ErrorKind::mismatch, "arena mismatch: middle arenas differ in size");
}

}  // namespace

Strategy compose(const Strategy& s, const Strategy& t) {
  check_middle(s, t);
  Strategy left = relabel(s, [](const auto& p) {
    if (p[0] == "r") return with_prefix("#", tail(p));
    return p;
  });
  Strategy right = relabel(t, [](const auto& p) {
    if (p[0] == "a") return with_prefix("#", tail(p));
    return p;
  });
  return interact(left, {right});
}

Strategy interleave(const Strategy& s, const Strategy& t) {
  auto tag = [](const std::string& label) {
    return [label](const std::vector<std::string>& p) {
      std::vector<std::string> out{p[0], label};
      out.insert(out.end(), p.begin() + 1, p.end());
      return out;
    };
  };
  Strategy l = relabel(s, tag("0")), r = relabel(t, tag("1"));
  return interact(l, {r});
}

Strategy extend(const Strategy& s, const Arena& extended, const std::vector<Play>& fill) {
  std::vector<int> at(s.arena.size());
  for (std::size_t m = 0; m < s.arena.size(); ++m) {
    auto k = extended.find(s.arena.move(static_cast<int>(m)).key());
    if (!k) throw Error(ErrorKind::mismatch, "extended arena lacks " + s.arena.move(static_cast<int>(m)).key());
    at[m] = *k;
  }
  const Relation& prec = extended.precedence();
  std::set<Play> result;
  for (const auto& p : s.plays) {
    Play base;
    for (int m : p) base.push_back(at[static_cast<std::size_t>(m)]);
    for (const auto& f : fill) {
      // Shuffles of base and f that respect the extended precedence.
      std::function<void(std::size_t, std::size_t, Play&)> go = [&](std::size_t i, std::size_t j, Play& cur) {
        if (i == base.size() && j == f.size()) {
          std::string why;
          if (!is_play(extended, cur, &why)) throw Error(ErrorKind::internal, "extension produced an illegal play: " + why);
          result.insert(cur);
          return;
        }
        auto ok = [&](int m) {
          for (std::size_t k = i; k < base.size(); ++k)
            if (base[k] != m && prec[static_cast<std::size_t>(base[k])][static_cast<std::size_t>(m)]) return false;
          for (std::size_t k = j; k < f.size(); ++k)
            if (f[k] != m && prec[static_cast<std::size_t>(f[k])][static_cast<std::size_t>(m)]) return false;
          return true;
        };
        if (i < base.size() && ok(base[i])) {
          cur.push_back(base[i]);
          go(i + 1, j, cur);
          cur.pop_back();
        }
        if (j < f.size() && ok(f[j])) {
          cur.push_back(f[j]);
          go(i, j + 1, cur);
          cur.pop_back();
        }
      };
      Play cur;
      go(0, 0, cur);
    }
  }
  return with_arena(extended, std::move(result));
}

Strategy saturate(const Strategy& s) {
  std::set<Play> all = s.plays;
  std::deque<Play> work(s.plays.begin(), s.plays.end());
  while (!work.empty()) {
    Play p = std::move(work.front());
    work.pop_front();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      const Move &m = s.arena.move(p[i]), &n = s.arena.move(p[i + 1]);
      if (m.player != Player::P && n.player != Player::O) continue;
      if (s.arena.precedes(p[i], p[i + 1])) continue;
      Play q = p;
      std::swap(q[i], q[i + 1]);
      if (all.count(q) || !is_play(s.arena, q)) continue;
      all.insert(q);
      work.push_back(std::move(q));
    }
  }
  return with_arena(s.arena, std::move(all));
}

namespace {

std::set<Play> prefixes(const std::set<Play>& plays) {
  std::set<Play> out;
  for (const auto& p : plays)
    for (std::size_t n = 0; n <= p.size(); ++n) out.insert(Play(p.begin(), p.begin() + static_cast<long>(n)));
  return out;
}

}  // namespace

bool responsive(const Strategy& s, std::string* why) {
  const std::set<Play> mine = prefixes(s.plays);
  auto all = legal_plays(s.arena);
  const std::set<Play> arena_positions = prefixes(std::set<Play>(all.begin(), all.end()));
  for (const auto& q : arena_positions) {
    if (q.empty()) continue;
    if (s.arena.move(q.back()).player != Player::O) continue;
    Play before(q.begin(), q.end() - 1);
    if (mine.count(before) && !mine.count(q)) {
      if (why) {
        *why = "no response after";
        for (int m : q) *why += " " + s.arena.move(m).str();
      }
      return false;
    }
  }
  return true;
}

bool saturated(const Strategy& s, std::string* why) {
  for (const auto& p : s.plays)
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      const Move &m = s.arena.move(p[i]), &n = s.arena.move(p[i + 1]);
      if (m.player != Player::P && n.player != Player::O) continue;
      Play q = p;
      std::swap(q[i], q[i + 1]);
      if (is_play(s.arena, q) && !s.plays.count(q)) {
        if (why) *why = "missing swap of " + m.str() + " and " + n.str();
        return false;
      }
    }
  return true;
}

std::optional<Relation> deadlock_free(const Strategy& s, std::string* why) {
  const Arena& a = s.arena;
  const std::size_t n = a.size();
  Relation r = a.precedence();
  const std::set<Play> pos = prefixes(s.plays);
  for (const auto& p : pos) {
    if (p.size() < 2) continue;
    Play q = p;
    std::swap(q[q.size() - 1], q[q.size() - 2]);
    if (!pos.count(q)) r[static_cast<std::size_t>(p[p.size() - 2])][static_cast<std::size_t>(p.back())] = 1;
  }
  close(r, a);
  for (std::size_t m = 0; m < n; ++m)
    if (r[m][m]) {
      if (why) *why = "cyclic precedence at " + a.move(static_cast<int>(m)).str();
      return std::nullopt;
    }
  // Reflexive-transitive enablers.
  std::vector<std::set<int>> anc(n);
  std::function<const std::set<int>&(int)> ancestors = [&](int m) -> const std::set<int>& {
    auto& out = anc[static_cast<std::size_t>(m)];
    if (!out.empty()) return out;
    out.insert(m);
    for (int e : a.enablers(m)) {
      const auto& up = ancestors(e);
      out.insert(up.begin(), up.end());
    }
    return out;
  };
  const Relation& arena_prec = a.precedence();
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) {
      if (!r[m][k] || arena_prec[m][k]) continue;
      const auto &am = ancestors(static_cast<int>(m)), &ak = ancestors(static_cast<int>(k));
      std::vector<int> common;
      std::set_intersection(am.begin(), am.end(), ak.begin(), ak.end(), std::back_inserter(common));
      bool o_last = !common.empty();
      for (int c : common) {
        bool last = true;
        for (int d : common)
          if (d != c && ancestors(d).count(c)) last = false;
        if (last && a.move(c).player != Player::O) o_last = false;
      }
      if (!o_last) {
        if (why)
          *why = a.move(static_cast<int>(m)).str() + " must precede " + a.move(static_cast<int>(k)).str() +
                 " without an O-move as last common enabler";
        return std::nullopt;
      }
    }
  return r;
}

bool every_play_legal(const Strategy& s, std::string* why) {
  for (const auto& p : s.plays)
    if (!is_play(s.arena, p, why)) return false;
  return true;
}

std::string dump(const Strategy& s) {
  std::vector<std::string> lines;
  for (const auto& p : s.plays) {
    std::string line;
    for (int m : p) line += (line.empty() ? "" : " ") + s.arena.move(m).str();
    lines.push_back(line.empty() ? "-" : line);
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::vector<Strategy> sample_strategies(const Arena& a, const Arena& b, std::size_t count, std::mt19937_64& rng) {
  Arena c = arrow(a, b);
  const auto plays = legal_plays(c);
  const std::size_t n = c.size();
  std::vector<int> reps;
  for (std::size_t m = 0; m < n; ++m)
    if (c.alt(static_cast<int>(m)) == static_cast<int>(m)) reps.push_back(static_cast<int>(m));
  std::vector<int> p_classes, o_classes;
  for (int r : reps) (c.move(r).player == Player::P ? p_classes : o_classes).push_back(r);
  // Information available to each P-class: the O-classes preceding it.
  std::map<int, std::vector<int>> info;
  for (int pc : p_classes)
    for (int oc : o_classes)
      if (c.precedes(oc, pc)) info[pc].push_back(oc);
  auto member = [&](const Play& p, int cls) {
    for (int m : p)
      if (c.alt(m) == cls) return m;
    return -1;
  };
  // Decision points: (P-class, history) with the members seen there.
  std::map<std::pair<int, std::vector<int>>, std::set<int>> options;
  std::vector<std::vector<std::pair<int, std::vector<int>>>> decisions(plays.size());
  for (std::size_t i = 0; i < plays.size(); ++i)
    for (int pc : p_classes) {
      std::vector<int> hist;
      for (int oc : info[pc]) hist.push_back(member(plays[i], oc));
      options[{pc, hist}].insert(member(plays[i], pc));
      decisions[i].push_back({pc, hist});
    }
  std::vector<std::pair<std::pair<int, std::vector<int>>, std::vector<int>>> points;
  double total = 1;
  for (const auto& [k, v] : options) {
    points.push_back({k, std::vector<int>(v.begin(), v.end())});
    total *= static_cast<double>(v.size());
  }
  std::set<std::vector<std::size_t>> policies;
  if (total <= static_cast<double>(count)) {
    std::vector<std::size_t> digits(points.size(), 0);
    while (true) {
      policies.insert(digits);
      std::size_t d = 0;
      while (d < digits.size() && ++digits[d] == points[d].second.size()) digits[d++] = 0;
      if (d == digits.size()) break;
    }
  } else {
    for (std::size_t tries = 0; policies.size() < count && tries < count * 20; ++tries) {
      std::vector<std::size_t> digits;
      for (const auto& pt : points) digits.push_back(std::uniform_int_distribution<std::size_t>(0, pt.second.size() - 1)(rng));
      policies.insert(digits);
    }
  }
  std::map<std::pair<int, std::vector<int>>, std::size_t> point_index;
  for (std::size_t i = 0; i < points.size(); ++i) point_index[points[i].first] = i;
  std::vector<Strategy> out;
  std::set<std::set<Play>> seen;
  for (const auto& pol : policies) {
    std::set<Play> chosen;
    for (std::size_t i = 0; i < plays.size(); ++i) {
      bool keep = true;
      for (std::size_t d = 0; d < p_classes.size() && keep; ++d) {
        const auto& dec = decisions[i][d];
        const std::size_t pi = point_index.at(dec);
        keep = member(plays[i], dec.first) == points[pi].second[pol[pi]];
      }
      if (keep) chosen.insert(plays[i]);
    }
    if (chosen.empty() || !seen.insert(chosen).second) continue;
    Strategy s{c, std::move(chosen)};
    if (!responsive(s) || !deadlock_free(s)) continue;
    out.push_back(std::move(s));
  }
  return out;
}

// --- isomorphisms ------------------------------------------------------------

bool is_isomorphism(const Arena& a, const Arena& b, const std::vector<int>& map, std::string* why) {
  auto fail = [&](const std::string& w) {
    if (why) *why = w;
    return false;
  };
  if (a.size() != b.size() || map.size() != a.size()) return fail("sizes differ");
  std::vector<char> hit(b.size(), 0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (map[m] < 0 || static_cast<std::size_t>(map[m]) >= b.size() || hit[static_cast<std::size_t>(map[m])])
      return fail("not a bijection at " + a.move(static_cast<int>(m)).str());
    hit[static_cast<std::size_t>(map[m])] = 1;
    const Move &x = a.move(static_cast<int>(m)), &y = b.move(map[m]);
    if (x.time != y.time) return fail("timing differs: " + x.str() + " vs " + y.str());
    if (x.player != y.player || x.question != y.question || x.dummy != y.dummy)
      return fail("labels differ: " + x.str() + " vs " + y.str());
  }
  for (std::size_t m = 0; m < a.size(); ++m)
    for (std::size_t k = 0; k < a.size(); ++k) {
      const int mi = static_cast<int>(m), ki = static_cast<int>(k);
      if (a.enables(mi, ki) != b.enables(map[m], map[k]))
        return fail("enabling differs at " + a.move(mi).str() + " ⊢ " + a.move(ki).str());
      if ((a.alt(mi) == a.alt(ki)) != (b.alt(map[m]) == b.alt(map[k])))
        return fail("alternatives differ at " + a.move(mi).str() + ", " + a.move(ki).str());
    }
  return true;
}

std::vector<int> action_iso(const Schedule& j, const Schedule& k, const Arena& a, const Arena& jk_a,
                            const Arena& j_k_a) {
  (void)a;
  std::vector<Stage> xs, ys, zs;
  std::vector<std::uint64_t> xm, ym;
  for (const auto& [x, m] : j.entries()) xs.push_back(x), xm.push_back(m);
  for (const auto& [y, m] : k.entries()) ys.push_back(y), ym.push_back(m);
  const Schedule jk = j * k;
  for (const auto& [z, m] : jk.entries()) zs.push_back(z);
  // (i, k, i', k') in lexicographic order -> (index of the product, occurrence).
  std::map<std::pair<std::pair<std::size_t, std::uint64_t>, std::pair<std::size_t, std::uint64_t>>,
           std::pair<std::size_t, std::uint64_t>>
      table;
  std::map<std::size_t, std::uint64_t> next;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::uint64_t ki = 0; ki < xm[i]; ++ki)
      for (std::size_t i2 = 0; i2 < ys.size(); ++i2)
        for (std::uint64_t k2 = 0; k2 < ym[i2]; ++k2) {
          const Stage z = xs[i].compose(ys[i2]);
          const auto zi = static_cast<std::size_t>(std::find(zs.begin(), zs.end(), z) - zs.begin());
          table[{{i, ki}, {i2, k2}}] = {zi, next[zi]++};
        }
  std::vector<int> map(jk_a.size(), -1);
  for (std::size_t m = 0; m < j_k_a.size(); ++m) {
    const Move& mv = j_k_a.move(static_cast<int>(m));
    auto outer = parse_copy(mv.path.at(0)), inner = parse_copy(mv.path.at(1));
    if (!outer || !inner) throw Error(ErrorKind::mismatch, "not a nested schedule action: " + mv.key());
    auto [zi, occ] = table.at({*outer, *inner});
    Move target = mv;
    target.path = with_prefix(copy_label(zi, occ), {mv.path.begin() + 2, mv.path.end()});
    auto at = jk_a.find(target.key());
    if (!at) throw Error(ErrorKind::mismatch, "no counterpart for " + mv.key());
    map[static_cast<std::size_t>(*at)] = static_cast<int>(m);
  }
  return map;
}

std::vector<int> sum_iso(const Schedule& j, const Schedule& k, const Arena& a, const Arena& tensor_side,
                         const Arena& sum_side) {
  (void)a;
  std::vector<Stage> xs, ys, zs;
  for (const auto& [x, m] : j.entries()) xs.push_back(x);
  for (const auto& [y, m] : k.entries()) ys.push_back(y);
  const Schedule sum = j + k;
  for (const auto& [z, m] : sum.entries()) zs.push_back(z);
  std::vector<int> map(tensor_side.size(), -1);
  for (std::size_t m = 0; m < tensor_side.size(); ++m) {
    const Move& mv = tensor_side.move(static_cast<int>(m));
    auto copy = parse_copy(mv.path.at(1));
    if (!copy || (mv.path[0] != "0" && mv.path[0] != "1"))
      throw Error(ErrorKind::mismatch, "not a tensor of schedule actions: " + mv.key());
    const bool left = mv.path[0] == "0";
    const Stage z = left ? xs.at(copy->first) : ys.at(copy->first);
    const std::uint64_t occ = copy->second + (left ? 0 : j.multiplicity(z));
    const auto zi = static_cast<std::size_t>(std::find(zs.begin(), zs.end(), z) - zs.begin());
    Move target = mv;
    target.path = with_prefix(copy_label(zi, occ), {mv.path.begin() + 2, mv.path.end()});
    auto at = sum_side.find(target.key());
    if (!at) throw Error(ErrorKind::mismatch, "no counterpart for " + mv.key());
    map[m] = *at;
  }
  return map;
}

}  // namespace pia::games
