// SPDX-License-Identifier: Apache-2.0
//
// Timed games: arenas with timings and dummy alternatives, plays, finite
// strategies, composition by interaction, copycat and interleaving.
//
// Moves are identified by a path of component labels plus a move id; the key
// `a/c0.0/r:q` names the move `q` reached through the labels `a`, `c0.0`, `r`.
// Arrow arenas label the argument `a` and the result `r`; schedule actions
// label the copy of stage index i and occurrence k as `c{i}.{k}`.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pia/semiring.hpp"

namespace pia::games {

enum class Player : std::uint8_t { O, P };

struct Move {
  std::vector<std::string> path;
  std::string id;
  Rational time;
  Player player = Player::O;
  bool question = true;
  bool dummy = false;

  std::string key() const;
  /// `path:id@time`
  std::string str() const;
};

using Play = std::vector<int>;
using Relation = std::vector<std::vector<char>>;

class Arena {
 public:
  int add(Move m);
  void enable(int m, int n);        // m ⊢ n
  void alternative(int m, int n);   // m ≍ n

  std::size_t size() const { return moves_.size(); }
  const Move& move(int i) const { return moves_[static_cast<std::size_t>(i)]; }
  const std::vector<Move>& moves() const { return moves_; }
  const std::vector<int>& enablers(int n) const { return enablers_[static_cast<std::size_t>(n)]; }
  const std::vector<int>& enabled(int m) const { return enabled_[static_cast<std::size_t>(m)]; }
  bool enables(int m, int n) const;
  bool initial(int m) const { return enablers(m).empty(); }
  /// Smallest index of the ≍-class of m.
  int alt(int m) const;
  std::optional<int> find(const std::string& key) const;

  /// Precedence ≺ (transitive, closed under ≍). Throws Error if the
  /// relation is not well-founded.
  const Relation& precedence() const;
  bool precedes(int m, int n) const { return precedence()[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]; }

  /// t_M and t_m; nullopt for an arena without initial moves.
  std::optional<std::pair<Rational, Rational>> may_interval() const;
  std::optional<std::pair<Rational, Rational>> must_interval() const;

  /// Pre-arena conditions and well-foundedness; throws Error naming the
  /// violated condition.
  void validate() const;

  /// Same moves by key with the same attributes, enabling and alternatives.
  friend bool operator==(const Arena& a, const Arena& b);

 private:
  void invalidate() { prec_.reset(); }
  std::vector<Move> moves_;
  std::vector<std::vector<int>> enablers_;
  std::vector<std::vector<int>> enabled_;
  std::vector<int> parent_;  // union-find for ≍
  std::map<std::string, int> index_;
  mutable std::shared_ptr<const Relation> prec_;
};

// --- arenas ------------------------------------------------------------------

/// Answers 0..max_int, the dummy question `~q` at 0 and dummy answer `~a` at 1.
Arena exp_arena(unsigned max_int);
/// `q`/`done` with dummies `~q`/`~a`.
Arena com_arena();
Arena empty_arena();

Arena stage_action(const Stage& x, const Arena& a);
/// One retimed copy per stage occurrence, labelled `c{i}.{k}` with i the index
/// of the distinct stage in canonical order.
Arena schedule_action(const Schedule& j, const Arena& a);
Arena tensor(const std::vector<std::pair<std::string, Arena>>& parts);
/// Throws Error(type) when t_M(a) ⊄ t_m(b) and `check` is set.
Arena arrow(const Arena& a, const Arena& b, bool check = true);
/// Prefixes every path with `label`.
Arena prefix(const std::string& label, const Arena& a);
/// Adds `part` under `path` on the argument side of `base`: labels flip and the
/// initial moves of `base` enable those of `part` as in an arrow.
Arena graft(const Arena& base, const Arena& part, const std::vector<std::string>& path);

// --- plays -------------------------------------------------------------------

/// Legality on the arena; `why` receives the first violated condition.
bool is_play(const Arena& a, const Play& p, std::string* why = nullptr);
/// All legal plays, up to `limit` (throws Error when exceeded).
std::vector<Play> legal_plays(const Arena& a, std::size_t limit = 2000000);

// --- strategies --------------------------------------------------------------

/// A set of plays over an arena whose top-level labels are `a` (argument
/// side) and `r` (result side).
struct Strategy {
  Arena arena;
  std::set<Play> plays;

  /// Plays as key sequences, sorted; arena-independent form.
  std::set<std::vector<std::string>> keyed() const;
  friend bool operator==(const Strategy& a, const Strategy& b);
};

/// All legal plays of `arena` accepted by `keep`.
Strategy strategy_from(const Arena& arena, const std::function<bool(const Arena&, const Play&)>& keep);

Strategy copycat(const Arena& a);
/// σ;τ for σ : A ⊸ B and τ : B ⊸ C. Throws Error on an arena mismatch.
Strategy compose(const Strategy& s, const Strategy& t);
/// σ ⊗ τ on (A⊗C) ⊸ (B⊗D) with componentwise enabling, labels `0` and `1`.
Strategy interleave(const Strategy& s, const Strategy& t);

/// Parallel composition with hiding: moves with the same key in the hub and
/// one spoke are synchronized and hidden; all others stay visible. Spokes
/// share no keys with each other. Enabling between visible moves is composed
/// through hidden moves.
/// With `hide` unset the synchronized moves stay in the plays (as the hub's
/// moves); the result is then an interaction trace, not a strategy.
Strategy interact(const Strategy& hub, const std::vector<Strategy>& spokes, bool hide = true);

/// Renames paths; the arena structure is carried over.
Strategy relabel(const Strategy& s, const std::function<std::vector<std::string>(const std::vector<std::string>&)>& f);
/// Retimes every move by the stage x.
Strategy retime(const Strategy& s, const Stage& x);
/// Adds `extra` moves to the arena and shuffles each play with every
/// ordering of `fill` (one play of the extended arena restricted to the new
/// moves), respecting the extended arena's precedence.
Strategy extend(const Strategy& s, const Arena& extended, const std::vector<Play>& fill);

/// Closes the play set under the swaps allowed by saturation.
Strategy saturate(const Strategy& s);

bool responsive(const Strategy& s, std::string* why = nullptr);
bool saturated(const Strategy& s, std::string* why = nullptr);
/// The least precedence relation for the strategy, if one exists.
std::optional<Relation> deadlock_free(const Strategy& s, std::string* why = nullptr);
bool every_play_legal(const Strategy& s, std::string* why = nullptr);

/// One play per line, moves `path:id@time` separated by spaces, lines sorted.
std::string dump(const Strategy& s);

/// Random strategies on a ⊸ b whose P-moves depend only on the O-moves that
/// precede them; at most `count`, all of them if there are few enough.
std::vector<Strategy> sample_strategies(const Arena& a, const Arena& b, std::size_t count, std::mt19937_64& rng);

// --- isomorphisms ------------------------------------------------------------

/// True when `map` (indices of `a` to indices of `b`) is a bijection that
/// preserves timing, labels, enabling and alternatives.
bool is_isomorphism(const Arena& a, const Arena& b, const std::vector<int>& map, std::string* why = nullptr);

/// The canonical bijection (J⊙K)·A → J·(K·A): pairs of copies taken in
/// lexicographic order are matched to the occurrences of their product stage.
std::vector<int> action_iso(const Schedule& j, const Schedule& k, const Arena& a, const Arena& jk_a,
                            const Arena& j_k_a);

/// The bijection J·A ⊗ K·A → (J+K)·A (labels `0` and `1`) that keeps the
/// copies of the left factor first among equal stages.
std::vector<int> sum_iso(const Schedule& j, const Schedule& k, const Arena& a, const Arena& tensor_side,
                         const Arena& sum_side);

}  // namespace pia::games
