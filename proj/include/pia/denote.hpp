// SPDX-License-Identifier: Apache-2.0
//
// Game denotation of checked judgments. A derivation node with context
// Γ ⊢ M : θ denotes a strategy on ⊗Γ ⊸ ⟦θ⟧.
//
// Inside a derivation a context copy is addressed as
// `a/<entry>/<leaf>/<tags>/<θ path>`: the entry name (renamed by contraction),
// the linear occurrence it came from, and one `@<stage>#<k>` tag per
// application that scaled it, outermost first. Abstraction and the root turn
// the copies of one identifier into the canonical `c{i}.{k}` labels, ordering
// copies of equal stage by their leaf and tags.

#pragma once

#include <vector>

#include "pia/check.hpp"
#include "pia/games.hpp"

namespace pia {

games::Arena type_arena(const Type& t, unsigned max_int);

/// The strategy of a constant at its concrete type, on I ⊸ ⟦type⟧.
games::Strategy constant_strategy(ConstId id, const Type& type, unsigned max_int);

/// Strategy on ⊗(x : J·θ) ⊸ ⟦θ⟧ over the declarations in order. Throws
/// Error(type) when the judgment is rejected by `check_judgment`.
games::Strategy denote(const Document& judgment, unsigned max_int = 2);
games::Strategy denote(const Derivation& root, unsigned max_int = 2);

/// The interaction of the root's application without hiding, for a root
/// whose term is an application (e.g. `new` applied to its body).
games::Strategy denote_trace(const Derivation& root, unsigned max_int = 2);

/// Other derivation trees of the same judgment: explicit binary contractions
/// in every bracketing, and contractions pushed into application subterms.
std::vector<Derivation> derivation_variants(const Derivation& root);

}  // namespace pia
