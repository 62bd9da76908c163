// SPDX-License-Identifier: Apache-2.0
//
// Exact rational arithmetic used throughout the library.

#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace pia {

using Rational = mpq_class;

/// Parses "3", "-2", "0.265625", "1/8", "1e-3" exactly. Returns nullopt on
/// malformed input.
std::optional<Rational> parse_rational(std::string_view text);

/// Terminating decimals print as decimals ("0.5", "1", "0.265625"); other
/// values print as "num/den".
std::string to_string(const Rational& r);

inline Rational rat(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace pia
