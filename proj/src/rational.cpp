// SPDX-License-Identifier: Apache-2.0

#include "pia/rational.hpp"

#include <cctype>

namespace pia {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

Rational pow10(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e));
  return Rational(p);
}

std::optional<Rational> parse_unsigned_decimal(std::string_view s) {
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp = s.substr(e + 1);
    bool neg = false;
    if (!exp.empty() && (exp[0] == '-' || exp[0] == '+')) {
      neg = exp[0] == '-';
      exp.remove_prefix(1);
    }
    if (!all_digits(exp) || exp.size() > 6) return std::nullopt;
    exponent = std::stol(std::string(exp));
    if (neg) exponent = -exponent;
    s = s.substr(0, e);
  }
  std::string_view int_part = s, frac_part;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    int_part = s.substr(0, dot);
    frac_part = s.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  if (!int_part.empty() && !all_digits(int_part)) return std::nullopt;
  if (!frac_part.empty() && !all_digits(frac_part)) return std::nullopt;
  std::string digits = std::string(int_part) + std::string(frac_part);
  if (digits.empty()) digits = "0";
  Rational r{mpz_class(digits, 10)};
  long scale = static_cast<long>(frac_part.size()) - exponent;
  if (scale > 0)
    r /= pow10(scale);
  else if (scale < 0)
    r *= pow10(-scale);
  r.canonicalize();
  return r;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  std::optional<Rational> out;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = parse_unsigned_decimal(text.substr(0, slash));
    auto den = parse_unsigned_decimal(text.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    out = *num / *den;
    out->canonicalize();
  } else {
    out = parse_unsigned_decimal(text);
  }
  if (out && negative) *out = -*out;
  return out;
}

std::string to_string(const Rational& r) {
  mpz_class den = r.get_den();
  mpz_class rest = den;
  int twos = 0, fives = 0;
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 2)) {
    rest /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 5)) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) return r.get_num().get_str() + "/" + den.get_str();
  int places = std::max(twos, fives);
  if (places == 0) return r.get_num().get_str();
  Rational scaled = r * pow10(places);
  mpz_class n = scaled.get_num();  // exact integer
  bool neg = n < 0;
  if (neg) n = -n;
  std::string digits = n.get_str();
  if (static_cast<int>(digits.size()) <= places)
    digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
  digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  return (neg ? "-" : "") + digits;
}

}  // namespace pia
