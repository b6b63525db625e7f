#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace phyloalg {

using Rational = mpq_class;
using Integer = mpz_class;

// Parses "p/q", an integer, or a decimal with optional exponent ("0.0606",
// "1.5e-3") into the exact rational it denotes.
Rational parse_rational(std::string_view text);

Integer floor_rational(const Rational& r);

// Canonical "p/q" form; integers are written "p/1".
std::string to_pq(const Rational& r);

// Scientific rendering with 5 significant digits, e.g. "4.6768e-04".
std::string to_sci5(double x);
std::string to_sci5(const Rational& r);

// Number of digits after the decimal point in a decimal literal (0 for
// integers and "p/q" forms).  Exponents shift the count.
int decimal_places(std::string_view text);

} // namespace phyloalg
