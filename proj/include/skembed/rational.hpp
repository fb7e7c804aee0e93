#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace skembed {

using Rational = mpq_class;

/// Parses "3", "-2/6", "0.25" or "1e-3". Decimal text is read exactly, so
/// "0.1" is 1/10 rather than the nearest double.
Rational parse_rational(std::string_view text);

/// Exact rational of the shortest decimal string that round-trips `x`.
Rational rational_from_double(double x);

/// Canonical form: "a" for integers, "a/b" otherwise.
std::string to_string(const Rational& q);

bool is_integer(const Rational& q);
double to_double(const Rational& q);

/// Requires is_integer(q) and a value that fits in 64 bits.
std::int64_t to_int64(const Rational& q);

} // namespace skembed
