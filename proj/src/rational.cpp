#include "skembed/rational.hpp"

#include "skembed/error.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <limits>
#include <string>
#include <mpfr.h>

namespace skembed {

namespace {

Rational parse_decimal(std::string_view text) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    long exponent = 0;
    bool seen_digit = false;
    bool seen_point = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_point) --exponent;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw Error(ErrorCode::InvalidArgument, "not a number: '" + std::string(text) + "'");
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        long e = 0;
        const char* first = text.data() + pos + 1;
        const char* last = text.data() + text.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, e);
        if (ec != std::errc() || ptr != last) {
            throw Error(ErrorCode::InvalidArgument, "bad exponent in '" + std::string(text) + "'");
        }
        exponent += e;
        pos = text.size();
    }
    if (pos != text.size()) throw Error(ErrorCode::InvalidArgument, "not a number: '" + std::string(text) + "'");
    if (exponent > 4000 || exponent < -4000) throw Error(ErrorCode::InvalidArgument, "exponent out of range");

    mpz_class numerator(digits, 10);
    mpz_class power;
    mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    Rational q = exponent < 0 ? Rational(numerator, power) : Rational(numerator * power);
    q.canonicalize();
    return negative ? Rational(-q) : q;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

Rational parse_rational(std::string_view text) {
    text = trim(text);
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return parse_decimal(text);
    const Rational num = parse_decimal(trim(text.substr(0, slash)));
    const Rational den = parse_decimal(trim(text.substr(slash + 1)));
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator in '" + std::string(text) + "'");
    Rational q = num / den;
    q.canonicalize();
    return q;
}

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite number");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw Error(ErrorCode::InvalidArgument, "cannot format double");
    return parse_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

double to_double(const Rational& q) {
    // mpq_get_d truncates; MPFR rounds to nearest, so 2/5 -> 0.4 exactly as the literal
    mpfr_t x;
    mpfr_init2(x, 53);
    mpfr_set_q(x, q.get_mpq_t(), MPFR_RNDN);
    const double d = mpfr_get_d(x, MPFR_RNDN);
    mpfr_clear(x);
    return d;
}

std::int64_t to_int64(const Rational& q) {
    if (!is_integer(q)) throw Error(ErrorCode::InvalidArgument, "not an integer: " + to_string(q));
    const mpz_class& n = q.get_num();
    if (n > mpz_class(std::to_string(std::numeric_limits<std::int64_t>::max())) ||
        n < mpz_class(std::to_string(std::numeric_limits<std::int64_t>::min()))) {
        throw Error(ErrorCode::InvalidArgument, "integer out of 64-bit range: " + n.get_str());
    }
    return std::stoll(n.get_str());
}

} // namespace skembed
