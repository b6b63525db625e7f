#include "phyloalg/rational.hpp"

#include "phyloalg/error.hpp"

#include <fmt/format.h>

#include <cctype>

namespace phyloalg {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

struct DecimalParts {
    bool negative = false;
    std::string int_digits;
    std::string frac_digits;
    long exponent = 0;
};

DecimalParts split_decimal(std::string_view s, std::string_view original) {
    DecimalParts d;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        d.negative = s.front() == '-';
        s.remove_prefix(1);
    }
    auto epos = s.find_first_of("eE");
    std::string_view mant = s.substr(0, epos);
    if (epos != std::string_view::npos) {
        std::string_view ex = s.substr(epos + 1);
        bool neg = false;
        if (!ex.empty() && (ex.front() == '-' || ex.front() == '+')) {
            neg = ex.front() == '-';
            ex.remove_prefix(1);
        }
        if (!all_digits(ex) || ex.size() > 6)
            throw ParseError("invalid exponent in number '" + std::string(original) + "'");
        d.exponent = std::stol(std::string(ex)) * (neg ? -1 : 1);
    }
    auto dot = mant.find('.');
    d.int_digits = std::string(mant.substr(0, dot));
    if (dot != std::string_view::npos) d.frac_digits = std::string(mant.substr(dot + 1));
    if (d.int_digits.empty() && d.frac_digits.empty())
        throw ParseError("invalid number '" + std::string(original) + "'");
    if ((!d.int_digits.empty() && !all_digits(d.int_digits)) ||
        (!d.frac_digits.empty() && !all_digits(d.frac_digits)))
        throw ParseError("invalid number '" + std::string(original) + "'");
    return d;
}

} // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) throw ParseError("empty rational");
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        std::string_view num = trim(s.substr(0, slash));
        std::string_view den = trim(s.substr(slash + 1));
        bool neg = false;
        if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
            neg = num.front() == '-';
            num.remove_prefix(1);
        }
        if (!all_digits(num) || !all_digits(den))
            throw ParseError("invalid rational '" + std::string(s) + "'");
        Integer n(std::string(num), 10), q(std::string(den), 10);
        if (q == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
        Rational r(neg ? Integer(-n) : n, q);
        r.canonicalize();
        return r;
    }
    DecimalParts d = split_decimal(s, s);
    std::string digits = d.int_digits + d.frac_digits;
    Integer num(digits.empty() ? std::string("0") : digits, 10);
    long scale = static_cast<long>(d.frac_digits.size()) - d.exponent;
    Integer pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational r = scale >= 0 ? Rational(num, pow10) : Rational(num * pow10, 1);
    r.canonicalize();
    if (d.negative) r = -r;
    return r;
}

int decimal_places(std::string_view text) {
    std::string_view s = trim(text);
    if (s.find('/') != std::string_view::npos) return 0;
    DecimalParts d = split_decimal(s, s);
    long places = static_cast<long>(d.frac_digits.size()) - d.exponent;
    return places < 0 ? 0 : static_cast<int>(places);
}

Integer floor_rational(const Rational& r) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

std::string to_pq(const Rational& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_sci5(double x) {
    return fmt::format("{:.4e}", x);
}

std::string to_sci5(const Rational& r) {
    return to_sci5(r.get_d());
}

} // namespace phyloalg
