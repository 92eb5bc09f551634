#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "qc7/errors.hpp"

namespace qc7 {

/// Arbitrary-precision rational; every identity in the library is checked in
/// this type so residuals vanish exactly or not at all.
using Rational = mpq_class;

/// Canonical "p/q" form. Integers are written with denominator 1 so the
/// serialized shape never depends on the value.
inline std::string to_pq(const Rational& r) {
    Rational c = r;
    c.canonicalize();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

/// Parses "p", "p/q" or a short decimal such as "-0.25".
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw input_error("empty rational literal");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        if (digits.empty() || digits == "-" || digits == "+") throw input_error("bad decimal literal: " + s);
        mpz_class num;
        if (num.set_str(digits[0] == '+' ? digits.substr(1) : digits, 10) != 0)
            throw input_error("bad decimal literal: " + s);
        mpz_class den = 1;
        for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
        Rational r(num, den);
        r.canonicalize();
        return r;
    }
    Rational r;
    if (r.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0) throw input_error("bad rational literal: " + s);
    if (r.get_den() == 0) throw input_error("zero denominator: " + s);
    r.canonicalize();
    return r;
}

inline int sign(const Rational& r) { return sgn(r); }

inline Rational rational_from(std::int64_t num, std::int64_t den = 1) {
    Rational r(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

} // namespace qc7
