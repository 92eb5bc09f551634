#pragma once

// Sparse multivariate polynomials with exact rational coefficients in eight
// ambient variables x1..x8, plus the two operations that make them functions
// on the unit sphere S^7: reduction modulo |x|^2 - 1 and exact integration
// against the rotation-invariant probability measure.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qc7/errors.hpp"
#include "qc7/rational.hpp"

namespace qc7 {

inline constexpr int kAmbientVars = 8;

/// Exponent vector packed eight bits per variable; multiplication of
/// monomials is integer addition of codes.
class Monomial {
public:
    constexpr Monomial() = default;
    constexpr explicit Monomial(std::uint64_t code) : code_(code) {}

    static Monomial from_exponents(std::span<const int> exps) {
        if (exps.size() > kAmbientVars) throw dimension_error("monomial has more than 8 variables");
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < exps.size(); ++i) {
            if (exps[i] < 0 || exps[i] > 120) throw input_error("monomial exponent out of range");
            c |= static_cast<std::uint64_t>(exps[i]) << (8 * i);
        }
        return Monomial(c);
    }
    static Monomial variable(int i, int power = 1) {
        return Monomial(static_cast<std::uint64_t>(power) << (8 * i));
    }

    constexpr int exponent(int i) const { return static_cast<int>((code_ >> (8 * i)) & 0xFFu); }
    constexpr std::uint64_t code() const { return code_; }
    int degree() const {
        int d = 0;
        for (int i = 0; i < kAmbientVars; ++i) d += exponent(i);
        return d;
    }
    constexpr Monomial operator*(Monomial o) const { return Monomial(code_ + o.code_); }
    constexpr auto operator<=>(const Monomial&) const = default;

private:
    std::uint64_t code_ = 0;
};

using RationalPoint = std::array<Rational, kAmbientVars>;

/// Canonical sparse polynomial: terms sorted by monomial code, no zero
/// coefficients. Equality of representations is equality of polynomials.
class Poly {
public:
    using Term = std::pair<Monomial, Rational>;

    Poly() = default;
    Poly(const Rational& c) {  // NOLINT(google-explicit-constructor)
        if (c != 0) terms_.emplace_back(Monomial(), c);
    }
    Poly(long c) : Poly(Rational(c)) {}  // NOLINT(google-explicit-constructor)

    static Poly variable(int i) {
        Poly p;
        p.terms_.emplace_back(Monomial::variable(i), Rational(1));
        return p;
    }
    static Poly monomial(Monomial m, const Rational& c) {
        Poly p;
        if (c != 0) p.terms_.emplace_back(m, c);
        return p;
    }
    /// Builds from unsorted terms, merging duplicates.
    static Poly from_terms(std::vector<Term> terms) {
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
        Poly p;
        for (auto& t : terms) {
            if (!p.terms_.empty() && p.terms_.back().first == t.first) {
                p.terms_.back().second += t.second;
            } else {
                if (!p.terms_.empty() && p.terms_.back().second == 0) p.terms_.pop_back();
                p.terms_.push_back(std::move(t));
            }
        }
        if (!p.terms_.empty() && p.terms_.back().second == 0) p.terms_.pop_back();
        return p;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    int degree() const {
        int d = -1;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }
    int degree_in(int var) const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.exponent(var));
        return d;
    }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.code() == 0); }
    Rational constant_term() const {
        if (!terms_.empty() && terms_[0].first.code() == 0) return terms_[0].second;
        return 0;
    }

    Poly operator-() const {
        Poly r = *this;
        for (auto& t : r.terms_) t.second = -t.second;
        return r;
    }
    Poly& operator+=(const Poly& o) { return *this = merge(*this, o, false); }
    Poly& operator-=(const Poly& o) { return *this = merge(*this, o, true); }
    Poly& operator*=(const Rational& c) {
        if (c == 0) {
            terms_.clear();
        } else {
            for (auto& t : terms_) t.second *= c;
        }
        return *this;
    }
    Poly& operator*=(const Poly& o) { return *this = multiply(*this, o); }

    friend Poly operator+(const Poly& a, const Poly& b) { return merge(a, b, false); }
    friend Poly operator-(const Poly& a, const Poly& b) { return merge(a, b, true); }
    friend Poly operator*(const Poly& a, const Poly& b) { return multiply(a, b); }
    friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
    friend Poly operator*(const Rational& c, Poly a) { return a *= c; }
    friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }

    /// Adds c * a * b into *this without materializing the product separately.
    void add_product(const Poly& a, const Poly& b, const Rational& c = Rational(1)) {
        if (a.is_zero() || b.is_zero() || c == 0) return;
        *this += multiply(a, b) * c;
    }

    Poly derivative(int var) const {
        std::vector<Term> out;
        out.reserve(terms_.size());
        const std::uint64_t unit = std::uint64_t{1} << (8 * var);
        for (const auto& [m, c] : terms_) {
            int e = m.exponent(var);
            if (e == 0) continue;
            out.emplace_back(Monomial(m.code() - unit), c * e);
        }
        // Distinct monomials stay distinct and ordered after lowering one exponent.
        Poly p;
        p.terms_ = std::move(out);
        std::sort(p.terms_.begin(), p.terms_.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
        return p;
    }

    template <class Point>
    Rational evaluate(const Point& pt) const {
        if (terms_.empty()) return 0;
        const std::size_t nv = std::size(pt);
        std::array<std::vector<Rational>, kAmbientVars> powers;
        for (std::size_t i = 0; i < kAmbientVars; ++i) {
            int maxe = degree_in(static_cast<int>(i));
            if (maxe > 0 && i >= nv) throw dimension_error("evaluation point has too few coordinates");
            powers[i].resize(static_cast<std::size_t>(maxe) + 1);
            powers[i][0] = 1;
            for (int e = 1; e <= maxe; ++e) powers[i][e] = powers[i][e - 1] * pt[i];
        }
        Rational acc = 0, t;
        for (const auto& [m, c] : terms_) {
            t = c;
            for (int i = 0; i < kAmbientVars; ++i) {
                int e = m.exponent(i);
                if (e) t *= powers[i][e];
            }
            acc += t;
        }
        return acc;
    }

    std::string to_string() const;

private:
    static Poly merge(const Poly& a, const Poly& b, bool subtract) {
        Poly r;
        r.terms_.reserve(a.terms_.size() + b.terms_.size());
        auto i = a.terms_.begin(), j = b.terms_.begin();
        while (i != a.terms_.end() || j != b.terms_.end()) {
            if (j == b.terms_.end() || (i != a.terms_.end() && i->first < j->first)) {
                r.terms_.push_back(*i++);
            } else if (i == a.terms_.end() || j->first < i->first) {
                r.terms_.emplace_back(j->first, subtract ? Rational(-j->second) : j->second);
                ++j;
            } else {
                Rational c = subtract ? Rational(i->second - j->second) : Rational(i->second + j->second);
                if (c != 0) r.terms_.emplace_back(i->first, std::move(c));
                ++i;
                ++j;
            }
        }
        return r;
    }

    static Poly multiply(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.size() < b.size()) return multiply(b, a);
        if (b.size() == 1) {
            Poly r;
            r.terms_.reserve(a.size());
            const auto& [mb, cb] = b.terms_[0];
            for (const auto& [ma, ca] : a.terms_) r.terms_.emplace_back(ma * mb, ca * cb);
            return r;
        }
        std::unordered_map<std::uint64_t, std::size_t> index;
        index.reserve(a.size() * b.size());
        std::vector<Term> acc;
        acc.reserve(a.size() * b.size() / 2 + 1);
        Rational prod;
        for (const auto& [mb, cb] : b.terms_) {
            for (const auto& [ma, ca] : a.terms_) {
                mpq_mul(prod.get_mpq_t(), ca.get_mpq_t(), cb.get_mpq_t());
                auto [it, fresh] = index.try_emplace((ma * mb).code(), acc.size());
                if (fresh) {
                    acc.emplace_back(ma * mb, prod);
                } else {
                    mpq_add(acc[it->second].second.get_mpq_t(), acc[it->second].second.get_mpq_t(),
                            prod.get_mpq_t());
                }
            }
        }
        std::erase_if(acc, [](const Term& t) { return t.second == 0; });
        std::sort(acc.begin(), acc.end(), [](const Term& x, const Term& y) { return x.first < y.first; });
        Poly r;
        r.terms_ = std::move(acc);
        return r;
    }

    std::vector<Term> terms_;
};

inline std::string Poly::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    // Highest codes first so leading terms read naturally.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [m, c] = *it;
        Rational mag = abs(c);
        if (out.empty()) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        bool unit = (mag == 1);
        std::string mono;
        for (int i = 0; i < kAmbientVars; ++i) {
            int e = m.exponent(i);
            if (!e) continue;
            if (!mono.empty()) mono += "*";
            mono += "x" + std::to_string(i + 1);
            if (e > 1) mono += "^" + std::to_string(e);
        }
        if (mono.empty()) {
            out += mag.get_str();
        } else if (unit) {
            out += mono;
        } else {
            out += mag.get_str() + "*" + mono;
        }
    }
    return out;
}

namespace detail {

class PolyParser {
public:
    explicit PolyParser(std::string_view s) : s_(s) {}

    Poly parse() {
        Poly p = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw input_error("polynomial parse error at offset " + std::to_string(pos_) + ": " + why);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    long integer() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer");
        return std::stol(std::string(s_.substr(start, pos_ - start)));
    }
    Poly expr() {
        Poly acc;
        bool neg = false;
        if (eat('-')) {
            neg = true;
        } else {
            eat('+');
        }
        acc = term();
        if (neg) acc = -acc;
        for (;;) {
            if (eat('+')) {
                acc += term();
            } else if (eat('-')) {
                acc -= term();
            } else {
                break;
            }
        }
        return acc;
    }
    Poly term() {
        Poly acc = factor();
        for (;;) {
            if (eat('*')) {
                acc *= factor();
            } else if (eat('/')) {
                long d = integer();
                if (d == 0) fail("division by zero");
                acc *= Rational(1, d);
            } else {
                break;
            }
        }
        return acc;
    }
    Poly power(Poly base) {
        if (eat('^')) {
            long e = integer();
            Poly r(1);
            for (long i = 0; i < e; ++i) r *= base;
            return r;
        }
        return base;
    }
    Poly factor() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Poly inner = expr();
            if (!eat(')')) fail("missing ')'");
            return power(inner);
        }
        if (c == '-') {
            ++pos_;
            return -factor();
        }
        if (c == 'x' || c == 'X') {
            ++pos_;
            long v = integer();
            if (v < 1 || v > kAmbientVars) fail("variable index must be 1..8");
            return power(Poly::variable(static_cast<int>(v - 1)));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            long n = integer();
            return power(Poly(Rational(n)));
        }
        fail(std::string("unexpected '") + c + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses expressions such as "x1^2*x3 - 3/4*x2 + (x1 + x5)^2".
inline Poly parse_poly(std::string_view text) { return detail::PolyParser(text).parse(); }

/// Canonical representative modulo (x1^2 + ... + x8^2 - 1): every x8^2 is
/// eliminated via x8^2 = 1 - (x1^2 + ... + x7^2). The result has x8-degree
/// at most one and is unique for each function on S^7.
inline Poly reduce_mod_sphere(const Poly& p) {
    constexpr int last = kAmbientVars - 1;
    if (p.degree_in(last) < 2) return p;
    std::vector<Poly> powers{Poly(1)};  // (1 - x1^2 - ... - x7^2)^m
    Poly base(1);
    for (int i = 0; i < last; ++i) base -= Poly::monomial(Monomial::variable(i, 2), 1);

    std::vector<Poly::Term> kept;
    Poly acc;
    for (const auto& [m, c] : p.terms()) {
        int e = m.exponent(last);
        if (e < 2) {
            kept.emplace_back(m, c);
            continue;
        }
        int half = e / 2;
        while (static_cast<int>(powers.size()) <= half) powers.push_back(powers.back() * base);
        Monomial rest(m.code() - (static_cast<std::uint64_t>(2 * half) << (8 * last)));
        acc += powers[static_cast<std::size_t>(half)] * Poly::monomial(rest, c);
    }
    return Poly::from_terms(std::move(kept)) + acc;
}

/// Exact average of p over S^7: odd monomials vanish; x^(2a) contributes
/// prod (2a_i - 1)!! / prod_{m < |a|} (8 + 2m).
inline Rational sphere_moment(Monomial m) {
    int half_total = 0;
    mpz_class num = 1;
    for (int i = 0; i < kAmbientVars; ++i) {
        int e = m.exponent(i);
        if (e % 2) return 0;
        for (int k = e - 1; k > 0; k -= 2) num *= k;
        half_total += e / 2;
    }
    mpz_class den = 1;
    for (int k = 0; k < half_total; ++k) den *= 8 + 2 * k;
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational integrate_sphere(const Poly& p) {
    Rational acc = 0;
    for (const auto& [m, c] : p.terms()) {
        Rational mom = sphere_moment(m);
        if (mom != 0) acc += c * mom;
    }
    return acc;
}

/// Moment table for every even monomial up to the given total degree, as
/// (exponent vector, value) rows. Used for CSV audit output.
inline std::vector<std::pair<std::array<int, kAmbientVars>, Rational>> moment_table(int max_degree) {
    std::vector<std::pair<std::array<int, kAmbientVars>, Rational>> rows;
    std::array<int, kAmbientVars> e{};
    auto rec = [&](auto&& self, int var, int remaining) -> void {
        if (var == kAmbientVars) {
            rows.emplace_back(e, sphere_moment(Monomial::from_exponents(e)));
            return;
        }
        for (int k = 0; k <= remaining; k += 2) {
            e[var] = k;
            self(self, var + 1, remaining - k);
        }
        e[var] = 0;
    };
    rec(rec, 0, max_degree);
    return rows;
}

} // namespace qc7
