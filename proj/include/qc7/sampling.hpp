#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qc7/poly.hpp"

namespace qc7 {

/// Deterministic source of small-height rationals. Only the engine's raw
/// output is used (never std distributions) so sequences are identical
/// across standard library implementations.
class RationalRng {
public:
    explicit RationalRng(std::uint64_t seed) : eng_(seed) {}

    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<std::int64_t>(eng_() % span);
    }
    Rational small_rational(int height = 3) {
        std::int64_t num = integer(-height, height);
        std::int64_t den = integer(1, height);
        return rational_from(num, den);
    }
    Rational nonzero_rational(int height = 3) {
        for (;;) {
            Rational r = small_rational(height);
            if (r != 0) return r;
        }
    }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

/// Inverse stereographic image of a in Q^7: (2a, |a|^2 - 1) / (|a|^2 + 1).
/// Lies on S^7 exactly.
inline RationalPoint stereographic_point(const std::array<Rational, 7>& a) {
    Rational norm2 = 0;
    for (const auto& v : a) norm2 += v * v;
    Rational den = norm2 + 1;
    RationalPoint p;
    for (int i = 0; i < 7; ++i) p[i] = 2 * a[i] / den;
    p[7] = (norm2 - 1) / den;
    return p;
}

inline std::vector<RationalPoint> sample_rational_points(std::uint64_t seed, int count) {
    if (count < 1) throw input_error("sample count must be at least 1");
    RationalRng rng(seed ^ 0x5f3759dfULL);
    std::vector<RationalPoint> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        std::array<Rational, 7> a;
        for (auto& v : a) v = rng.small_rational(3);
        pts.push_back(stereographic_point(a));
    }
    return pts;
}

/// Random polynomial in the first nvars variables with total degree at most
/// max_degree and the requested number of terms (integer coefficients in
/// [-3, 3] unless rational_coeffs is set).
inline Poly random_poly(RationalRng& rng, int nvars, int max_degree, int nterms, bool rational_coeffs = false) {
    std::vector<Poly::Term> terms;
    for (int t = 0; t < nterms; ++t) {
        std::array<int, kAmbientVars> e{};
        int deg = static_cast<int>(rng.integer(1, max_degree));
        for (int k = 0; k < deg; ++k) e[static_cast<std::size_t>(rng.integer(0, nvars - 1))]++;
        Rational c = rational_coeffs ? rng.nonzero_rational(3) : Rational(rng.integer(1, 3) * (rng.integer(0, 1) ? 1 : -1));
        terms.emplace_back(Monomial::from_exponents(e), c);
    }
    return Poly::from_terms(std::move(terms));
}

} // namespace qc7
