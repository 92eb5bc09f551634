#include <gtest/gtest.h>

#include <map>

#include "qc7/poly.hpp"
#include "qc7/sampling.hpp"

using namespace qc7;

namespace {

// Independent oracle: normalized moments on S^{m-1} by peeling one coordinate
// at a time. For x_1^{2k} times a function of the remaining coordinates,
// integration splits into a one-dimensional Beta factor
// B(k + 1/2, r + (m-1)/2) / B(1/2, (m-1)/2) and a moment on S^{m-2} where
// r is half the remaining total degree.
Rational beta_ratio(int k, int r, int m) {
    // B(1/2 + k, y + r) / B(1/2, y) with y = (m-1)/2, advanced one unit at a
    // time with B(x+1, y) = B(x, y) x/(x+y) and B(x, y+1) = B(x, y) y/(x+y).
    Rational x(1, 2), y(m - 1, 2);
    Rational acc = 1;
    for (int i = 0; i < k; ++i) {
        acc *= x / (x + y);
        x += 1;
    }
    for (int i = 0; i < r; ++i) {
        acc *= y / (x + y);
        y += 1;
    }
    return acc;
}

Rational oracle_moment(std::vector<int> half_exps, int m) {
    if (half_exps.empty()) return 1;
    int k = half_exps.front();
    std::vector<int> rest(half_exps.begin() + 1, half_exps.end());
    int r = 0;
    for (int v : rest) r += v;
    if (m == 1) return 1;
    return beta_ratio(k, r, m) * oracle_moment(rest, m - 1);
}

Poly x(int i) { return Poly::variable(i - 1); }

}  // namespace

TEST(Poly, ArithmeticAndParse) {
    Poly p = parse_poly("x1^2*x3 - 3/4*x2 + (x1+x5)^2");
    Poly q = x(1) * x(1) * x(3) - Rational(3, 4) * x(2) + (x(1) + x(5)) * (x(1) + x(5));
    EXPECT_EQ(p, q);
    EXPECT_EQ(p.degree(), 3);
    EXPECT_EQ(parse_poly("2*x1 - 2*x1"), Poly());
    EXPECT_EQ(parse_poly(p.to_string()), p);
    EXPECT_THROW(parse_poly("x9"), input_error);
    EXPECT_THROW(parse_poly("x1 +"), input_error);
}

TEST(Poly, DerivativeAndEvaluate) {
    Poly p = parse_poly("x1^3*x2 + 5*x8");
    EXPECT_EQ(p.derivative(0), parse_poly("3*x1^2*x2"));
    EXPECT_EQ(p.derivative(7), Poly(5));
    RationalPoint pt{};
    pt[0] = Rational(1, 2);
    pt[1] = 2;
    pt[7] = -1;
    EXPECT_EQ(p.evaluate(pt), Rational(1, 4) - 5);
}

TEST(Poly, SphereRelationReducesToOne) {
    Poly s;
    for (int i = 1; i <= 8; ++i) s += x(i) * x(i);
    EXPECT_EQ(reduce_mod_sphere(s), Poly(1));
}

TEST(Poly, ReductionEliminatesLastSquare) {
    Poly expected = x(1);
    for (int i = 1; i <= 7; ++i) expected -= x(1) * x(i) * x(i);
    EXPECT_EQ(reduce_mod_sphere(x(8) * x(8) * x(1)), expected);
}

TEST(Poly, ReductionIsIdempotentAndPreservesValues) {
    RationalRng rng(11);
    auto pts = sample_rational_points(3, 5);
    for (int trial = 0; trial < 50; ++trial) {
        Poly p = random_poly(rng, 8, 6, 6, true);
        Poly r = reduce_mod_sphere(p);
        EXPECT_EQ(reduce_mod_sphere(r), r);
        EXPECT_LE(r.degree_in(7), 1);
        for (const auto& pt : pts) EXPECT_EQ(p.evaluate(pt), r.evaluate(pt));
    }
}

TEST(Poly, MomentsMatchBetaOracle) {
    EXPECT_EQ(integrate_sphere(x(1) * x(1)), Rational(1, 8));
    EXPECT_EQ(integrate_sphere(parse_poly("x1^4")), Rational(3, 80));
    EXPECT_EQ(integrate_sphere(parse_poly("x1^2*x2^2")), Rational(1, 80));
    EXPECT_EQ(integrate_sphere(parse_poly("x1*x2^3")), Rational(0));
    EXPECT_EQ(integrate_sphere(Poly(1)), Rational(1));
    for (const auto& [exps, value] : moment_table(8)) {
        std::vector<int> half;
        bool even = true;
        for (int e : exps) {
            even = even && e % 2 == 0;
            half.push_back(e / 2);
        }
        if (!even) {
            EXPECT_EQ(value, 0);
            continue;
        }
        EXPECT_EQ(value, oracle_moment(half, 8)) << "exponents starting " << exps[0] << exps[1];
    }
}

TEST(Poly, IntegralInvariants) {
    RationalRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Poly p = random_poly(rng, 8, 5, 5, true);
        EXPECT_EQ(integrate_sphere(p), integrate_sphere(reduce_mod_sphere(p)));
        // Swapping two coordinates is an isometry of the sphere.
        std::vector<Poly::Term> swapped;
        for (const auto& [m, c] : p.terms()) {
            std::array<int, 8> e{};
            for (int i = 0; i < 8; ++i) e[i] = m.exponent(i);
            std::swap(e[1], e[6]);
            swapped.emplace_back(Monomial::from_exponents(e), c);
        }
        EXPECT_EQ(integrate_sphere(p), integrate_sphere(Poly::from_terms(swapped)));
        Poly r = reduce_mod_sphere(p);
        if (!r.is_zero()) EXPECT_GT(integrate_sphere(r * r), 0);
    }
}

TEST(Sampling, StereographicPoints) {
    std::array<Rational, 7> a{};
    a[0] = 1;
    RationalPoint p = stereographic_point(a);
    EXPECT_EQ(p[0], 1);
    for (int i = 1; i < 8; ++i) EXPECT_EQ(p[i], 0);
    a[0] = 0;
    p = stereographic_point(a);
    EXPECT_EQ(p[7], -1);
    for (const auto& q : sample_rational_points(42, 25)) {
        Rational s = 0;
        for (const auto& v : q) s += v * v;
        EXPECT_EQ(s, 1);
    }
    EXPECT_EQ(sample_rational_points(9, 4), sample_rational_points(9, 4));
    EXPECT_THROW(sample_rational_points(1, 0), input_error);
}
