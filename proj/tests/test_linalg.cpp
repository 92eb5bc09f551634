#include <gtest/gtest.h>

#include <cmath>

#include "qc7/linalg.hpp"
#include "qc7/sampling.hpp"

using namespace qc7;

namespace {

using UPoly = std::vector<Rational>;  // ascending coefficients

void trim(UPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

UPoly poly_rem(UPoly a, const UPoly& b) {
    trim(a);
    while (a.size() >= b.size() && !a.empty()) {
        Rational f = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
        trim(a);
    }
    return a;
}

UPoly derivative(const UPoly& p) {
    UPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
    return d;
}

// Independent characteristic polynomial: Faddeev-LeVerrier.
UPoly faddeev_leverrier(const ExactMatrix& a) {
    const std::size_t n = a.rows();
    UPoly c(n + 1);
    c[n] = 1;
    ExactMatrix m(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        ExactMatrix am = a * m;
        for (std::size_t i = 0; i < n; ++i) am(i, i) += c[n - k + 1];
        m = am;
        c[n - k] = -(a * m).trace() / static_cast<long>(k);
    }
    return c;
}

std::vector<UPoly> sturm_chain(const UPoly& p) {
    std::vector<UPoly> chain{p, derivative(p)};
    while (chain.back().size() > 1) {
        UPoly r = poly_rem(chain[chain.size() - 2], chain.back());
        if (r.empty()) break;
        for (auto& v : r) v = -v;
        chain.push_back(r);
    }
    return chain;
}

int sign_changes(const std::vector<UPoly>& chain, const Rational& x) {
    int changes = 0, last = 0;
    for (const auto& p : chain) {
        int s = sgn(evaluate_univariate(p, x));
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// Roots in (lo, hi] isolated by bisection on Sturm counts down to width eps.
void isolate(const std::vector<UPoly>& chain, Rational lo, Rational hi, const Rational& eps,
             std::vector<double>& out) {
    int count = sign_changes(chain, lo) - sign_changes(chain, hi);
    if (count == 0) return;
    if (hi - lo < eps) {
        for (int i = 0; i < count; ++i) out.push_back(Rational((lo + hi) / 2).get_d());
        return;
    }
    Rational mid = (lo + hi) / 2;
    isolate(chain, lo, mid, eps, out);
    isolate(chain, mid, hi, eps, out);
}

ExactMatrix random_symmetric(RationalRng& rng, std::size_t n) {
    ExactMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.small_rational(4);
    return m;
}

}  // namespace

TEST(Linalg, RankSolveNullspace) {
    ExactMatrix a(3, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 2; a(1, 1) = 4; a(1, 2) = 6;
    a(2, 0) = 1; a(2, 1) = 0; a(2, 2) = 1;
    EXPECT_EQ(rank(a), 2u);
    EXPECT_EQ(nullity(a), 1u);
    auto ns = null_space(a);
    ASSERT_EQ(ns.size(), 1u);
    for (std::size_t i = 0; i < 3; ++i) {
        Rational s = 0;
        for (std::size_t j = 0; j < 3; ++j) s += a(i, j) * ns[0][j];
        EXPECT_EQ(s, 0);
    }
    EXPECT_THROW(solve(a, ExactMatrix::identity(3)), input_error);
    ExactMatrix b = ExactMatrix::identity(3);
    b(0, 2) = Rational(1, 3);
    EXPECT_EQ(b * solve(b, ExactMatrix::identity(3)), ExactMatrix::identity(3));
}

TEST(Linalg, PositiveDefiniteAndInertia) {
    EXPECT_TRUE(ldlt_pivots_if_positive_definite(ExactMatrix::identity(4)));
    ExactMatrix m = ExactMatrix::diagonal({1, -2, 0, 3});
    EXPECT_FALSE(ldlt_pivots_if_positive_definite(m));
    Inertia in = inertia(m);
    EXPECT_EQ(in.positive, 2u);
    EXPECT_EQ(in.negative, 1u);
    EXPECT_EQ(in.zero, 1u);
    ExactMatrix h(2, 2);
    h(0, 1) = h(1, 0) = 5;
    in = inertia(h);
    EXPECT_EQ(in.positive, 1u);
    EXPECT_EQ(in.negative, 1u);
    // Inertia is invariant under congruence.
    RationalRng rng(3);
    for (int t = 0; t < 10; ++t) {
        ExactMatrix s = random_symmetric(rng, 5);
        ExactMatrix u = ExactMatrix::identity(5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j) u(i, j) = rng.integer(-2, 2);
        Inertia a = inertia(s), b = inertia(u.transpose() * s * u);
        EXPECT_EQ(a.positive, b.positive);
        EXPECT_EQ(a.negative, b.negative);
        EXPECT_EQ(a.zero, b.zero);
    }
}

TEST(Linalg, CharacteristicPolynomialMatchesFaddeevLeverrier) {
    RationalRng rng(8);
    for (int t = 0; t < 10; ++t) {
        ExactMatrix a(6, 6);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) a(i, j) = rng.small_rational(3);
        EXPECT_EQ(characteristic_polynomial(a), faddeev_leverrier(a));
    }
    EXPECT_EQ(root_multiplicity({4, -4, 1}, 2), 2u);  // (x - 2)^2
}

TEST(Linalg, EigenSpectrumOfSphereLinearBlock) {
    ExactMatrix a = ExactMatrix::diagonal(std::vector<Rational>(8, Rational(1, 2)));
    ExactMatrix g = ExactMatrix::diagonal(std::vector<Rational>(8, Rational(1, 8)));
    auto res = generalized_eigen(a, g, 1e-12);
    ASSERT_EQ(res.clusters.size(), 1u);
    EXPECT_TRUE(res.clusters[0].certified);
    EXPECT_EQ(*res.clusters[0].exact, 4);
    EXPECT_EQ(res.clusters[0].multiplicity, 8u);
    auto same = generalized_eigen(g, g, 1e-12);
    EXPECT_EQ(*same.clusters[0].exact, 1);
    EXPECT_THROW(generalized_eigen(a, ExactMatrix::diagonal({1, 1, 1, 1, 1, 1, 1, -1}), 1e-12), input_error);
}

TEST(Linalg, EigenAgreesWithSturmIsolation) {
    RationalRng rng(17);
    for (int t = 0; t < 5; ++t) {
        ExactMatrix a = random_symmetric(rng, 5);
        auto res = generalized_eigen(a, ExactMatrix::identity(5), 1e-10);
        auto chain = sturm_chain(faddeev_leverrier(a));
        std::vector<double> roots;
        isolate(chain, Rational(-100), Rational(100), Rational(1, 1 << 30), roots);
        ASSERT_EQ(roots.size(), res.values.size());
        for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(roots[i], res.values[i], 1e-8);
    }
}

TEST(Linalg, EigenInvariantUnderCongruence) {
    RationalRng rng(23);
    for (int t = 0; t < 5; ++t) {
        ExactMatrix a = random_symmetric(rng, 5);
        ExactMatrix g = ExactMatrix::identity(5);
        for (std::size_t i = 0; i < 5; ++i) g(i, i) = rng.integer(1, 4);
        ExactMatrix m = ExactMatrix::identity(5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < i; ++j) m(i, j) = rng.integer(-2, 2);
        auto r1 = generalized_eigen(a, g, 1e-9);
        auto r2 = generalized_eigen(m.transpose() * a * m, m.transpose() * g * m, 1e-9);
        ASSERT_EQ(r1.values.size(), r2.values.size());
        for (std::size_t i = 0; i < r1.values.size(); ++i) EXPECT_NEAR(r1.values[i], r2.values[i], 1e-8);
    }
}

TEST(Linalg, CountBelowUsesExactInertia) {
    ExactMatrix a = ExactMatrix::diagonal({1, 4, 4, 9});
    EXPECT_EQ(count_eigenvalues_below(a, ExactMatrix::identity(4), 4), 1u);
    EXPECT_EQ(count_eigenvalues_below(a, ExactMatrix::identity(4), Rational(41, 10)), 3u);
}

TEST(Linalg, RationalCandidates) {
    auto c = rational_candidates(0.3333333333333333);
    EXPECT_EQ(c.back(), Rational(1, 3));
    c = rational_candidates(7.0);
    EXPECT_EQ(c.back(), 7);
}
