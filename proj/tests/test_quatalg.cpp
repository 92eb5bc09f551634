#include <gtest/gtest.h>

#include "qc7/quatalg.hpp"
#include "qc7/sampling.hpp"

using namespace qc7;

namespace {

ExactMatrix random_form(RationalRng& rng, std::size_t d, bool symmetric) {
    ExactMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = symmetric ? i : 0; j < d; ++j) {
            m(i, j) = rng.small_rational(5);
            if (symmetric) m(j, i) = m(i, j);
        }
    return m;
}

// Independent Casimir: sum_s sum_{a,b} Psi(I_s e_a, I_s e_b) entrywise,
// without matrix products.
ExactMatrix casimir_entrywise(const QuatTriple& t, const ExactMatrix& psi) {
    const std::size_t d = t.size();
    ExactMatrix out(d, d);
    for (int s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                for (std::size_t k = 0; k < d; ++k)
                    for (std::size_t l = 0; l < d; ++l) out(a, b) += t.I[s](k, a) * psi(k, l) * t.I[s](l, b);
    return out;
}

}  // namespace

TEST(QuatTriple, StandardTriplePasses) {
    for (int n : {1, 2}) EXPECT_TRUE(all_pass(validate_triple(QuatTriple::standard(n))));
}

TEST(QuatTriple, SwappedTripleFailsProductRule) {
    QuatTriple t = QuatTriple::standard();
    std::swap(t.I[1], t.I[2]);
    bool found = false;
    for (const auto& e : validate_triple(t))
        if (e.name == "I1 I2 = I3") {
            found = true;
            EXPECT_FALSE(e.pass);
        }
    EXPECT_TRUE(found);
}

TEST(QuatTriple, NonOrthogonalIsFailedEntryNotError) {
    QuatTriple t = QuatTriple::standard();
    t.I[0] = Rational(2) * t.I[0];
    auto report = validate_triple(t);
    EXPECT_FALSE(all_pass(report));
    t.I[0] = ExactMatrix(3, 3);
    EXPECT_THROW(validate_triple(t), dimension_error);
}

TEST(Casimir, KnownValues) {
    QuatTriple t = QuatTriple::standard();
    EXPECT_EQ(casimir_apply(t, t.g), Rational(3) * t.g);
    for (int s = 0; s < 3; ++s) {
        ExactMatrix w = fundamental_form(t, s);
        EXPECT_EQ(casimir_apply(t, w), Rational(-1) * w);
    }
    EXPECT_THROW(casimir_apply(t, ExactMatrix(3, 3)), dimension_error);
}

TEST(Casimir, MinimalPolynomialBruteForce) {
    QuatTriple t = QuatTriple::standard();
    ExactMatrix u = operator_matrix(4, [&](const ExactMatrix& m) { return casimir_entrywise(t, m); });
    ExactMatrix id = ExactMatrix::identity(16);
    EXPECT_EQ(u * u, Rational(2) * u + Rational(3) * id);
    RationalRng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        ExactMatrix psi = random_form(rng, 4, trial % 2 == 0);
        ExactMatrix up = casimir_apply(t, psi);
        EXPECT_EQ(up, casimir_entrywise(t, psi));
        EXPECT_EQ(casimir_apply(t, up), Rational(2) * up + Rational(3) * psi);
    }
}

TEST(Decompose, ExamplesAndDims) {
    QuatTriple t = QuatTriple::standard();
    auto dg = decompose(t, t.g);
    EXPECT_EQ(dg.part3, t.g);
    EXPECT_TRUE(dg.partm1.is_zero());
    ExactMatrix w2 = fundamental_form(t, 1);
    auto dw = decompose(t, w2);
    EXPECT_TRUE(dw.part3.is_zero());
    EXPECT_EQ(dw.partm1, w2);
    EXPECT_EQ(dw.antisym_m1, w2);
    auto dims = component_dims(t);
    EXPECT_EQ(dims.first, 4u);
    EXPECT_EQ(dims.second, 12u);
    EXPECT_THROW(component_dims(QuatTriple::standard(2)), unsupported_dimension);
    for (int s = 0; s < 3; ++s) EXPECT_EQ(decompose(t, fundamental_form(t, s)).partm1, fundamental_form(t, s));
}

TEST(Decompose, ProjectorsAreIdempotentAndComplementary) {
    QuatTriple t = QuatTriple::standard();
    ExactMatrix p3 = operator_matrix(4, [&](const ExactMatrix& m) { return decompose(t, m).part3; });
    ExactMatrix pm1 = operator_matrix(4, [&](const ExactMatrix& m) { return decompose(t, m).partm1; });
    EXPECT_EQ(p3 * p3, p3);
    EXPECT_EQ(pm1 * pm1, pm1);
    EXPECT_TRUE((p3 * pm1).is_zero());
    EXPECT_EQ(p3 + pm1, ExactMatrix::identity(16));
    for (std::size_t k = 0; k < 4; ++k) {
        ExactMatrix pk = operator_matrix(4, [&](const ExactMatrix& m) { return decompose(t, m).parts_pm[k]; });
        EXPECT_EQ(pk * pk, pk);
        EXPECT_EQ(rank(pk), 4u);
    }
}

TEST(Decompose, PropertySuite) {
    QuatTriple t = QuatTriple::standard();
    RationalRng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        bool sym = trial % 3 != 0;
        ExactMatrix psi = random_form(rng, 4, sym);
        auto d = decompose(t, psi);
        EXPECT_EQ(d.part3 + d.partm1, psi);
        EXPECT_EQ(casimir_apply(t, d.part3), Rational(3) * d.part3);
        EXPECT_EQ(casimir_apply(t, d.partm1), Rational(-1) * d.partm1);
        EXPECT_EQ(frobenius(d.part3, d.partm1), 0);
        ExactMatrix sum(4, 4);
        for (std::size_t a = 0; a < 4; ++a) {
            sum = sum + d.parts_pm[a];
            for (std::size_t b = a + 1; b < 4; ++b) EXPECT_EQ(frobenius(d.parts_pm[a], d.parts_pm[b]), 0);
        }
        EXPECT_EQ(sum, psi);
        EXPECT_EQ(d.parts_pm[0], d.part3);
        if (sym) EXPECT_EQ(symmetric_part(d.part3), Rational(psi.trace() / 4) * t.g);
        EXPECT_TRUE(norm_inequalities(t, psi).hold());
    }
}

TEST(NormInequalities, EqualityCases) {
    QuatTriple t = QuatTriple::standard();
    auto w = norm_inequalities(t, fundamental_form(t, 0));
    EXPECT_EQ(w.minus1_lhs, 4);
    EXPECT_EQ(w.minus1_rhs, 4);
    auto g = norm_inequalities(t, t.g);
    EXPECT_EQ(g.three_lhs, 4);
    EXPECT_EQ(g.three_rhs, 4);
}

TEST(BilinearFormTag, TracksSymmetry) {
    QuatTriple t = QuatTriple::standard();
    EXPECT_EQ(BilinearForm(t.g).tag, SymmetryTag::symmetric);
    EXPECT_EQ(BilinearForm(fundamental_form(t, 2)).tag, SymmetryTag::antisymmetric);
    ExactMatrix m(4, 4);
    m(0, 1) = 1;
    EXPECT_EQ(BilinearForm(m).tag, SymmetryTag::general);
}
