#include <gtest/gtest.h>

#include "qc7/spectral.hpp"

using namespace qc7;

namespace {

const QcModel& sphere() {
    static const QcModel m = build_sphere7();
    return m;
}

const ScalarCalculus& calc() {
    static const ScalarCalculus c(sphere());
    return c;
}

const SpectralProblem& problem(int d) {
    static const SpectralProblem p1 = assemble(sphere(), 1);
    static const SpectralProblem p2 = assemble(sphere(), 2);
    return d == 1 ? p1 : p2;
}

bool is_scalar(const ExactMatrix& a, const Rational& c) {
    return a == c * ExactMatrix::identity(a.rows());
}

}  // namespace

TEST(Assembly, BasisSizes) {
    EXPECT_EQ(spectral_basis(1).size(), 8u);
    EXPECT_EQ(spectral_basis(2).size(), 43u);
    // degree 3 adds the 120 cubic monomials minus the 8 containing x8^2
    EXPECT_EQ(spectral_basis(3).size(), 43u + 112u);
}

TEST(Assembly, LinearBlockOracle) {
    // int x_a x_b = delta_ab / 8; |grad_H x_a|^2 integrates to 1/2; vertical energy 3/8.
    const SpectralProblem& p = problem(1);
    EXPECT_TRUE(is_scalar(p.gram, Rational(1, 8)));
    EXPECT_TRUE(is_scalar(p.stiffness_h, Rational(1, 2)));
    EXPECT_TRUE(is_scalar(p.stiffness_v, Rational(3, 8)));
    EXPECT_TRUE(is_scalar(p.stiffness_full, Rational(7, 8)));
}

TEST(Assembly, StiffnessSplitsIntoHorizontalAndVertical) {
    const SpectralProblem& p = problem(2);
    EXPECT_EQ(p.stiffness_h + p.stiffness_v, p.stiffness_full);
    EXPECT_TRUE(p.gram.is_symmetric());
}

TEST(Assembly, RejectsBadInput) {
    EXPECT_THROW(assemble(sphere(), 0), config_error);
    EXPECT_THROW(assemble(sphere(), 5), config_error);
    EXPECT_THROW(assemble(sphere(), 3, 2), config_error);
    EXPECT_THROW(assemble(build_heisenberg7(), 1), input_error);
}

TEST(Spectrum, DegreeOne) {
    auto h = solve_spectrum(calc(), problem(1), Operator::sub_laplacian, 1e-12);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(*h[0].exact, 4);
    EXPECT_EQ(h[0].multiplicity, 8u);
    EXPECT_TRUE(h[0].certified);
    auto g = solve_spectrum(calc(), problem(1), Operator::riemannian, 1e-12);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(*g[0].exact, 7);
    EXPECT_TRUE(g[0].certified);
}

TEST(Spectrum, DegreeTwoSphericalHarmonics) {
    // Riemannian Laplacian on degree-l harmonics of S^7: l(l + 6).
    auto g = solve_spectrum(calc(), problem(2), Operator::riemannian, 1e-12);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(*g[0].exact, 7);
    EXPECT_EQ(g[0].multiplicity, 8u);
    EXPECT_EQ(*g[1].exact, 16);
    EXPECT_EQ(g[1].multiplicity, 35u);
    auto h = solve_spectrum(calc(), problem(2), Operator::sub_laplacian, 1e-12);
    const EigenRow* first = first_positive(h);
    ASSERT_NE(first, nullptr);
    EXPECT_EQ(*first->exact, 4);
    EXPECT_EQ(first->multiplicity, 8u);
    std::size_t total = 0;
    for (const auto& r : h) {
        EXPECT_TRUE(r.certified);
        EXPECT_GE(*r.exact, 4);
        total += r.multiplicity;
        // The eigenvalues above 4 come from degree-2 harmonics, where the Riemannian eigenvalue is 16.
        for (const auto& f : r.eigenfunctions)
            if (*r.exact != 4) EXPECT_TRUE(is_eigenfunction(calc(), Operator::riemannian, f, 16));
    }
    EXPECT_EQ(total, 43u);  // 8 linear + 35 quadratic harmonics
}

TEST(Spectrum, TamperedStiffnessLosesCertification) {
    SpectralProblem p = problem(1);
    p.stiffness_h(0, 0) += Rational(1, 100);
    auto h = solve_spectrum(calc(), p, Operator::sub_laplacian, 1e-12);
    for (const auto& r : h)
        if (r.certified) EXPECT_FALSE(r.multiplicity == 8 && *r.exact == 4);
}

TEST(Spectrum, EigenfunctionCheck) {
    EXPECT_TRUE(is_eigenfunction(calc(), Operator::sub_laplacian, Poly::variable(2), 4));
    EXPECT_FALSE(is_eigenfunction(calc(), Operator::sub_laplacian, Poly::variable(2), 7));
    EXPECT_TRUE(is_eigenfunction(calc(), Operator::riemannian, Poly::variable(2), 7));
}

TEST(Lichnerowicz, SphereValue) {
    LichnerowiczResult r = lichnerowicz_k0(sphere(), sample_rational_points(5, 4));
    EXPECT_EQ(r.k0, 12);
    EXPECT_EQ(r.bound, 4);
    EXPECT_THROW(lichnerowicz_k0(sphere(), {}), input_error);
}

TEST(Lichnerowicz, SyntheticForms) {
    ExactMatrix zero(4, 4);
    EXPECT_EQ(lichnerowicz_form_min(1, zero), 6);
    EXPECT_EQ(lichnerowicz_form_min(Rational(1, 2), zero), 3);
    ExactMatrix t0(4, 4);
    t0(0, 0) = 1;
    t0(1, 1) = -1;
    EXPECT_EQ(lichnerowicz_form_min(2, t0), 2);
    // Frame metric c Id: eigenvalues relative to g are unchanged when T^0 scales with c.
    EXPECT_EQ(lichnerowicz_form_min(2, Rational(3) * t0, 3), 2);
}

TEST(IntegralChain, FirstEigenfunctionValues) {
    IntegralTerms t = integral_terms(calc(), Poly::variable(0));
    EXPECT_EQ(t.f2, Rational(1, 8));
    EXPECT_EQ(t.grad2, Rational(1, 2));
    EXPECT_EQ(t.lap2, 2);
    EXPECT_EQ(t.vert, Rational(3, 8));
    EXPECT_EQ(t.reeb_hessian, Rational(-3, 2));
    EXPECT_EQ(t.third_trace, -2);
    EXPECT_EQ(t.p_function, 0);
    EXPECT_EQ(t.t0, 0);
    EXPECT_EQ(t.u, 0);
    ResidualLedger l = integral_identity_suite(sphere(), t, Rational(4));
    EXPECT_TRUE(l.must_pass_ok());
    EXPECT_TRUE(l.find("reeb_hessian_twisted_slots")->pass());
    EXPECT_TRUE(l.find("reeb_hessian_pform_slots")->pass());
    EXPECT_FALSE(l.find("pform_norm_stated_constants")->pass());
    EXPECT_EQ(l.find("pform_norm_stated_constants")->rhs, -576);
}

TEST(IntegralChain, RandomFunctionsMustPassEntries) {
    for (const auto& f : random_functions(sphere(), 41, 2, 3)) {
        ResidualLedger l = integral_identity_suite(sphere(), integral_terms(calc(), f));
        for (const auto& e : l.entries())
            if (e.must_pass) EXPECT_TRUE(e.pass()) << e.name << ": " << e.lhs << " vs " << e.rhs;
    }
}

TEST(Extremal, FirstEigenfunction) {
    ExtremalResult r = extremal_check(calc(), Poly::variable(0), 4, 12);
    EXPECT_TRUE(r.pass());
    EXPECT_TRUE(r.partm1_sym_vanishes);
    EXPECT_EQ(r.p_function, 0);
    EXPECT_NE(r.k0_residual, 0);
    // (k0/3 - lambda/4) f = 3 x1
    EXPECT_EQ(r.k0_residual_scalar, Poly::variable(0) * Rational(3));
    EXPECT_EQ(r.entry.lhs, Rational(-1, 2));
    EXPECT_EQ(r.entry.rhs, -2);
    EXPECT_EQ(*r.entry.alternative, Rational(-1, 2));
    EXPECT_THROW(extremal_check(calc(), parse_poly("x1*x2"), 4, 12), input_error);
}

TEST(Riemannian, FirstEigenfunctionQuotient) {
    RiemannianComparison r = riemannian_comparison(calc(), Poly::variable(5), 4);
    EXPECT_EQ(r.quotient, 7);
    EXPECT_EQ(r.vertical_energy, 3);
    EXPECT_TRUE(r.matches());
}

TEST(Report, DegreeOneReport) {
    SpectralOptions opt;
    opt.degree = 1;
    opt.sample_points = 3;
    opt.random_functions = 1;
    opt.random_degree = 2;
    SpectralReport rep = spectral_report(sphere(), opt);
    EXPECT_TRUE(rep.residuals.must_pass_ok());
    EXPECT_EQ(*rep.lambda1, 4);
    EXPECT_EQ(rep.lambda1_multiplicity, 8u);
    EXPECT_EQ(*rep.mu1, 7);
    EXPECT_EQ(rep.lichnerowicz.k0, 12);
    EXPECT_TRUE(rep.paneitz_nonnegative);
    EXPECT_TRUE(rep.eigenvalues_above_bound);
    ASSERT_EQ(rep.numerology.size(), 8u);
    for (const auto& nu : rep.numerology) {
        EXPECT_EQ(nu.grad2, 4);
        EXPECT_EQ(nu.lap2_quarter, 4);
        EXPECT_EQ(nu.vertical, 3);
        EXPECT_EQ(nu.riemannian_quotient, 7);
    }
    ASSERT_EQ(rep.registry.entries().size(), 3u);
    for (const char* id : {"extremal_hessian_coefficient", "pform_norm_constants", "third_display_slot_order"})
        EXPECT_NE(rep.registry.find(id), nullptr) << id;
    EXPECT_NE(rep.registry.find("extremal_hessian_coefficient")->verdict.find("contradicted"), std::string::npos);
}
