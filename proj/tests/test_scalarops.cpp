#include <gtest/gtest.h>

#include "qc7/scalarops.hpp"

using namespace qc7;

namespace {

const QcModel& sphere() {
    static const QcModel m = build_sphere7();
    return m;
}

const QcModel& heisenberg() {
    static const QcModel m = build_heisenberg7();
    return m;
}

const ScalarCalculus& sphere_calc() {
    static const ScalarCalculus c(sphere());
    return c;
}

const ScalarCalculus& heisenberg_calc() {
    static const ScalarCalculus c(heisenberg());
    return c;
}

void expect_clean(const ResidualLedger& l) {
    EXPECT_FALSE(l.entries().empty());
    for (const auto& e : l.entries()) EXPECT_TRUE(e.pass()) << e.name << ": " << e.lhs << " vs " << e.rhs;
}

bool all_zero(const PolyVec& v) {
    return std::all_of(v.begin(), v.end(), [](const Poly& p) { return p.is_zero(); });
}

}  // namespace

TEST(SphereCalculus, CoordinateIsFirstEigenfunction) {
    for (int a = 0; a < 8; ++a) {
        Poly x = Poly::variable(a);
        EXPECT_EQ(sphere_calc().jet(x).sublap, x * Rational(4)) << "x" << a + 1;
    }
}

TEST(SphereCalculus, ReebDerivativeOfCoordinate) {
    ScalarFieldJet j = sphere_calc().jet(Poly::variable(0));
    EXPECT_EQ(j.xi_derivs[0], -Poly::variable(1));
    EXPECT_EQ(j.xi_derivs[1], -Poly::variable(2));
    EXPECT_EQ(j.xi_derivs[2], -Poly::variable(3));
}

TEST(SphereCalculus, ConstantsAndTheDefiningFunction) {
    // f = 1 and f = |x|^2 (which reduces to 1) have vanishing derivatives.
    Poly r2;
    for (int a = 0; a < 8; ++a) r2 += Poly::variable(a) * Poly::variable(a);
    for (const Poly& f : {Poly(1), r2}) {
        ScalarFieldJet j = sphere_calc().jet(f);
        EXPECT_TRUE(j.sublap.is_zero());
        EXPECT_TRUE(all_zero(j.grad_h));
        PFormData pd = sphere_calc().p_form(j);
        EXPECT_TRUE(all_zero(pd.P));
        EXPECT_TRUE(pd.Cf.is_zero());
    }
}

TEST(SphereCalculus, PFormOfFirstEigenfunctionVanishes) {
    PFormData pd = sphere_calc().p_form(sphere_calc().jet(Poly::variable(0)), PBranch::n1, true);
    EXPECT_TRUE(all_zero(pd.P));
    EXPECT_TRUE(pd.p_function.is_zero());
    EXPECT_EQ(*pd.p_integral, 0);
    EXPECT_EQ(*pd.f_cf_integral, 0);
    for (const auto& e : pd.B0.e) EXPECT_TRUE(e.is_zero());
}

TEST(SphereCalculus, PointAndPolynomialRoutesAgree) {
    const QcModel& m = sphere();
    Poly f = parse_poly("x1^2*x3 - 2*x2*x5 + x4*x6*x8");
    ScalarFieldJet pj = sphere_calc().jet(f);
    PFormData pd = sphere_calc().p_form(pj);
    for (const auto& p : sample_rational_points(3, 3)) {
        PointContext ctx(m, p);
        PointJet j = point_jet(ctx, f);
        EXPECT_EQ(j.sublap, pj.sublap.evaluate(p));
        Rational pval = 0;
        for (std::size_t a = 0; a < 4; ++a) pval += j.grad[a] * p_form_at(j, FrameAlgebra::unit(a));
        EXPECT_EQ(pval, pd.p_function.evaluate(p));
    }
}

TEST(SphereCalculus, WeakSublaplacianOracle) {
    // int |grad x1|^2 = int x1 Delta x1 = 4 int x1^2 = 1/2.
    const ScalarCalculus& c = sphere_calc();
    ScalarFieldJet j = c.jet(Poly::variable(0));
    EXPECT_EQ(c.integrate(ScalarCalculus::dot(j.df, j.grad_h)), Rational(1, 2));
    EXPECT_EQ(c.integrate(Poly::variable(0) * Poly::variable(0)), Rational(1, 8));
}

TEST(SphereCalculus, RicciIdentitySuiteIsExact) {
    auto fs = random_functions(sphere(), 11, 3, 4);
    expect_clean(ricci_identity_suite(sphere(), fs, sample_rational_points(12, 2)));
}

TEST(SphereCalculus, IntegralMachineryIsExact) {
    auto fs = random_functions(sphere(), 13, 3, 3);
    auto l = integral_machinery_suite(sphere_calc(), fs, 1);
    expect_clean(l);
    EXPECT_NE(l.find("paneitz_integration_by_parts"), nullptr);
    EXPECT_NE(l.find("divergence_theorem"), nullptr);
}

TEST(HeisenbergCalculus, FlatOracles) {
    const ScalarCalculus& c = heisenberg_calc();
    EXPECT_EQ(c.jet(parse_poly("x1^2")).sublap, Poly(-2));
    // Frame-parallel model with S = 0: P_f = 6 dx1 for f = x1^3, so P_f(grad f) = 18 x1^2.
    ScalarFieldJet j = c.jet(parse_poly("x1^3"));
    EXPECT_EQ(c.p_form(j).p_function, parse_poly("18*x1^2"));
    EXPECT_TRUE(c.p_form(c.jet(parse_poly("x1*x2 - x3^2"))).p_function.is_zero());
    EXPECT_FALSE(c.integrable());
    EXPECT_THROW(c.integrate(Poly(1)), input_error);
}

TEST(HeisenbergCalculus, RicciIdentitySuiteIsExact) {
    auto fs = random_functions(heisenberg(), 21, 3, 4);
    expect_clean(ricci_identity_suite(heisenberg(), fs, model_points(heisenberg(), 22, 2)));
}

TEST(PFormBranch, GeneralBranchRefusesDimensionOne) {
    EXPECT_THROW(p_form_u_coefficient(1), unsupported_dimension);
    EXPECT_EQ(p_form_u_coefficient(2), 0);
    EXPECT_EQ(p_form_u_coefficient(3), -12);
    ScalarFieldJet j = sphere_calc().jet(Poly::variable(0));
    EXPECT_THROW(sphere_calc().p_form(j, PBranch::general), unsupported_dimension);
}

TEST(PointRoute, ReebHessianRelationAndB0) {
    PointContext ctx(sphere(), sample_rational_points(30, 1)[0]);
    PointJet j = point_jet(ctx, parse_poly("x1*x2*x7 - x3^3 + x8"));
    EXPECT_TRUE(b0_times_four(j).is_zero());
    for (std::size_t a = 0; a < 4; ++a) {
        auto [lhs, rhs] = reeb_hessian_relation_check(j, FrameAlgebra::unit(a));
        EXPECT_EQ(lhs, rhs);
    }
}

TEST(PointRoute, NegativeControlTamperedJet) {
    // Corrupting one Hessian entry must break the horizontal Ricci identity.
    PointContext ctx(sphere(), sample_rational_points(31, 1)[0]);
    Poly f = parse_poly("x1*x2 + x3*x5");
    PointJet j = point_jet(ctx, f), jh = point_jet(ctx, Poly::variable(4)),
             jfh = point_jet(ctx, sphere().reduce(f * Poly::variable(4)));
    j.h2[0 * 7 + 1] += 1;
    ResidualLedger l("tamper");
    RationalRng rng(1);
    detail::ricci_identities_at(l, ctx, j, jh, jfh, rng);
    EXPECT_FALSE(l.must_pass_ok());
}
