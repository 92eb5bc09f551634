#include <gtest/gtest.h>

#include "qc7/models.hpp"

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

void expect_clean(const ResidualLedger& l) {
    for (const auto& e : l.entries()) EXPECT_TRUE(e.pass()) << e.name << ": " << e.lhs << " vs " << e.rhs;
    EXPECT_FALSE(l.entries().empty());
}

RationalPoint point(std::initializer_list<Rational> xs) {
    RationalPoint p{};
    std::size_t i = 0;
    for (const auto& x : xs) p[i++] = x;
    return p;
}

}  // namespace

TEST(Sphere7, ConventionSearchPicksLeftMultiplication) {
    const QcModel& m = sphere();
    EXPECT_TRUE(m.validated);
    EXPECT_EQ(m.convention.xi_sign, 1);
    EXPECT_EQ(m.convention.i_sign, 1);
    ASSERT_EQ(m.convention.candidates.size(), 4u);
    EXPECT_TRUE(m.convention.candidates[0].passed);
    for (std::size_t c = 1; c < 4; ++c) {
        EXPECT_FALSE(m.convention.candidates[c].passed);
        EXPECT_FALSE(m.convention.candidates[c].failed.empty());
    }
}

TEST(Sphere7, ReebFieldExamples) {
    const QcModel& m = sphere();
    RationalPoint p0 = point({1});
    std::vector<Rational> xi1;
    for (const auto& c : m.xi[0]) xi1.push_back(c.evaluate(p0));
    std::vector<Rational> e2(8);
    e2[1] = 1;
    EXPECT_EQ(xi1, e2);
    // d x1 (xi_1) = -x2
    EXPECT_EQ(m.xi[0][0], -Poly::variable(1));
}

TEST(Sphere7, InducedTripleAtPointIsQuaternionic) {
    PointGeometry geo(sphere(), point({Rational(3, 5), Rational(4, 5)}));
    FrameAlgebra alg = FrameAlgebra::from(geo);
    EXPECT_TRUE(all_pass(validate_triple(alg.horizontal_triple())));
}

TEST(Sphere7, StructureAndConnectionSuites) {
    const QcModel& m = sphere();
    expect_clean(structure_suite(m, sample_rational_points(21, 10)));
    expect_clean(connection_suite(m, sample_rational_points(22, 3)));
}

TEST(Sphere7, CurvatureConstants) {
    const QcModel& m = sphere();
    EXPECT_EQ(m.S, 2);
    for (const auto& p : sample_rational_points(5, 3)) {
        CurvatureData cd = curvature_at(m, p);
        const Rational& c = cd.alg.c;
        EXPECT_EQ(cd.S, 2);
        EXPECT_EQ(cd.full_trace, 48);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(cd.ric(a, b), a == b ? Rational(12 * c) : Rational(0));
        for (std::size_t A = 0; A < 7; ++A)
            for (std::size_t B = 0; B < 7; ++B)
                EXPECT_EQ(cd.ric_riemannian(A, B), A == B ? Rational(6 * cd.alg.norm2(A)) : Rational(0));
        for (int s = 0; s < 3; ++s)
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) {
                    RVec X = FrameAlgebra::unit(a), Y = FrameAlgebra::unit(b);
                    EXPECT_EQ(CurvatureData::form(cd.zeta[static_cast<std::size_t>(s)], X, cd.alg.apply(s, Y)),
                              cd.alg.g(X, Y));
                }
    }
    expect_clean(curvature_suite(m, sample_rational_points(6, 2)));
}

TEST(Sphere7, LeviCivitaCurvatureIsRoundOracle) {
    // Independent oracle: the unit sphere has R(A,B,C,D) = g(B,C) g(A,D) - g(A,C) g(B,D).
    PointGeometry lc(sphere(), sample_rational_points(9, 1)[0], ConnectionKind::levi_civita);
    auto R = frame_curvature(lc);
    auto g = [&](std::size_t A, std::size_t B) { return A == B ? lc.frame_norm2(A) : Rational(0); };
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B)
            for (std::size_t C = 0; C < 7; ++C)
                for (std::size_t D = 0; D < 7; ++D)
                    EXPECT_EQ(R[((A * 7 + B) * 7 + C) * 7 + D], g(B, C) * g(A, D) - g(A, C) * g(B, D));
}

TEST(Sphere7, TorsionPiecesVanish) {
    TorsionData td = torsion_at(sphere(), sample_rational_points(4, 1)[0]);
    for (int s = 0; s < 3; ++s) EXPECT_TRUE(td.t_xi[static_cast<std::size_t>(s)].is_zero());
    EXPECT_TRUE(td.t0.is_zero());
    EXPECT_TRUE(td.u.is_zero());
    // T(xi_1, xi_2) = -S xi_3
    EXPECT_EQ(td.vertical[0][1][6], -2);
}

TEST(Sphere7, VolumeDensityIsConstantTwo) {
    auto pts = sample_rational_points(12, 10);
    EXPECT_EQ(volume_density(sphere(), pts), 2);
    EXPECT_EQ(volume_density_at(sphere(), pts[3], 0), volume_density_at(sphere(), pts[3], 1));
    EXPECT_THROW(volume_density(sphere(), {pts[0]}), input_error);
    EXPECT_THROW(volume_density(heisenberg(), pts), input_error);
}

TEST(Sphere7, ForcedConventionIsReportedNotThrown) {
    BuildOptions opt;
    opt.forced_candidate = 1;
    opt.validation_points = 2;
    QcModel bad = build_sphere7(opt);
    EXPECT_FALSE(bad.validated);
    EXPECT_FALSE(bad.failures.empty());
    EXPECT_TRUE(bad.convention.forced);
}

TEST(Sphere7, TamperedScalarIsDetected) {
    QcModel m = sphere();
    m.S = 1;
    auto l = connection_suite(m, sample_rational_points(2, 1));
    EXPECT_FALSE(l.must_pass_ok());
    EXPECT_FALSE(l.find("vertical_torsion")->pass());
}

TEST(Heisenberg7, GlobalIdentities) {
    const QcModel& m = heisenberg();
    EXPECT_TRUE(m.validated);
    EXPECT_EQ(m.S, 0);
    auto s = structure_suite(m, model_points(m, 3, 2));
    expect_clean(s);
    ASSERT_NE(s.find("contact_compatibility_global"), nullptr);
    auto c = connection_suite(m, model_points(m, 4, 2));
    expect_clean(c);
    ASSERT_NE(c.find("frame_parallel_global"), nullptr);
    ASSERT_NE(c.find("heisenberg_structure_constants"), nullptr);
    // Connection coefficients in the global frame vanish identically, so
    // every coordinate Gamma is determined by the frame alone.
    EXPECT_EQ(c.find("frame_parallel_global")->samples, 7u * 7u * 7u);
}

TEST(Heisenberg7, FlatCurvature) {
    const QcModel& m = heisenberg();
    for (const auto& p : model_points(m, 8, 2)) {
        CurvatureData cd = curvature_at(m, p);
        for (const auto& v : cd.R) EXPECT_EQ(v, 0);
        EXPECT_EQ(cd.S, 0);
    }
    expect_clean(curvature_suite(m, model_points(m, 9, 2)));
    EXPECT_THROW(riemannian_check(m, model_points(m, 1, 1)[0]), input_error);
}

TEST(Models, DeterministicPoints) {
    EXPECT_EQ(model_points(heisenberg(), 5, 3), model_points(heisenberg(), 5, 3));
    EXPECT_THROW(model_points(heisenberg(), 5, 0), input_error);
    EXPECT_EQ(parse_model_kind("sphere7"), ModelKind::sphere7);
    EXPECT_THROW(parse_model_kind("torus"), config_error);
}
