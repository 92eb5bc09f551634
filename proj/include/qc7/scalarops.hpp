#pragma once

// Covariant calculus on polynomial functions over a QcModel: Hessians and
// third derivatives (first slot differentiates), the sub-Laplacian
// Delta f = -nabla^2 f(e_a, e_a), the P-form and the C-operator.
//
// Two evaluation routes share one coordinate formula. Point jets evaluate
// every derivative at a rational point and contract into the rational frame;
// they drive the pointwise identity suites. Polynomial jets keep traced
// contractions as polynomials in ambient coordinates so integrals over S^7
// are exact moment sums.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qc7/ledger.hpp"
#include "qc7/models.hpp"
#include "qc7/parallel.hpp"
#include "qc7/quatalg.hpp"
#include "qc7/sampling.hpp"

namespace qc7 {

// ---------------------------------------------------------------------------
// Point route
// ---------------------------------------------------------------------------

/// Function-independent data at one point.
struct PointContext {
    PointGeometry geo;
    CurvatureData curv;
    TorsionData tors;
    QuatTriple trip;
    /// Ambient vectors (nabla_{F_a} T)(xi_i, F_b), index [a][i][b].
    std::array<std::array<std::array<RVec, 4>, 3>, 4> dT;

    PointContext(const QcModel& m, const RationalPoint& p)
        : geo(m, p), curv(curvature_at(m, p)), tors(torsion_at(m, p)), trip(curv.alg.horizontal_triple()) {
        const std::size_t N = geo.dim();
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t b = 0; b < 4; ++b) {
                    const RVec& U = geo.frame_vector(a);
                    const RVec& V = geo.frame_vector(4 + i);
                    const RVec& W = geo.frame_vector(b);
                    RVec out = geo.dgamma(U, V, W);
                    RVec swap = geo.dgamma(U, W, V);
                    RVec t1 = geo.gamma(U, geo.torsion(V, W));
                    RVec t2 = geo.torsion(geo.gamma(U, V), W);
                    RVec t3 = geo.torsion(V, geo.gamma(U, W));
                    for (std::size_t k = 0; k < N; ++k) out[k] += t1[k] - swap[k] - t2[k] - t3[k];
                    dT[a][i][b] = std::move(out);
                }
    }

    const QcModel& model() const { return geo.model(); }
    const FrameAlgebra& alg() const { return curv.alg; }
    const Rational& c() const { return curv.alg.c; }

    /// g(T(u, v), w) on frame coefficients.
    Rational torsion_form(const RVec& u, const RVec& v, const RVec& w) const {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A) {
            if (u[A] == 0) continue;
            for (std::size_t B = 0; B < 7; ++B) {
                if (v[B] == 0) continue;
                Rational uv = u[A] * v[B];
                for (std::size_t C = 0; C < 7; ++C)
                    if (w[C] != 0) acc += uv * w[C] * tors.t(A, B, C);
            }
        }
        return acc;
    }
    /// Frame coefficients of T(u, v).
    RVec torsion_vec(const RVec& u, const RVec& v) const {
        RVec out(7);
        for (std::size_t C = 0; C < 7; ++C) out[C] = torsion_form(u, v, FrameAlgebra::unit(C)) / alg().norm2(C);
        return out;
    }
    /// T^0(X, Y) for horizontal coefficient vectors.
    Rational t0(const RVec& X, const RVec& Y) const {
        Rational acc = 0;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) acc += X[a] * Y[b] * tors.t0(a, b);
        return acc * c();
    }
};

/// Derivatives of f at one point, contracted into the frame.
struct PointJet {
    const PointContext* ctx = nullptr;
    Rational value;
    RVec ambient_df;            // D f in ambient coordinates
    RVec d1;                    // df(F_A)
    std::vector<Rational> h2;   // nabla^2 f(F_A, F_B)
    std::vector<Rational> h3;   // nabla^3 f(F_A, F_B, F_C)
    RVec grad;                  // frame coefficients of the horizontal gradient
    Rational sublap;

    Rational df(const RVec& u) const {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A) acc += u[A] * d1[A];
        return acc;
    }
    Rational df_ambient(const RVec& v) const {
        Rational acc = 0;
        for (std::size_t k = 0; k < v.size(); ++k) acc += v[k] * ambient_df[k];
        return acc;
    }
    const Rational& xi(int s) const { return d1[4 + static_cast<std::size_t>(s)]; }
    Rational hess(const RVec& u, const RVec& v) const {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A) {
            if (u[A] == 0) continue;
            for (std::size_t B = 0; B < 7; ++B)
                if (v[B] != 0) acc += u[A] * v[B] * h2[A * 7 + B];
        }
        return acc;
    }
    Rational third(const RVec& u, const RVec& v, const RVec& w) const {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A) {
            if (u[A] == 0) continue;
            for (std::size_t B = 0; B < 7; ++B) {
                if (v[B] == 0) continue;
                Rational uv = u[A] * v[B];
                for (std::size_t C = 0; C < 7; ++C)
                    if (w[C] != 0) acc += uv * w[C] * h3[(A * 7 + B) * 7 + C];
            }
        }
        return acc;
    }
    /// nabla^2 f on H in the orthonormal basis F_a / sqrt(c).
    ExactMatrix horizontal_hessian() const {
        ExactMatrix h(4, 4);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) h(a, b) = h2[a * 7 + b] / ctx->c();
        return h;
    }
    /// sum_b nabla^3 f(u, e_b, e_b).
    Rational third_trace(const RVec& u) const {
        Rational acc = 0;
        for (std::size_t b = 0; b < 4; ++b) acc += third(u, FrameAlgebra::unit(b), FrameAlgebra::unit(b));
        return acc / ctx->c();
    }
};

/// Evaluates the jet of f at the context point. Coordinate formulas:
/// H_ij = d_i d_j f - df_k Gamma^k_ij and
/// nabla^3_lij = d_l H_ij - Gamma^k_li H_kj - Gamma^k_lj H_ik.
inline PointJet point_jet(const PointContext& ctx, const Poly& f) {
    const PointGeometry& geo = ctx.geo;
    const std::size_t N = geo.dim();
    const auto& F = geo.frame();
    PointJet j;
    j.ctx = &ctx;
    j.value = geo.eval(f);

    std::vector<Poly> p1(N), p2(N * N);
    RVec d1(N), d2(N * N), d3(N * N * N);
    for (std::size_t i = 0; i < N; ++i) {
        p1[i] = f.derivative(static_cast<int>(i));
        d1[i] = geo.eval(p1[i]);
    }
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = i; k < N; ++k) {
            p2[i * N + k] = p1[i].derivative(static_cast<int>(k));
            d2[i * N + k] = d2[k * N + i] = geo.eval(p2[i * N + k]);
        }
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = i; k < N; ++k)
            for (std::size_t l = k; l < N; ++l) {
                Rational v = geo.eval(p2[i * N + k].derivative(static_cast<int>(l)));
                const std::size_t perm[6][3] = {{i, k, l}, {i, l, k}, {k, i, l}, {k, l, i}, {l, i, k}, {l, k, i}};
                for (const auto& q : perm) d3[(q[0] * N + q[1]) * N + q[2]] = v;
            }

    RVec H(N * N), dH(N * N * N), n3(N * N * N);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) {
            Rational acc = d2[a * N + b];
            for (std::size_t k = 0; k < N; ++k) acc -= d1[k] * geo.gamma_value(k, a, b);
            H[a * N + b] = acc;
        }
    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                Rational acc = d3[(l * N + a) * N + b];
                for (std::size_t k = 0; k < N; ++k)
                    acc -= d2[l * N + k] * geo.gamma_value(k, a, b) + d1[k] * geo.dgamma_value(l, k, a, b);
                dH[(l * N + a) * N + b] = acc;
            }
    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                Rational acc = dH[(l * N + a) * N + b];
                for (std::size_t k = 0; k < N; ++k)
                    acc -= geo.gamma_value(k, l, a) * H[k * N + b] + geo.gamma_value(k, l, b) * H[a * N + k];
                n3[(l * N + a) * N + b] = acc;
            }

    j.ambient_df = d1;
    j.d1.assign(7, Rational(0));
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t k = 0; k < N; ++k) j.d1[A] += F[A][k] * d1[k];
    // Contract one slot at a time: last slot, middle slot, first slot.
    j.h2.assign(49, Rational(0));
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B) {
            Rational acc = 0;
            for (std::size_t a = 0; a < N; ++a) {
                if (F[A][a] == 0) continue;
                for (std::size_t b = 0; b < N; ++b)
                    if (F[B][b] != 0) acc += F[A][a] * F[B][b] * H[a * N + b];
            }
            j.h2[A * 7 + B] = acc;
        }
    RVec t1(N * N * 7), t2(N * 7 * 7);
    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t C = 0; C < 7; ++C) {
                Rational acc = 0;
                for (std::size_t b = 0; b < N; ++b)
                    if (F[C][b] != 0) acc += n3[(l * N + a) * N + b] * F[C][b];
                t1[(l * N + a) * 7 + C] = acc;
            }
    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t B = 0; B < 7; ++B)
            for (std::size_t C = 0; C < 7; ++C) {
                Rational acc = 0;
                for (std::size_t a = 0; a < N; ++a)
                    if (F[B][a] != 0) acc += t1[(l * N + a) * 7 + C] * F[B][a];
                t2[(l * 7 + B) * 7 + C] = acc;
            }
    j.h3.assign(343, Rational(0));
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B)
            for (std::size_t C = 0; C < 7; ++C) {
                Rational acc = 0;
                for (std::size_t l = 0; l < N; ++l)
                    if (F[A][l] != 0) acc += t2[(l * 7 + B) * 7 + C] * F[A][l];
                j.h3[(A * 7 + B) * 7 + C] = acc;
            }

    const Rational& c = ctx.c();
    j.grad.assign(7, Rational(0));
    for (std::size_t a = 0; a < 4; ++a) j.grad[a] = j.d1[a] / c;
    j.sublap = 0;
    for (std::size_t a = 0; a < 4; ++a) j.sublap -= j.h2[a * 7 + a];
    j.sublap /= c;
    return j;
}

/// P_f(X) at a point for n = 1:
/// nabla^3 f(X, e_b, e_b) + sum_t nabla^3 f(I_t X, e_b, I_t e_b) - 4 S df(X) + 4 T^0(X, grad f).
inline Rational p_form_at(const PointJet& j, const RVec& X) {
    const PointContext& ctx = *j.ctx;
    const FrameAlgebra& alg = ctx.alg();
    Rational acc = j.third_trace(X);
    for (int t = 0; t < 3; ++t) {
        RVec IX = alg.apply(t, X);
        Rational tw = 0;
        for (std::size_t b = 0; b < 4; ++b) tw += j.third(IX, FrameAlgebra::unit(b), alg.apply(t, FrameAlgebra::unit(b)));
        acc += tw / ctx.c();
    }
    return acc - 4 * ctx.curv.S * j.df(X) + 4 * ctx.t0(X, j.grad);
}

/// 4 B_0 = nabla^2 f + sum_s nabla^2 f(I_s ., I_s .) + (1/n) Delta f g on H,
/// orthonormal basis. Zero for every f when n = 1.
inline ExactMatrix b0_times_four(const PointJet& j) {
    ExactMatrix h = j.horizontal_hessian();
    return h + casimir_apply(j.ctx->trip, h) + Rational(j.sublap) * ExactMatrix::identity(4);
}

/// Both sides of
/// sum_s nabla^2 f(xi_s, I_s X) = (1/4n) sum_s nabla^3 f(I_s X, I_s e_a, e_a) - sum_s T(xi_s, I_s X, grad f).
inline std::pair<Rational, Rational> reeb_hessian_relation_check(const PointJet& j, const RVec& X) {
    const PointContext& ctx = *j.ctx;
    const FrameAlgebra& alg = ctx.alg();
    const int n = ctx.model().n;
    Rational lhs = 0, third = 0, tors = 0;
    for (int s = 0; s < 3; ++s) {
        RVec IX = alg.apply(s, X);
        RVec xi = FrameAlgebra::unit(4 + static_cast<std::size_t>(s));
        lhs += j.hess(xi, IX);
        for (std::size_t a = 0; a < 4; ++a)
            third += j.third(IX, alg.apply(s, FrameAlgebra::unit(a)), FrameAlgebra::unit(a));
        tors += ctx.torsion_form(xi, IX, j.grad);
    }
    return {lhs, third / (ctx.c() * 4 * n) - tors};
}

inline std::vector<PointContext> point_contexts(const QcModel& m, const std::vector<RationalPoint>& pts) {
    std::vector<std::optional<PointContext>> slots(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { slots[i].emplace(m, pts[i]); });
    std::vector<PointContext> out;
    out.reserve(pts.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

namespace detail {

inline void ricci_identities_at(ResidualLedger& L, const PointContext& ctx, const PointJet& j, const PointJet& jh,
                                const PointJet& jfh, RationalRng& rng) {
    const FrameAlgebra& alg = ctx.alg();
    const int n = ctx.model().n;
    const Rational& c = ctx.c();
    RVec X = random_horizontal(rng), Y = random_horizontal(rng), Z = random_horizontal(rng);
    auto xi = [](int s) { return FrameAlgebra::unit(4 + static_cast<std::size_t>(s)); };

    Rational om_df = 0;
    for (int s = 0; s < 3; ++s) om_df += alg.omega(s, X, Y) * j.xi(s);
    L.record("hessian_skew_horizontal", "nabla^2 f(X,Y) - nabla^2 f(Y,X) = -2 sum_s omega_s(X,Y) df(xi_s)",
             j.hess(X, Y) - j.hess(Y, X), -2 * om_df);

    for (int s = 0; s < 3; ++s)
        L.record("hessian_skew_mixed", "nabla^2 f(X,xi_s) - nabla^2 f(xi_s,X) = T(xi_s,X,grad f)",
                 j.hess(X, xi(s)) - j.hess(xi(s), X), ctx.torsion_form(xi(s), X, j.grad));

    Rational om_h = 0;
    for (int s = 0; s < 3; ++s) om_h += alg.omega(s, X, Y) * j.hess(xi(s), Z);
    L.record("third_derivative_horizontal_commutator",
             "nabla^3 f(X,Y,Z) - nabla^3 f(Y,X,Z) = -R(X,Y,Z,grad f) - 2 sum_s omega_s(X,Y) nabla^2 f(xi_s,Z)",
             j.third(X, Y, Z) - j.third(Y, X, Z), -ctx.curv.R4(X, Y, Z, j.grad) - 2 * om_h);

    for (int i = 0; i < 3; ++i) {
        RVec xi_i = xi(i);
        Rational dT = 0;
        for (std::size_t a = 0; a < 4; ++a) {
            if (X[a] == 0) continue;
            for (std::size_t b = 0; b < 4; ++b)
                if (Y[b] != 0) dT += X[a] * Y[b] * j.df_ambient(ctx.dT[a][static_cast<std::size_t>(i)][b]);
        }
        Rational rhs = j.third(X, Y, xi_i) - j.hess(ctx.torsion_vec(xi_i, X), Y) - j.hess(X, ctx.torsion_vec(xi_i, Y)) -
                       dT - ctx.curv.R4(xi_i, X, Y, j.grad);
        L.record("third_derivative_reeb_commutator",
                 "nabla^3 f(xi_i,X,Y) = nabla^3 f(X,Y,xi_i) - nabla^2 f(T(xi_i,X),Y) - nabla^2 f(X,T(xi_i,Y)) "
                 "- df((nabla_X T)(xi_i,Y)) - R(xi_i,X,Y,grad f)",
                 j.third(xi_i, X, Y), rhs);
    }

    for (int s = 0; s < 3; ++s) {
        Rational tr = 0;
        for (std::size_t a = 0; a < 4; ++a) tr += j.hess(FrameAlgebra::unit(a), alg.apply(s, FrameAlgebra::unit(a)));
        L.record("hessian_trace_against_I", "sum_a nabla^2 f(e_a, I_s e_a) = -4n df(xi_s)", tr / c, -4 * n * j.xi(s));
    }

    ExactMatrix h = j.horizontal_hessian();
    InvariantDecomposition d = decompose(ctx.trip, h);
    ExactMatrix want_m1(4, 4);
    for (int s = 0; s < 3; ++s) want_m1 = want_m1 - Rational(j.xi(s)) * fundamental_form(ctx.trip, s);
    ExactMatrix want3 = Rational(-j.sublap / 4) * ExactMatrix::identity(4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            L.record("hessian_part3", "(nabla^2 f)_[3](X,Y) = -(Delta f / 4) g(X,Y)", d.part3(a, b), want3(a, b));
            L.record("hessian_part3_antisymmetric_vanishes", "(nabla^2 f)_[3][a] = 0",
                     antisymmetric_part(d.part3)(a, b), 0);
            L.record("hessian_partm1_antisymmetric", "(nabla^2 f)_[-1][a](X,Y) = -sum_i df(xi_i) omega_i(X,Y)",
                     d.antisym_m1(a, b), want_m1(a, b));
        }
    Rational vert = 0;
    for (int s = 0; s < 3; ++s) vert += j.xi(s) * j.xi(s);
    L.record("hessian_part3_norm", "|(nabla^2 f)_[3]|^2 = (Delta f)^2 / 4", norm2(d.part3), j.sublap * j.sublap / 4);
    L.record("hessian_partm1_antisymmetric_norm", "|(nabla^2 f)_[-1][a]|^2 = 4 sum_s (xi_s f)^2", norm2(d.antisym_m1),
             4 * vert);

    L.record("sublaplacian_product_rule", "Delta(f h) = f Delta h + h Delta f - 2 g(grad f, grad h)", jfh.sublap,
             j.value * jh.sublap + jh.value * j.sublap - 2 * alg.g(j.grad, jh.grad));

    static constexpr int cyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
    for (const auto& t : cyc)
        L.record("vertical_hessian_commutator", "nabla^2 f(xi_k,xi_j) - nabla^2 f(xi_j,xi_k) = -S df(xi_i), (i,j,k) cyclic",
                 j.hess(xi(t[2]), xi(t[1])) - j.hess(xi(t[1]), xi(t[2])), -ctx.curv.S * j.xi(t[0]));

    ExactMatrix b0 = b0_times_four(j);
    L.record("b0_vanishes", "4 B_0 = nabla^2 f + sum_s nabla^2 f(I_s., I_s.) + (1/n) Delta f g = 0 (n = 1)", norm2(b0), 0);

    auto [l3, r3] = reeb_hessian_relation_check(j, X);
    L.record("reeb_hessian_third_derivative",
             "sum_s nabla^2 f(xi_s, I_s X) = (1/4n) sum_s nabla^3 f(I_s X, I_s e_a, e_a) - sum_s T(xi_s, I_s X, grad f)",
             l3, r3);
}

}  // namespace detail

/// Pointwise Ricci identities, Hessian decomposition, product rule, B_0 and
/// the Reeb-Hessian relation for every (function, point) pair. Each f is paired with
/// the next function of the list for the product rule.
inline ResidualLedger ricci_identity_suite(const QcModel& m, const std::vector<Poly>& fs,
                                           const std::vector<RationalPoint>& pts, std::uint64_t seed = 1) {
    if (fs.empty() || pts.empty()) throw input_error("ricci_identity_suite needs functions and points");
    std::vector<PointContext> ctxs = point_contexts(m, pts);
    const std::size_t pairs = fs.size() * pts.size();
    std::vector<ResidualLedger> parts(pairs, ResidualLedger("scalarops"));
    parallel_for(pairs, [&](std::size_t k) {
        const std::size_t fi = k / pts.size(), pi = k % pts.size();
        const Poly& f = fs[fi];
        const Poly& h = fs[(fi + 1) % fs.size()];
        const PointContext& ctx = ctxs[pi];
        RationalRng rng(seed * 1000003 + k);
        PointJet jf = point_jet(ctx, f), jh = point_jet(ctx, h), jfh = point_jet(ctx, m.reduce(f * h));
        detail::ricci_identities_at(parts[k], ctx, jf, jh, jfh, rng);
    });
    ResidualLedger out("scalarops");
    for (const auto& p : parts) out.absorb(p);
    return out;
}

/// Random test functions: degree <= max_degree in the model's coordinates,
/// reduced on the sphere.
inline std::vector<Poly> random_functions(const QcModel& m, std::uint64_t seed, int count, int max_degree) {
    if (count < 1 || max_degree < 1) throw input_error("random_functions: count and degree must be positive");
    RationalRng rng(seed);
    std::vector<Poly> out;
    for (int i = 0; i < count; ++i) {
        Poly f;
        do {
            f = m.reduce(random_poly(rng, static_cast<int>(m.N), max_degree, 4));
        } while (f.is_constant());
        out.push_back(std::move(f));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polynomial route
// ---------------------------------------------------------------------------

struct ScalarFieldJet {
    Poly f;
    PolyVec df;                      // ambient differential D f
    PolyVec grad_h;                  // horizontal gradient as an ambient vector
    std::array<Poly, 3> xi_derivs;   // df(xi_s)
    PolyMat hess;                    // nabla^2 f(d_i, d_j)
    Poly sublap;                     // Delta f

    /// nabla^2 f(u, v) at p for ambient vectors u, v.
    Rational hessian(const RationalPoint& p, const RVec& u, const RVec& v) const {
        Rational acc = 0;
        for (std::size_t i = 0; i < hess.n; ++i) {
            if (u[i] == 0) continue;
            for (std::size_t k = 0; k < hess.n; ++k)
                if (v[k] != 0) acc += u[i] * v[k] * hess(i, k).evaluate(p);
        }
        return acc;
    }
};

enum class PBranch { n1, general };

/// Coefficient of U(X, grad f) in the general-n P-form: -8n(n-2)/(n-1).
inline Rational p_form_u_coefficient(int n) {
    if (n == 1) throw unsupported_dimension("general-n P-form coefficient is singular at n = 1");
    if (n < 1) throw input_error("quaternionic dimension must be positive");
    Rational r(-8 * n * (n - 2), n - 1);
    r.canonicalize();
    return r;
}

struct PFormData {
    PolyVec P;                              // P_f as a covector in ambient coordinates
    Poly Cf;                                // (nabla_{e_a} P_f)(e_a)
    Poly p_function;                        // P_f(grad f)
    PolyMat B0;                             // B_0 as a covariant form
    std::optional<Rational> p_integral;     // -int P_f(grad f); sphere only
    std::optional<Rational> f_cf_integral;  // int f Cf; sphere only
    PBranch n_branch = PBranch::n1;
};

/// Which traced third derivative to contract: sum_b nabla^3 f(., e_b, e_b),
/// sum_b nabla^3 f(., e_b, I_t e_b) (P-form slots) or
/// sum_a nabla^3 f(., I_s e_a, e_a) (twisted slots).
enum class ThirdSlots { trace, pform, twisted };

class ScalarCalculus {
public:
    explicit ScalarCalculus(const QcModel& m) : m_(&m) {
        const std::size_t N = m.N;
        comet_ = detail::mat_mul(m.proj_h, m.metric_inv);
        reduce_mat(comet_);
        detect_sphere_factors();
        std::vector<PolyMat> weights{comet_};
        for (int t = 0; t < 3; ++t) weights.push_back(reduced(detail::mat_mul(comet_, detail::transpose(m.I[t]))));
        for (int s = 0; s < 3; ++s) weights.push_back(reduced(detail::mat_mul(m.I[s], comet_)));
        contractions_.resize(weights.size());
        parallel_for(weights.size(), [&](std::size_t w) {
            Contraction& ct = contractions_[w];
            ct.W = weights[w];
            ct.E = PolyTensor3(N);
            const PolyTensor3& G = m.gamma;
            for (std::size_t l = 0; l < N; ++l)
                for (std::size_t a = 0; a < N; ++a)
                    for (std::size_t b = 0; b < N; ++b) {
                        Poly acc;
                        for (std::size_t i = 0; i < N; ++i) {
                            acc.add_product(ct.W(i, b), G(a, l, i));
                            acc.add_product(ct.W(a, i), G(b, l, i));
                        }
                        ct.E(l, a, b) = m.reduce(acc);
                    }
        });
        comet_gamma_.assign(N, Poly());
        for (std::size_t k = 0; k < N; ++k) {
            Poly acc;
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j) acc.add_product(comet_(i, j), m.gamma(k, i, j));
            comet_gamma_[k] = m.reduce(acc);
        }
        h_metric_ = reduced(detail::mat_mul(detail::transpose(m.proj_h), detail::mat_mul(m.metric, m.proj_h)));
    }

    const QcModel& model() const { return *m_; }
    bool integrable() const { return m_->kind == ModelKind::sphere7; }
    /// True when the sphere factorization Pi = Id - x x^T - sum xi_s xi_s^T,
    /// I_s = L_s Pi with constant L_s was verified against the model.
    bool factored() const { return factored_; }
    const PolyMat& cometric() const { return comet_; }
    const PolyMat& horizontal_metric() const { return h_metric_; }

    ScalarFieldJet jet(const Poly& f_in) const {
        const QcModel& m = *m_;
        const std::size_t N = m.N;
        ScalarFieldJet j;
        j.f = m.reduce(f_in);
        j.df.resize(N);
        for (std::size_t i = 0; i < N; ++i) j.df[i] = j.f.derivative(static_cast<int>(i));
        j.grad_h = raise_h(j.df);
        for (int s = 0; s < 3; ++s) j.xi_derivs[s] = m.reduce(dot(m.xi[s], j.df));
        j.hess = PolyMat(N);
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                Poly acc = j.df[a].derivative(static_cast<int>(b));
                for (std::size_t k = 0; k < N; ++k) acc.add_product(j.df[k], m.gamma(k, a, b), -1);
                j.hess(a, b) = m.reduce(acc);
            }
        Poly lap;
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) lap.add_product(comet_(a, b), j.hess(a, b), -1);
        j.sublap = m.reduce(lap);
        return j;
    }

    /// Covector l -> traced nabla^3 f(d_l, ., .) for the requested slots; t
    /// selects I_t for the twisted variants.
    PolyVec third_contraction(const ScalarFieldJet& j, ThirdSlots slots, int t = 0) const {
        std::size_t w = 0;
        if (slots == ThirdSlots::pform) w = 1 + static_cast<std::size_t>(t);
        if (slots == ThirdSlots::twisted) w = 4 + static_cast<std::size_t>(t);
        const Contraction& ct = contractions_[w];
        const std::size_t N = m_->N;
        PolyVec out(N);
        parallel_for(N, [&](std::size_t l) {
            Poly acc;
            for (std::size_t a = 0; a < N; ++a)
                for (std::size_t b = 0; b < N; ++b) {
                    const Poly& h = j.hess(a, b);
                    if (h.is_zero()) continue;
                    acc.add_product(ct.W(a, b), h.derivative(static_cast<int>(l)));
                    acc.add_product(ct.E(l, a, b), h, -1);
                }
            out[l] = m_->reduce(acc);
        });
        return out;
    }

    /// (nabla_{e_a} sigma)(e_a) for a covector field sigma; equals -nabla^* sigma.
    Poly divergence(const PolyVec& sigma) const {
        const std::size_t N = m_->N;
        Poly acc;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) acc.add_product(comet_(i, k), sigma[k].derivative(static_cast<int>(i)));
        for (std::size_t k = 0; k < N; ++k) acc.add_product(comet_gamma_[k], sigma[k], -1);
        return m_->reduce(acc);
    }

    /// Pi v for an ambient vector.
    PolyVec proj(const PolyVec& v) const {
        if (!factored_) return reduced(detail::mat_vec(m_->proj_h, v));
        PolyVec out = v;
        for (const auto& u : normal_) {
            Poly d = m_->reduce(dot(u, v));
            for (std::size_t k = 0; k < out.size(); ++k) out[k].add_product(u[k], d, -1);
        }
        return reduced(std::move(out));
    }
    /// Pi^T c for a covector: restriction of a one-form to H.
    PolyVec restrict_h(const PolyVec& c) const {
        return factored_ ? proj(c) : reduced(detail::mat_vec(detail::transpose(m_->proj_h), c));
    }
    /// Horizontal vector dual to a covector.
    PolyVec raise_h(const PolyVec& c) const { return factored_ ? proj(c) : reduced(detail::mat_vec(comet_, c)); }
    /// I_s^T c for a covector.
    PolyVec apply_I_transpose(int s, const PolyVec& c) const {
        if (!factored_) return reduced(detail::mat_vec(detail::transpose(m_->I[s]), c));
        return proj(constant_apply(L_[static_cast<std::size_t>(s)].transpose(), c));
    }
    /// I_s v for a vector.
    PolyVec apply_I(int s, const PolyVec& v) const {
        if (!factored_) return reduced(detail::mat_vec(m_->I[s], v));
        return constant_apply(L_[static_cast<std::size_t>(s)], proj(v));
    }

    /// P_f in ambient covector form. T^0 and U vanish on both models (checked
    /// by the curvature suite) so the n = 1 torsion term is omitted.
    PFormData p_form(const ScalarFieldJet& j, PBranch branch = PBranch::n1, bool with_b0 = false) const {
        const QcModel& m = *m_;
        if (branch == PBranch::general) p_form_u_coefficient(m.n);
        const std::size_t N = m.N;
        PFormData out;
        out.n_branch = branch;
        PolyVec acc = third_contraction(j, ThirdSlots::trace);
        const Rational s_coef = -4 * m.n * m.S;
        for (std::size_t k = 0; k < N; ++k) acc[k] += j.df[k] * s_coef;
        acc = restrict_h(acc);
        for (int t = 0; t < 3; ++t) {
            PolyVec tw = apply_I_transpose(t, third_contraction(j, ThirdSlots::pform, t));
            for (std::size_t k = 0; k < N; ++k) acc[k] += tw[k];
        }
        out.P = reduced(std::move(acc));
        out.Cf = divergence(out.P);
        out.p_function = m.reduce(dot(out.P, j.grad_h));
        if (with_b0) out.B0 = b0_form(j);
        if (integrable()) {
            out.p_integral = -integrate_sphere(out.p_function);
            out.f_cf_integral = integrate_sphere(m.reduce(j.f * out.Cf));
        }
        return out;
    }

    /// Covariant horizontal Hessian B = Pi^T H Pi.
    PolyMat horizontal_hessian(const ScalarFieldJet& j) const {
        const std::size_t N = m_->N;
        if (!factored_)
            return reduced(detail::mat_mul(detail::transpose(m_->proj_h), detail::mat_mul(j.hess, m_->proj_h)));
        PolyMat out(N);
        for (std::size_t a = 0; a < N; ++a) {
            PolyVec row(j.hess.e.begin() + static_cast<std::ptrdiff_t>(a * N),
                        j.hess.e.begin() + static_cast<std::ptrdiff_t>((a + 1) * N));
            row = proj(row);
            for (std::size_t b = 0; b < N; ++b) out(a, b) = std::move(row[b]);
        }
        for (std::size_t b = 0; b < N; ++b) {
            PolyVec col(N);
            for (std::size_t a = 0; a < N; ++a) col[a] = out(a, b);
            col = proj(col);
            for (std::size_t a = 0; a < N; ++a) out(a, b) = std::move(col[a]);
        }
        return out;
    }
    /// sum_s B(I_s ., I_s .) for a horizontal covariant form B.
    PolyMat casimir(const PolyMat& B) const {
        const std::size_t N = m_->N;
        PolyMat out(N);
        for (std::size_t s = 0; s < 3; ++s) {
            PolyMat c = factored_ ? constant_sandwich(L_[s], B)
                                  : detail::mat_mul(detail::transpose(m_->I[s]), detail::mat_mul(B, m_->I[s]));
            for (std::size_t k = 0; k < N * N; ++k) out.e[k] += c.e[k];
        }
        return reduced(std::move(out));
    }
    /// Squared norm of a horizontal covariant form.
    Poly norm2(const PolyMat& B) const {
        Poly acc;
        if (factored_) {
            for (const auto& e : B.e) acc.add_product(e, e);
        } else {
            PolyMat K = detail::mat_mul(comet_, B), M = detail::mat_mul(B, comet_);
            for (std::size_t k = 0; k < K.e.size(); ++k) acc.add_product(K.e[k], M.e[k]);
        }
        return m_->reduce(acc);
    }
    /// g(u, v) for ambient vectors.
    Poly metric(const PolyVec& u, const PolyVec& v) const {
        return m_->reduce(dot(u, detail::mat_vec(m_->metric, v)));
    }

    /// 4 B_0 as a covariant form.
    PolyMat b0_form(const ScalarFieldJet& j) const {
        PolyMat B = horizontal_hessian(j), U = casimir(B);
        const std::size_t N = m_->N;
        PolyMat out(N);
        const Rational inv_n(1, m_->n);
        for (std::size_t k = 0; k < N * N; ++k)
            out.e[k] = m_->reduce(B.e[k] + U.e[k] + h_metric_.e[k] * j.sublap * inv_n);
        return out;
    }

    Rational integrate(const Poly& p) const {
        if (!integrable()) throw input_error("integrals are only defined on the compact sphere model");
        return integrate_sphere(m_->reduce(p));
    }

    static Poly dot(const PolyVec& a, const PolyVec& b) {
        Poly acc;
        for (std::size_t i = 0; i < a.size(); ++i) acc.add_product(a[i], b[i]);
        return acc;
    }

private:
    struct Contraction {
        PolyMat W;      // contravariant weight on the last two slots
        PolyTensor3 E;  // E(l, a, b): coefficient of H_ab from the connection terms
    };

    void detect_sphere_factors() {
        const QcModel& m = *m_;
        if (m.kind != ModelKind::sphere7) return;
        const std::size_t N = m.N;
        normal_.assign(1, PolyVec(N));
        for (std::size_t i = 0; i < N; ++i) normal_[0][i] = Poly::variable(static_cast<int>(i));
        for (int s = 0; s < 3; ++s) normal_.push_back(m.xi[s]);
        PolyMat pi(N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) {
                Poly v = i == k ? Poly(1) : Poly();
                for (const auto& u : normal_) v.add_product(u[i], u[k], -1);
                pi(i, k) = v;
            }
        pi = reduced(std::move(pi));
        if (pi.e != reduced(m.proj_h).e || comet_.e != pi.e) return;
        auto L = detail::left_multiplication_8();
        for (std::size_t s = 0; s < 3; ++s) {
            L_[s] = Rational(m.convention.i_sign) * L[s];
            if (reduced(detail::mat_mul(detail::constant_mat(L_[s]), m.proj_h)).e != reduced(m.I[s]).e) return;
            // L_s must commute with Pi for the sandwich shortcut.
            if (reduced(detail::mat_mul(detail::constant_mat(L_[s]), m.proj_h)).e !=
                reduced(detail::mat_mul(m.proj_h, detail::constant_mat(L_[s]))).e)
                return;
        }
        factored_ = true;
    }

    static PolyVec constant_apply(const ExactMatrix& L, const PolyVec& v) {
        PolyVec out(L.rows());
        for (std::size_t i = 0; i < L.rows(); ++i)
            for (std::size_t k = 0; k < L.cols(); ++k)
                if (L(i, k) != 0) out[i] += v[k] * L(i, k);
        return out;
    }
    /// L^T B L for constant L.
    static PolyMat constant_sandwich(const ExactMatrix& L, const PolyMat& B) {
        const std::size_t N = B.n;
        PolyMat out(N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t a = 0; a < N; ++a) {
                if (L(i, a) == 0) continue;
                for (std::size_t j = 0; j < N; ++j)
                    for (std::size_t b = 0; b < N; ++b)
                        if (L(j, b) != 0) out(a, b) += B(i, j) * (L(i, a) * L(j, b));
            }
        return out;
    }

    void reduce_mat(PolyMat& a) const {
        for (auto& p : a.e) p = m_->reduce(p);
    }
    PolyMat reduced(PolyMat a) const {
        reduce_mat(a);
        return a;
    }
    PolyVec reduced(PolyVec v) const {
        for (auto& p : v) p = m_->reduce(p);
        return v;
    }

    const QcModel* m_;
    PolyMat comet_, h_metric_;
    std::vector<Contraction> contractions_;
    PolyVec comet_gamma_;
    bool factored_ = false;
    std::vector<PolyVec> normal_;
    std::array<ExactMatrix, 3> L_;
};

/// Integral machinery on the sphere: divergence theorem, weak-form Laplacian,
/// the (lap) trace identity and int f Cf = -int P_f(grad f). Each f is paired
/// with the next function in the list as the test function h.
inline ResidualLedger integral_machinery_suite(const ScalarCalculus& calc, const std::vector<Poly>& fs,
                                               std::size_t pform_count) {
    if (!calc.integrable()) throw input_error("integral machinery requires the sphere model");
    if (fs.empty()) throw input_error("integral_machinery_suite needs functions");
    const QcModel& m = calc.model();
    std::vector<ResidualLedger> parts(fs.size(), ResidualLedger("scalarops"));
    parallel_for(fs.size(), [&](std::size_t k) {
        ResidualLedger& L = parts[k];
        ScalarFieldJet j = calc.jet(fs[k]);
        ScalarFieldJet jh = calc.jet(fs[(k + 1) % fs.size()]);
        L.record("integral_sublaplacian", "int Delta f = 0", calc.integrate(j.sublap), 0);
        PolyVec sigma(m.N);
        for (std::size_t i = 0; i < m.N; ++i) sigma[i] = m.reduce(jh.f * j.df[i]);
        L.record("divergence_theorem", "int (nabla_{e_a} sigma)(e_a) = 0 for sigma = h df",
                 calc.integrate(calc.divergence(calc.restrict_h(sigma))), 0);
        L.record("weak_sublaplacian", "int g(grad f, grad h) = int (Delta f) h",
                 calc.integrate(ScalarCalculus::dot(j.df, jh.grad_h)), calc.integrate(j.sublap * jh.f));
        PolyVec tr = calc.third_contraction(j, ThirdSlots::trace);
        L.record("third_trace_integral", "int nabla^3 f(grad f, e_a, e_a) = -int (Delta f)^2",
                 calc.integrate(ScalarCalculus::dot(tr, j.grad_h)), -calc.integrate(j.sublap * j.sublap));
        if (k < pform_count) {
            PFormData pd = calc.p_form(j, PBranch::n1, true);
            L.record("paneitz_integration_by_parts", "int f Cf = -int P_f(grad f)", *pd.f_cf_integral, *pd.p_integral);
            L.record("c_operator_integral", "int Cf = 0", calc.integrate(pd.Cf), 0);
            Rational b0 = 0;
            for (const auto& e : pd.B0.e)
                for (const auto& [mono, coef] : e.terms()) b0 += abs(coef);
            L.record("b0_polynomial_vanishes", "4 B_0 = 0 as a polynomial form (n = 1)", b0, 0);
        }
    });
    ResidualLedger out("scalarops");
    for (const auto& p : parts) out.absorb(p);
    return out;
}

}  // namespace qc7
