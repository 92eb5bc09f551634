#pragma once

// Global analysis on the sphere model: Rayleigh-Ritz spectra of the
// sub-Laplacian and of the Riemannian Laplacian on polynomial subspaces, the
// Lichnerowicz bound k0 / 3, the integral identity chain, the extremal-case
// checks and the discrepancy registry.

#include <optional>
#include <string>
#include <vector>

#include "qc7/ledger.hpp"
#include "qc7/linalg.hpp"
#include "qc7/models.hpp"
#include "qc7/parallel.hpp"
#include "qc7/scalarops.hpp"

namespace qc7 {

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

inline constexpr int kDefaultDegreeCap = 4;

struct SpectralProblem {
    int degree = 0;
    std::vector<Poly> basis;         // reduced monomials of degree 1..d
    std::vector<Rational> means;     // int phi_i
    ExactMatrix gram;                // int (phi_i - mean_i)(phi_j - mean_j)
    ExactMatrix stiffness_h;         // int g(grad_H phi_i, grad_H phi_j)
    ExactMatrix stiffness_v;         // int sum_s (xi_s phi_i)(xi_s phi_j)
    ExactMatrix stiffness_full;      // int <grad_T phi_i, grad_T phi_j>, tangential gradient of S^7 in R^8

    Poly function(const std::vector<Rational>& coeffs) const {
        Poly f;
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (coeffs[i] != 0) f += (basis[i] - Poly(means[i])) * coeffs[i];
        return f;
    }
};

/// Monomials of total degree 1..d in x1..x8 with x8-degree at most one: a
/// basis of polynomial functions of degree <= d on S^7 modulo constants.
inline std::vector<Poly> spectral_basis(int d) {
    std::vector<Poly> out;
    std::array<int, kAmbientVars> e{};
    for (int deg = 1; deg <= d; ++deg) {
        auto rec = [&](auto&& self, int var, int remaining) -> void {
            if (var == kAmbientVars - 1) {
                if (remaining > 1) return;
                e[kAmbientVars - 1] = remaining;
                out.push_back(Poly::monomial(Monomial::from_exponents(e), 1));
                e[kAmbientVars - 1] = 0;
                return;
            }
            for (int k = remaining; k >= 0; --k) {
                e[static_cast<std::size_t>(var)] = k;
                self(self, var + 1, remaining - k);
            }
            e[static_cast<std::size_t>(var)] = 0;
        };
        rec(rec, 0, deg);
    }
    return out;
}

inline SpectralProblem assemble(const QcModel& m, int d, int degree_cap = kDefaultDegreeCap) {
    if (m.kind != ModelKind::sphere7) throw input_error("spectral assembly requires the sphere model");
    if (d < 1 || d > degree_cap)
        throw config_error("spectral degree " + std::to_string(d) + " outside 1.." + std::to_string(degree_cap));
    SpectralProblem p;
    p.degree = d;
    p.basis = spectral_basis(d);
    const std::size_t n = p.basis.size();
    const std::size_t N = m.N;
    std::vector<PolyVec> grad(n), hgrad(n), xi(n);
    std::vector<Poly> normal(n);
    p.means.resize(n);
    PolyVec x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = Poly::variable(static_cast<int>(i));
    for (std::size_t i = 0; i < n; ++i) {
        grad[i].resize(N);
        for (std::size_t k = 0; k < N; ++k) grad[i][k] = p.basis[i].derivative(static_cast<int>(k));
        hgrad[i] = detail::mat_vec(m.proj_h, grad[i]);
        xi[i].resize(3);
        for (int s = 0; s < 3; ++s) xi[i][static_cast<std::size_t>(s)] = ScalarCalculus::dot(m.xi[s], grad[i]);
        normal[i] = ScalarCalculus::dot(x, grad[i]);
        p.means[i] = integrate_sphere(p.basis[i]);
    }
    p.gram = p.stiffness_h = p.stiffness_v = p.stiffness_full = ExactMatrix(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            Rational g = integrate_sphere(p.basis[i] * p.basis[j]) - p.means[i] * p.means[j];
            Rational h = integrate_sphere(ScalarCalculus::dot(grad[i], hgrad[j]));
            Rational v = integrate_sphere(ScalarCalculus::dot(xi[i], xi[j]));
            Rational full = integrate_sphere(ScalarCalculus::dot(grad[i], grad[j]) - normal[i] * normal[j]);
            p.gram(i, j) = p.gram(j, i) = g;
            p.stiffness_h(i, j) = p.stiffness_h(j, i) = h;
            p.stiffness_v(i, j) = p.stiffness_v(j, i) = v;
            p.stiffness_full(i, j) = p.stiffness_full(j, i) = full;
        }
    });
    return p;
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

struct EigenRow {
    double approx = 0;
    std::optional<Rational> exact;
    std::size_t multiplicity = 0;
    bool certified = false;            // exact multiplicity matches and every eigenvector passes the operator identity
    double residual = 0;
    std::string method;
    std::vector<Poly> eigenfunctions;  // exact null-space basis when certified
};

/// Laplacian applied to a polynomial: sub-Laplacian, or the Riemannian
/// Laplacian Delta f - sum_s xi_s(xi_s f) of the extended metric.
enum class Operator { sub_laplacian, riemannian };

inline Poly apply_operator(const ScalarCalculus& calc, Operator op, const Poly& f) {
    ScalarFieldJet j = calc.jet(f);
    if (op == Operator::sub_laplacian) return j.sublap;
    const QcModel& m = calc.model();
    Poly out = j.sublap;
    for (int s = 0; s < 3; ++s) {
        const Poly& d = j.xi_derivs[s];
        for (std::size_t k = 0; k < m.N; ++k) out.add_product(m.xi[s][k], d.derivative(static_cast<int>(k)), -1);
    }
    return m.reduce(out);
}

/// True when op(f) - lambda f reduces to the zero polynomial.
inline bool is_eigenfunction(const ScalarCalculus& calc, Operator op, const Poly& f, const Rational& lambda) {
    const QcModel& m = calc.model();
    return (apply_operator(calc, op, f) - m.reduce(f) * lambda).is_zero();
}

inline std::vector<EigenRow> solve_spectrum(const ScalarCalculus& calc, const SpectralProblem& p, Operator op,
                                            double tol) {
    ExactMatrix a = op == Operator::sub_laplacian ? p.stiffness_h : p.stiffness_h + p.stiffness_v;
    GeneralizedEigenResult r = generalized_eigen(a, p.gram, tol);
    std::vector<EigenRow> rows(r.clusters.size());
    parallel_for(r.clusters.size(), [&](std::size_t k) {
        const EigenCluster& c = r.clusters[k];
        EigenRow& row = rows[k];
        row.approx = c.approx;
        row.exact = c.exact;
        row.multiplicity = c.multiplicity;
        row.residual = c.residual;
        row.method = c.method;
        if (!c.certified) return;
        auto null = null_space(a - *c.exact * p.gram);
        if (null.size() != c.multiplicity) return;
        bool ok = true;
        for (const auto& v : null) {
            Poly f = p.function(v);
            if (!is_eigenfunction(calc, op, f, *c.exact)) ok = false;
            row.eigenfunctions.push_back(calc.model().reduce(f));
        }
        row.certified = ok;
        if (!ok) row.eigenfunctions.clear();
    });
    return rows;
}

/// Smallest positive row, if its value is exact.
inline const EigenRow* first_positive(const std::vector<EigenRow>& rows) {
    for (const auto& r : rows)
        if (r.exact ? *r.exact > 0 : r.approx > 1e-9) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Lichnerowicz bound
// ---------------------------------------------------------------------------

/// Smallest eigenvalue of 6 S g + 10 T^0 relative to g on H, with T^0 given
/// on a horizontal frame where g = c Id.
inline Rational lichnerowicz_form_min(const Rational& S, const ExactMatrix& t0, const Rational& scale = 1) {
    ExactMatrix g = scale * ExactMatrix::identity(t0.rows());
    ExactMatrix form = Rational(6 * S) * g + Rational(10) * t0;
    GeneralizedEigenResult r = generalized_eigen(form, g, 1e-12);
    const EigenCluster& c = r.clusters.front();
    if (!c.certified) throw convergence_error("lichnerowicz form has no certified rational minimum", c.residual);
    return *c.exact;
}

struct LichnerowiczResult {
    Rational k0 = 0;
    Rational bound = 0;  // k0 / 3
    std::size_t points = 0;
};

inline LichnerowiczResult lichnerowicz_k0(const QcModel& m, const std::vector<RationalPoint>& pts) {
    if (pts.empty()) throw input_error("lichnerowicz_k0 needs at least one point");
    std::vector<Rational> mins(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        TorsionData td = torsion_at(m, pts[i]);
        CurvatureData cd = curvature_at(m, pts[i]);
        mins[i] = lichnerowicz_form_min(cd.S, td.t0, td.alg.c);
    });
    LichnerowiczResult out;
    out.k0 = *std::min_element(mins.begin(), mins.end());
    out.bound = out.k0 / 3;
    out.points = pts.size();
    return out;
}

// ---------------------------------------------------------------------------
// Integral identities
// ---------------------------------------------------------------------------

/// Every integral entering the identity chain, for one function.
struct IntegralTerms {
    Rational f2, mean, grad2, lap2, vert;
    Rational reeb_hessian;       // int sum_s nabla^2 f(xi_s, I_s grad f)
    Rational partm1_anti, partm1_sym, part3;  // int |(nabla^2 f)_[-1][a]|^2, |[-1][s]|^2, |[3]|^2
    Rational third_trace;        // int nabla^3 f(grad f, e_a, e_a)
    Rational third_pform;        // int sum_t nabla^3 f(I_t grad f, e_b, I_t e_b)
    Rational third_twisted;          // int sum_s nabla^3 f(I_s grad f, I_s e_a, e_a)
    Rational torsion_a;          // int sum_s T(xi_s, I_s grad f, grad f)
    Rational torsion_b;          // int sum_s T(xi_s, grad f, I_s grad f)
    Rational t0, u;              // int T^0(grad f, grad f), int U(grad f, grad f)
    Rational p_function;         // int P_f(grad f)
    Rational p_norm2;            // int |P_f|^2
    Rational f_cf;               // int f Cf
    Rational vertical_commutator;  // int sum_cyclic df(xi_i) [nabla^2 f(xi_k, xi_j) - nabla^2 f(xi_j, xi_k)]
};

inline IntegralTerms integral_terms(const ScalarCalculus& calc, const Poly& f) {
    if (!calc.integrable()) throw input_error("integral terms require the sphere model");
    const QcModel& m = calc.model();
    const std::size_t N = m.N;
    ScalarFieldJet j = calc.jet(f);
    IntegralTerms t;
    auto I = [&](const Poly& p) { return calc.integrate(p); };
    using SC = ScalarCalculus;
    t.f2 = I(j.f * j.f);
    t.mean = I(j.f);
    t.grad2 = I(SC::dot(j.df, j.grad_h));
    t.lap2 = I(j.sublap * j.sublap);
    for (int s = 0; s < 3; ++s) t.vert += I(j.xi_derivs[s] * j.xi_derivs[s]);

    std::array<PolyVec, 3> Igrad;
    for (int s = 0; s < 3; ++s) Igrad[s] = calc.apply_I(s, j.grad_h);
    Poly rh;
    for (int s = 0; s < 3; ++s) rh += SC::dot(m.xi[s], detail::mat_vec(j.hess, Igrad[s]));
    t.reeb_hessian = I(rh);

    PolyMat B = calc.horizontal_hessian(j), U = calc.casimir(B);
    PolyMat p3(N), sym(N), anti(N);
    for (std::size_t k = 0; k < N * N; ++k) p3.e[k] = (B.e[k] + U.e[k]) * Rational(1, 4);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) {
            Poly ab = B(a, b) - p3(a, b), ba = B(b, a) - p3(b, a);
            sym(a, b) = (ab + ba) * Rational(1, 2);
            anti(a, b) = (ab - ba) * Rational(1, 2);
        }
    t.part3 = I(calc.norm2(p3));
    t.partm1_sym = I(calc.norm2(sym));
    t.partm1_anti = I(calc.norm2(anti));

    t.third_trace = I(SC::dot(calc.third_contraction(j, ThirdSlots::trace), j.grad_h));
    for (int s = 0; s < 3; ++s) {
        t.third_pform += I(SC::dot(calc.third_contraction(j, ThirdSlots::pform, s), Igrad[s]));
        t.third_twisted += I(SC::dot(calc.third_contraction(j, ThirdSlots::twisted, s), Igrad[s]));
    }

    auto torsion_vec = [&](const PolyVec& u, const PolyVec& v) {
        PolyVec out(N);
        for (std::size_t k = 0; k < N; ++k) {
            Poly acc;
            for (std::size_t a = 0; a < N; ++a)
                for (std::size_t b = 0; b < N; ++b) {
                    Poly tk = m.gamma(k, a, b) - m.gamma(k, b, a);
                    if (tk.is_zero()) continue;
                    acc.add_product(tk, u[a] * v[b]);
                }
            out[k] = m.reduce(acc);
        }
        return out;
    };
    for (int s = 0; s < 3; ++s) {
        t.torsion_a += I(calc.metric(torsion_vec(m.xi[s], Igrad[s]), j.grad_h));
        t.torsion_b += I(calc.metric(torsion_vec(m.xi[s], j.grad_h), Igrad[s]));
    }
    // T^0 is the symmetric and U the skew part of X -> T(xi_s, X) composed with I_s.
    t.t0 = (t.torsion_a + t.torsion_b) / 2;
    t.u = (t.torsion_b - t.torsion_a) / 6;

    PFormData pd = calc.p_form(j);
    t.p_function = -*pd.p_integral;
    t.f_cf = *pd.f_cf_integral;
    t.p_norm2 = I(SC::dot(pd.P, calc.raise_h(pd.P)));

    static constexpr int cyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
    Poly vc;
    for (const auto& c : cyc) {
        const PolyVec& xj = m.xi[c[1]];
        const PolyVec& xk = m.xi[c[2]];
        Poly kj = SC::dot(xk, detail::mat_vec(j.hess, xj)), jk = SC::dot(xj, detail::mat_vec(j.hess, xk));
        vc.add_product(j.xi_derivs[c[0]], kj - jk);
    }
    t.vertical_commutator = I(vc);
    return t;
}

// ---------------------------------------------------------------------------
// Discrepancy registry
// ---------------------------------------------------------------------------

struct DiscrepancyEntry {
    std::string id;
    std::string formula;        // the stated formula, in plain math notation
    std::string lhs_label, rhs_label;
    Rational lhs = 0, rhs = 0;  // computed sides of the stated formula
    std::optional<std::string> alternative_label;
    std::optional<Rational> alternative;  // computed value of the alternative reading
    std::string verdict;
};

class DiscrepancyRegistry {
public:
    void add(DiscrepancyEntry e) {
        for (const auto& x : entries_)
            if (x.id == e.id) return;
        entries_.push_back(std::move(e));
    }
    const std::vector<DiscrepancyEntry>& entries() const { return entries_; }
    const DiscrepancyEntry* find(const std::string& id) const {
        for (const auto& e : entries_)
            if (e.id == id) return &e;
        return nullptr;
    }

private:
    std::vector<DiscrepancyEntry> entries_;
};

/// Records the integral identity chain for f. Must-pass entries hold for
/// every f; with lambda set, f is an eigenfunction and the eigenfunction-only
/// report entries are added.
inline ResidualLedger integral_identity_suite(const QcModel& m, const IntegralTerms& t,
                                              std::optional<Rational> lambda = std::nullopt) {
    ResidualLedger L("spectral");
    const Rational& S = m.S;
    const int n = m.n;
    L.record("reeb_hessian_third_derivative_integrated",
             "int sum_s nabla^2 f(xi_s, I_s grad f) = int [(1/4n) sum_s nabla^3 f(I_s grad f, I_s e_a, e_a) "
             "- sum_s T(xi_s, I_s grad f, grad f)]",
             t.reeb_hessian, t.third_twisted / (4 * n) - t.torsion_a);
    L.record("third_trace_integral", "int nabla^3 f(grad f, e_a, e_a) = -int (Delta f)^2", t.third_trace, -t.lap2);
    L.record("torsion_trace_identity", "2 sum_s T(xi_s, I_s grad f, grad f) = 2 T^0(grad f, grad f) - 6 U(grad f, grad f)",
             2 * t.torsion_a, 2 * t.t0 - 6 * t.u, true, "degenerate on the models: both sides vanish");
    Rational q = -Rational(3, 16) * t.lap2 - Rational(3, 16) * t.third_pform + Rational(1, 4) * t.partm1_sym +
                 Rational(1, 2) * t.t0 + Rational(3, 2) * S * t.grad2;
    L.record("hessian_chain_q",
             "Q = int [-(3/16)(Delta f)^2 - (3/16) sum_t nabla^3 f(I_t grad f, e_b, I_t e_b) "
             "+ (1/4)|(nabla^2 f)_[-1][s]|^2 + (1/2) T^0(grad f, grad f) + (3/2) S |grad f|^2] = 0",
             q, 0);
    L.record("paneitz_integration_by_parts", "int f Cf = -int P_f(grad f)", t.f_cf, -t.p_function);

    L.record("reeb_hessian_partm1_identity",
             "int sum_s nabla^2 f(xi_s, I_s grad f) = -int [|(nabla^2 f)_[-1][a]|^2 + T^0(grad f, grad f)]",
             t.reeb_hessian, -(t.partm1_anti + t.t0), false);
    L.record("reeb_hessian_bochner_identity",
             "int sum_s nabla^2 f(xi_s, I_s grad f) = int [(3/16)(Delta f)^2 - (1/4)|(nabla^2 f)_[-1][a]|^2 "
             "- (1/4)|(nabla^2 f)_[-1][s]|^2 - (3/2) T^0(grad f, grad f) - (3/2) S |grad f|^2]",
             t.reeb_hessian,
             Rational(3, 16) * t.lap2 - Rational(1, 4) * t.partm1_anti - Rational(1, 4) * t.partm1_sym -
                 Rational(3, 2) * t.t0 - Rational(3, 2) * S * t.grad2,
             false);
    L.record("reeb_hessian_pform_slots",
             "int sum_t nabla^2 f(xi_t, I_t grad f) = int [-T^0(grad f, grad f) - (1/4) sum_t nabla^3 f(I_t grad f, e_b, I_t e_b)]",
             t.reeb_hessian, -t.t0 - t.third_pform / 4, false);
    L.record("reeb_hessian_twisted_slots",
             "int sum_t nabla^2 f(xi_t, I_t grad f) = int [-T^0(grad f, grad f) + (1/4) sum_s nabla^3 f(I_s grad f, I_s e_a, e_a)]",
             t.reeb_hessian, -t.t0 + t.third_twisted / 4, false);
    L.record("reeb_hessian_pform_identity",
             "int sum_s nabla^2 f(xi_s, I_s grad f) = int [-(1/4n) P_f(grad f) - (1/4n)(Delta f)^2 - S |grad f|^2] (n = 1, U term omitted)",
             t.reeb_hessian, -t.p_function / (4 * n) - t.lap2 / (4 * n) - S * t.grad2, false);
    if (lambda) {
        const Rational& lam = *lambda;
        L.record("pform_norm_stated_constants",
                 "int |P_f|^2 = -(lambda + 8) int P_f(grad f) - 3 * 8^3 int sum_s (df(xi_s))^2",
                 t.p_norm2, -(lam + 8) * t.p_function - 1536 * t.vert, false);
        L.record("pform_norm_intermediate",
                 "int |P_f|^2 = -(lambda + 4S) int P_f(grad f) - 8^3 int sum_s (df(xi_s))^2 "
                 "+ 8 * 8^2 int sum_cyclic df(xi_i) [nabla^2 f(xi_k, xi_j) - nabla^2 f(xi_j, xi_k)]",
                 t.p_norm2, -(lam + 4 * S) * t.p_function - 512 * t.vert + 512 * t.vertical_commutator, false);
        L.record("eigenfunction_paneitz_sign", "-int P_f(grad f) >= 0 (recorded as equality with its value)",
                 -t.p_function, -t.p_function, true, "sign checked separately");
    }
    return L;
}

// ---------------------------------------------------------------------------
// Extremal case and Riemannian comparison
// ---------------------------------------------------------------------------

struct ExtremalResult {
    bool partm1_sym_vanishes = false;    // (nabla^2 f)_[-1][s] = 0 as a polynomial form
    Rational p_function = 0;             // int P_f(grad f)
    Rational trace_consistent_residual;  // coefficient l1 norm of the lambda/4 Hessian residual
    Rational k0_residual;           // same for the k0/3 variant
    Poly k0_residual_scalar;        // r with (k0/3 variant residual) = r g
    DiscrepancyEntry entry;
    bool pass() const { return partm1_sym_vanishes && p_function == 0 && trace_consistent_residual == 0; }
};

inline Rational l1_norm(const PolyMat& a) {
    Rational acc = 0;
    for (const auto& e : a.e)
        for (const auto& [mono, c] : e.terms()) acc += abs(c);
    return acc;
}

/// Extremal Hessian for an eigenfunction with eigenvalue lambda:
/// nabla^2 f(X,Y) = -c f g(X,Y) - sum_s df(xi_s) omega_s(X,Y), evaluated for
/// c = lambda/4 and for c = k0/3.
inline ExtremalResult extremal_check(const ScalarCalculus& calc, const Poly& f, const Rational& lambda,
                                     const Rational& k0) {
    const QcModel& m = calc.model();
    if (!is_eigenfunction(calc, Operator::sub_laplacian, f, lambda))
        throw input_error("extremal_check: f is not an eigenfunction for the given eigenvalue");
    const std::size_t N = m.N;
    ScalarFieldJet j = calc.jet(f);
    ExtremalResult r;
    PolyMat B = calc.horizontal_hessian(j), U = calc.casimir(B);
    bool zero = true;
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) {
            auto m1 = [&](std::size_t x, std::size_t y) { return B(x, y) - (B(x, y) + U(x, y)) * Rational(1, 4); };
            if (!m.reduce(m1(a, b) + m1(b, a)).is_zero()) zero = false;
        }
    r.partm1_sym_vanishes = zero;
    r.p_function = -*calc.p_form(j).p_integral;

    const PolyMat& gH = calc.horizontal_metric();
    std::array<PolyMat, 3> omega;
    for (int s = 0; s < 3; ++s) {
        omega[s] = detail::mat_mul(detail::transpose(m.I[s]), m.metric);
        omega[s] = detail::mat_mul(detail::transpose(m.proj_h), omega[s]);  // restrict the first slot to H
    }
    auto residual = [&](const Rational& coef) {
        PolyMat out(N);
        for (std::size_t k = 0; k < N * N; ++k) {
            Poly acc = B.e[k] + gH.e[k] * j.f * coef;
            for (int s = 0; s < 3; ++s) acc.add_product(j.xi_derivs[s], omega[s].e[k]);
            out.e[k] = m.reduce(acc);
        }
        return out;
    };
    r.trace_consistent_residual = l1_norm(residual(lambda / 4));
    r.k0_residual = l1_norm(residual(k0 / 3));
    r.k0_residual_scalar = m.reduce(j.f * (k0 / 3 - lambda / 4));

    // Integrated trace against f: int f tr_H nabla^2 f = -int f Delta f.
    Rational f2 = calc.integrate(j.f * j.f);
    DiscrepancyEntry& e = r.entry;
    e.id = "extremal_hessian_coefficient";
    e.formula = "nabla^2 f(X,Y) = -(k0/3) f g(X,Y) - sum_s df(xi_s) omega_s(X,Y)";
    e.lhs_label = "int f tr_H nabla^2 f";
    e.rhs_label = "int f tr_H [-(k0/3) f g] = -4n (k0/3) int f^2";
    e.lhs = -calc.integrate(j.f * j.sublap);
    e.rhs = -4 * m.n * (k0 / 3) * f2;
    e.alternative_label = "trace-consistent coefficient lambda/4: -4n (lambda/4) int f^2";
    e.alternative = -4 * m.n * (lambda / 4) * f2;
    if (e.lhs == e.rhs)
        e.verdict = "stated coefficient k0/3 consistent";
    else if (e.lhs == *e.alternative)
        e.verdict = "stated coefficient k0/3 contradicted; lambda/4 holds exactly (residual of stated variant = (k0/3 - lambda/4) f g)";
    else
        e.verdict = "neither coefficient matches";
    return r;
}

struct RiemannianComparison {
    Rational lambda;
    Rational vertical_energy;  // int sum_s (df(xi_s))^2 / int f^2
    Rational quotient;         // Riemannian Rayleigh quotient
    bool matches() const { return quotient == lambda + vertical_energy; }
};

inline RiemannianComparison riemannian_comparison(const ScalarCalculus& calc, const Poly& f, const Rational& lambda) {
    if (!is_eigenfunction(calc, Operator::sub_laplacian, f, lambda))
        throw input_error("riemannian_comparison: f is not an eigenfunction for the given eigenvalue");
    ScalarFieldJet j = calc.jet(f);
    Rational f2 = calc.integrate(j.f * j.f);
    if (f2 == 0 || calc.integrate(j.f) != 0) throw input_error("riemannian_comparison: f must be nonzero with mean zero");
    RiemannianComparison r;
    r.lambda = lambda;
    Rational vert = 0;
    for (int s = 0; s < 3; ++s) vert += calc.integrate(j.xi_derivs[s] * j.xi_derivs[s]);
    r.vertical_energy = vert / f2;
    // Independent route: tangential gradient of S^7 in R^8.
    const QcModel& m = calc.model();
    Poly full, radial;
    for (std::size_t k = 0; k < m.N; ++k) {
        full.add_product(j.df[k], j.df[k]);
        radial.add_product(Poly::variable(static_cast<int>(k)), j.df[k]);
    }
    r.quotient = calc.integrate(full - radial * radial) / f2;
    return r;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Quadratic integrals of a first eigenfunction divided by int f^2.
struct Numerology {
    Rational grad2, lap2_quarter, vertical, riemannian_quotient;
};

struct SpectralReport {
    int degree = 0;
    std::vector<EigenRow> eigen_h, eigen_g;
    std::optional<Rational> lambda1, mu1;
    std::size_t lambda1_multiplicity = 0, mu1_multiplicity = 0;
    LichnerowiczResult lichnerowicz;
    std::vector<Rational> vertical_energy;        // normalized, per lambda_1 eigenfunction
    std::vector<Numerology> numerology;           // per lambda_1 eigenfunction
    std::vector<Rational> paneitz_values;         // -int P_f(grad f) per certified eigenfunction
    bool paneitz_nonnegative = false;
    bool eigenvalues_above_bound = false;
    ResidualLedger residuals{"spectral"};
    DiscrepancyRegistry registry;
};

struct SpectralOptions {
    int degree = 2;
    double tol = 1e-12;
    int degree_cap = kDefaultDegreeCap;
    std::uint64_t seed = 1;
    int sample_points = 10;
    int random_functions = 2;  // non-eigenfunctions run through the identity chain
    int random_degree = 3;
};

inline void register_discrepancies(DiscrepancyRegistry& reg, const IntegralTerms& t, const Rational& lambda) {
    {
        DiscrepancyEntry e;
        e.id = "pform_norm_constants";
        e.formula = "int |P_f|^2 = -(lambda + 8) int P_f(grad f) - 3 * 8^3 int sum_s (df(xi_s))^2";
        e.lhs_label = "int |P_f|^2";
        e.rhs_label = "stated right-hand side";
        e.lhs = t.p_norm2;
        e.rhs = -(lambda + 8) * t.p_function - 1536 * t.vert;
        e.alternative_label = "int P_f(grad f)";
        e.alternative = t.p_function;
        e.verdict = e.lhs == e.rhs ? "stated constants consistent"
                                   : "stated constants contradicted: left side and right side differ";
        reg.add(std::move(e));
    }
    {
        DiscrepancyEntry e;
        e.id = "third_display_slot_order";
        e.formula = "-(1/4) int sum_t nabla^3 f(I_t grad f, e_b, I_t e_b) versus (1/4) int sum_s nabla^3 f(I_s grad f, I_s e_a, e_a)";
        e.lhs_label = "-(1/4) int sum_t nabla^3 f(I_t grad f, e_b, I_t e_b)";
        e.rhs_label = "(1/4) int sum_s nabla^3 f(I_s grad f, I_s e_a, e_a)";
        e.lhs = -t.third_pform / 4;
        e.rhs = t.third_twisted / 4;
        e.alternative_label = "int sum_s nabla^2 f(xi_s, I_s grad f)";
        e.alternative = t.reeb_hessian;
        e.verdict = e.lhs == e.rhs ? "readings agree (the substitution e_b = I_s e_a maps one to the other)"
                                   : "readings differ";
        reg.add(std::move(e));
    }
}

/// Full spectral analysis on the sphere: spectra, Lichnerowicz chain,
/// normalized first-eigenfunction numerology, integral identities for the
/// first eigenfunction x1 and the discrepancy registry.
inline SpectralReport spectral_report(const QcModel& m, const SpectralOptions& opt = {}) {
    ScalarCalculus calc(m);
    SpectralProblem p = assemble(m, opt.degree, opt.degree_cap);
    SpectralReport rep;
    rep.degree = opt.degree;
    rep.eigen_h = solve_spectrum(calc, p, Operator::sub_laplacian, opt.tol);
    rep.eigen_g = solve_spectrum(calc, p, Operator::riemannian, opt.tol);
    if (const EigenRow* r = first_positive(rep.eigen_h); r && r->certified) {
        rep.lambda1 = r->exact;
        rep.lambda1_multiplicity = r->multiplicity;
    }
    if (const EigenRow* r = first_positive(rep.eigen_g); r && r->certified) {
        rep.mu1 = r->exact;
        rep.mu1_multiplicity = r->multiplicity;
    }
    rep.lichnerowicz = lichnerowicz_k0(m, sample_rational_points(opt.seed, opt.sample_points));

    ResidualLedger& L = rep.residuals;
    const std::size_t n = p.basis.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            L.record("stiffness_cross_assembly", "stiffness_h + stiffness_v = stiffness of the tangential gradient",
                     p.stiffness_h(i, j) + p.stiffness_v(i, j), p.stiffness_full(i, j));
    for (int a = 0; a < 8; ++a) {
        Poly x = Poly::variable(a);
        L.record("coordinate_eigenfunction", "Delta x_a = 4 x_a (coefficient l1 norm of Delta x_a - 4 x_a)",
                 l1_norm([&] {
                     PolyMat t(1);
                     t.e[0] = apply_operator(calc, Operator::sub_laplacian, x) - x * Rational(4);
                     return t;
                 }()),
                 0);
    }

    // Certified eigenfunctions: Paneitz sign and the bound contract.
    std::vector<Poly> eig;
    bool above = true;
    for (const auto& r : rep.eigen_h) {
        if (!r.certified || !r.exact || *r.exact == 0) continue;
        if (*r.exact < rep.lichnerowicz.bound) above = false;
        for (const auto& f : r.eigenfunctions) eig.push_back(f);
    }
    rep.paneitz_values.resize(eig.size());
    parallel_for(eig.size(), [&](std::size_t i) { rep.paneitz_values[i] = *calc.p_form(calc.jet(eig[i])).p_integral; });
    rep.paneitz_nonnegative = !eig.empty();
    for (const auto& v : rep.paneitz_values)
        if (v < 0) rep.paneitz_nonnegative = false;
    rep.eigenvalues_above_bound = above && rep.lambda1.has_value();

    for (const auto& v : rep.paneitz_values)
        L.record("eigenfunction_paneitz_nonnegative", "min(-int P_f(grad f), 0) = 0 for every certified eigenfunction",
                 std::min<Rational>(v, 0), 0);
    for (const auto& r : rep.eigen_h)
        if (r.certified && r.exact && *r.exact > 0)
            L.record("eigenvalue_above_lichnerowicz_bound", "min(lambda - k0/3, 0) = 0 for every certified eigenvalue",
                     std::min<Rational>(*r.exact - rep.lichnerowicz.bound, 0), 0);

    // Normalized first eigenfunctions: quotients by int f^2 stand for int f^2 = 1.
    if (rep.lambda1) {
        const EigenRow* r = first_positive(rep.eigen_h);
        rep.numerology.resize(r->eigenfunctions.size());
        parallel_for(r->eigenfunctions.size(), [&](std::size_t i) {
            const Poly& f = r->eigenfunctions[i];
            ScalarFieldJet j = calc.jet(f);
            Numerology& nu = rep.numerology[i];
            Rational f2 = calc.integrate(j.f * j.f);
            nu.grad2 = calc.integrate(ScalarCalculus::dot(j.df, j.grad_h)) / f2;
            nu.lap2_quarter = calc.integrate(j.sublap * j.sublap) / (4 * f2);
            RiemannianComparison rc = riemannian_comparison(calc, f, *rep.lambda1);
            nu.vertical = rc.vertical_energy;
            nu.riemannian_quotient = rc.quotient;
        });
        for (const auto& nu : rep.numerology) {
            rep.vertical_energy.push_back(nu.vertical);
            L.record("normalized_gradient_energy", "int |grad f|^2 = 4 for int f^2 = 1", nu.grad2, 4);
            L.record("normalized_laplacian_energy", "(1/4) int (Delta f)^2 = int |grad f|^2", nu.lap2_quarter, nu.grad2);
            L.record("normalized_vertical_energy", "int sum_s (df(xi_s))^2 = 3 for int f^2 = 1", nu.vertical, 3);
            L.record("riemannian_quotient", "int |grad_g f|^2 = 7 for int f^2 = 1", nu.riemannian_quotient, 7);
            L.record("riemannian_quotient_split", "Riemannian quotient = lambda + vertical energy",
                     nu.riemannian_quotient, *rep.lambda1 + nu.vertical);
        }
    }

    // Identity chain and registry for the first eigenfunction x1.
    const Poly x1 = Poly::variable(0);
    const Rational lam = rep.lambda1.value_or(Rational(4));
    IntegralTerms t = integral_terms(calc, x1);
    L.absorb(integral_identity_suite(m, t, lam));
    if (opt.random_functions > 0) {
        auto fs = random_functions(m, opt.seed, opt.random_functions, opt.random_degree);
        std::vector<ResidualLedger> ls(fs.size());
        parallel_for(fs.size(), [&](std::size_t i) { ls[i] = integral_identity_suite(m, integral_terms(calc, fs[i])); });
        for (const auto& l : ls) L.absorb(l);
    }
    ExtremalResult ex = extremal_check(calc, x1, lam, rep.lichnerowicz.k0);
    L.record("extremal_partm1_symmetric_vanishes", "(nabla^2 f)_[-1][s] = 0 as a polynomial form",
             ex.partm1_sym_vanishes ? 0 : 1, 0);
    L.record("extremal_pfunction_integral", "int P_f(grad f) = 0", ex.p_function, 0);
    L.record("extremal_hessian_trace_consistent",
             "nabla^2 f(X,Y) + (lambda/4) f g(X,Y) + sum_s df(xi_s) omega_s(X,Y) = 0 (coefficient l1 norm)",
             ex.trace_consistent_residual, 0);
    L.record("extremal_hessian_k0_coefficient",
             "nabla^2 f(X,Y) + (k0/3) f g(X,Y) + sum_s df(xi_s) omega_s(X,Y) = 0 (coefficient l1 norm)",
             ex.k0_residual, 0, false);
    rep.registry.add(ex.entry);
    register_discrepancies(rep.registry, t, lam);
    return rep;
}

}  // namespace qc7
