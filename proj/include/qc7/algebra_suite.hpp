#pragma once

// Exact property suite for the pointwise quaternionic algebra on random
// rational bilinear forms.

#include <algorithm>

#include "qc7/ledger.hpp"
#include "qc7/quatalg.hpp"
#include "qc7/sampling.hpp"

namespace qc7 {

inline ExactMatrix random_form(RationalRng& rng, std::size_t d, bool symmetric, int height = 5) {
    ExactMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = symmetric ? i : 0; j < d; ++j) {
            m(i, j) = rng.small_rational(height);
            if (symmetric) m(j, i) = m(i, j);
        }
    return m;
}

inline Rational l1_norm(const ExactMatrix& a) {
    Rational acc = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) acc += abs(a(i, j));
    return acc;
}

/// Projector, Casimir, dimension and norm-inequality identities on `count`
/// random forms (alternating general and symmetric) for the standard n = 1
/// triple. Inequalities are recorded as min(lhs - rhs, 0) = 0.
inline ResidualLedger algebra_suite(std::uint64_t seed, int count, const QuatTriple& t = QuatTriple::standard(1)) {
    if (count < 1) throw input_error("algebra suite needs at least one form");
    ResidualLedger L("quatalg");
    for (const auto& e : validate_triple(t))
        L.record("quaternion_relation: " + e.name, e.name + " (1 if violated)", e.pass ? 0 : 1, 0);
    auto dims = component_dims(t);
    L.record("component_dim_3", "dim of the [3] component of bilinear forms = 4", static_cast<long>(dims.first), 4);
    L.record("component_dim_m1", "dim of the [-1] component of bilinear forms = 12", static_cast<long>(dims.second), 12);

    RationalRng rng(seed ^ 0xa19eb7aULL);
    const std::size_t d = t.size();
    const Rational inv = Rational(1, 4 * t.n);
    const ExactMatrix id = ExactMatrix::identity(d);
    for (int k = 0; k < count; ++k) {
        ExactMatrix psi = random_form(rng, d, k % 2 == 1);
        InvariantDecomposition dec = decompose(t, psi);
        InvariantDecomposition d3 = decompose(t, dec.part3), dm1 = decompose(t, dec.partm1);
        L.record("projector_idempotent_3", "([3] o [3]) Psi = Psi_[3] (l1 norm of difference)",
                 l1_norm(d3.part3 - dec.part3), 0);
        L.record("projector_idempotent_m1", "([-1] o [-1]) Psi = Psi_[-1] (l1 norm of difference)",
                 l1_norm(dm1.partm1 - dec.partm1), 0);
        L.record("projector_orthogonal", "[3] Psi_[-1] = 0 and [-1] Psi_[3] = 0 (l1 norm)",
                 l1_norm(dm1.part3) + l1_norm(d3.partm1), 0);
        L.record("projector_reconstruction", "Psi_[3] + Psi_[-1] = Psi (l1 norm of difference)",
                 l1_norm(dec.part3 + dec.partm1 - psi), 0);
        ExactMatrix sum_pm = dec.parts_pm[0] + dec.parts_pm[1] + dec.parts_pm[2] + dec.parts_pm[3];
        L.record("sign_pattern_reconstruction", "sum of the four joint sign-pattern parts = Psi (l1 norm)",
                 l1_norm(sum_pm - psi), 0);
        ExactMatrix ups = casimir_apply(t, psi);
        ExactMatrix ups2 = casimir_apply(t, ups);
        L.record("casimir_minimal_polynomial", "(Ups - 3)(Ups + 1) Psi = 0 (l1 norm)",
                 l1_norm(ups2 - Rational(2) * ups - Rational(3) * psi), 0);
        L.record("casimir_eigen_3", "Ups Psi_[3] = 3 Psi_[3] (l1 norm)",
                 l1_norm(casimir_apply(t, dec.part3) - Rational(3) * dec.part3), 0);
        L.record("casimir_eigen_m1", "Ups Psi_[-1] = -Psi_[-1] (l1 norm)",
                 l1_norm(casimir_apply(t, dec.partm1) + dec.partm1), 0);
        L.record("pythagoras", "|Psi|^2 = |Psi_[3]|^2 + |Psi_[-1]|^2", norm2(psi), norm2(dec.part3) + norm2(dec.partm1));
        NormInequalities ni = norm_inequalities(t, psi);
        L.record("norm_inequality_m1", "min(|Psi_[-1]|^2 - (1/4n) sum_s <Psi, omega_s>^2, 0) = 0",
                 std::min<Rational>(ni.minus1_lhs - ni.minus1_rhs, 0), 0);
        L.record("norm_inequality_3", "min(|Psi_[3]|^2 - (1/4n) (tr Psi)^2, 0) = 0",
                 std::min<Rational>(ni.three_lhs - ni.three_rhs, 0), 0);
        // For n = 1 the symmetric [3] forms are the multiples of g, so the
        // trace-free symmetric [3] part vanishes identically.
        ExactMatrix sym3 = decompose(t, symmetric_part(psi)).part3;
        L.record("b0_vanishes_n1", "(Psi_sym)_[3] - (tr Psi / 4n) g = 0 for n = 1 (l1 norm)",
                 l1_norm(sym3 - inv * psi.trace() * id), 0);
    }
    return L;
}

}  // namespace qc7
