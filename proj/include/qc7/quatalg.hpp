#pragma once

// Pointwise quaternionic linear algebra on a 4n-dimensional space with an
// orthonormal frame. Bilinear forms are matrices P with Psi(X, Y) = X^T P Y;
// endomorphisms act on column vectors.

#include <array>
#include <string>
#include <vector>

#include "qc7/errors.hpp"
#include "qc7/linalg.hpp"

namespace qc7 {

struct QuatTriple {
    int n = 1;
    std::array<ExactMatrix, 3> I;
    ExactMatrix g;

    std::size_t size() const { return static_cast<std::size_t>(4 * n); }

    /// Left multiplication by i, j, k on each quaternionic coordinate
    /// (1, i, j, k ordering), block diagonal.
    static QuatTriple standard(int n = 1) {
        if (n < 1) throw dimension_error("quaternionic dimension must be positive");
        QuatTriple t;
        t.n = n;
        const std::size_t d = static_cast<std::size_t>(4 * n);
        for (auto& m : t.I) m = ExactMatrix(d, d);
        t.g = ExactMatrix::identity(d);
        // Images of (1, i, j, k) under left multiplication, as (target, sign).
        static constexpr int table[3][4][2] = {
            {{1, 1}, {0, -1}, {3, 1}, {2, -1}},  // i: 1->i, i->-1, j->k, k->-j
            {{2, 1}, {3, -1}, {0, -1}, {1, 1}},  // j: 1->j, i->-k, j->-1, k->i
            {{3, 1}, {2, 1}, {1, -1}, {0, -1}},  // k: 1->k, i->j, j->-i, k->-1
        };
        for (int s = 0; s < 3; ++s)
            for (int b = 0; b < n; ++b)
                for (int col = 0; col < 4; ++col) {
                    auto row = static_cast<std::size_t>(4 * b + table[s][col][0]);
                    t.I[s](row, static_cast<std::size_t>(4 * b + col)) = table[s][col][1];
                }
        return t;
    }
};

enum class SymmetryTag { symmetric, antisymmetric, general };

inline SymmetryTag symmetry_of(const ExactMatrix& m) {
    if (m.is_symmetric()) return SymmetryTag::symmetric;
    if ((m + m.transpose()).is_zero()) return SymmetryTag::antisymmetric;
    return SymmetryTag::general;
}

struct BilinearForm {
    ExactMatrix entries;
    SymmetryTag tag = SymmetryTag::general;

    BilinearForm() = default;
    explicit BilinearForm(ExactMatrix m) : entries(std::move(m)), tag(symmetry_of(entries)) {}
    bool tag_consistent() const { return symmetry_of(entries) == tag || tag == SymmetryTag::general; }
};

struct ValidationEntry {
    std::string name;
    bool pass = false;
};

namespace detail {
inline void require_form_size(const QuatTriple& t, const ExactMatrix& m) {
    if (m.rows() != t.size() || m.cols() != t.size())
        throw dimension_error("form size " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                              " does not match 4n = " + std::to_string(t.size()));
}
}  // namespace detail

/// Checks the quaternion relations and hermitian compatibility exactly.
inline std::vector<ValidationEntry> validate_triple(const QuatTriple& t) {
    const std::size_t d = t.size();
    for (const auto& m : t.I)
        if (m.rows() != d || m.cols() != d) throw dimension_error("structure matrix is not 4n x 4n");
    if (t.g.rows() != d || t.g.cols() != d) throw dimension_error("metric is not 4n x 4n");
    const ExactMatrix id = ExactMatrix::identity(d);
    const ExactMatrix minus_id = Rational(-1) * id;
    std::vector<ValidationEntry> out;
    for (int s = 0; s < 3; ++s)
        out.push_back({"I" + std::to_string(s + 1) + "^2 = -Id", t.I[s] * t.I[s] == minus_id});
    out.push_back({"I1 I2 = I3", t.I[0] * t.I[1] == t.I[2]});
    out.push_back({"I1 I2 = -I2 I1", t.I[0] * t.I[1] == Rational(-1) * (t.I[1] * t.I[0])});
    out.push_back({"I1 I2 I3 = -Id", t.I[0] * t.I[1] * t.I[2] == minus_id});
    for (int s = 0; s < 3; ++s)
        out.push_back({"g(I" + std::to_string(s + 1) + "X, I" + std::to_string(s + 1) + "Y) = g(X, Y)",
                       t.I[s].transpose() * t.g * t.I[s] == t.g});
    return out;
}

inline bool all_pass(const std::vector<ValidationEntry>& entries) {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

/// Psi(I_s X, I_s Y) as a matrix.
inline ExactMatrix conjugate_by(const QuatTriple& t, int s, const ExactMatrix& psi) {
    return t.I[static_cast<std::size_t>(s)].transpose() * psi * t.I[static_cast<std::size_t>(s)];
}

/// Casimir operator: (Upsilon Psi)(X, Y) = sum_s Psi(I_s X, I_s Y).
inline ExactMatrix casimir_apply(const QuatTriple& t, const ExactMatrix& psi) {
    detail::require_form_size(t, psi);
    return conjugate_by(t, 0, psi) + conjugate_by(t, 1, psi) + conjugate_by(t, 2, psi);
}

/// omega_s(X, Y) = g(I_s X, Y).
inline ExactMatrix fundamental_form(const QuatTriple& t, int s) {
    return t.I[static_cast<std::size_t>(s)].transpose() * t.g;
}

inline ExactMatrix symmetric_part(const ExactMatrix& m) { return Rational(1, 2) * (m + m.transpose()); }
inline ExactMatrix antisymmetric_part(const ExactMatrix& m) { return Rational(1, 2) * (m - m.transpose()); }

/// Frobenius pairing in the orthonormal frame.
inline Rational frobenius(const ExactMatrix& a, const ExactMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw dimension_error("frobenius: shape mismatch");
    Rational s = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
    return s;
}
inline Rational norm2(const ExactMatrix& a) { return frobenius(a, a); }

struct InvariantDecomposition {
    ExactMatrix part3, partm1;
    /// Joint eigenspaces of Psi -> Psi(I_s., I_s.) with sign patterns
    /// (+++), (+--), (-+-), (--+) in that order.
    std::array<ExactMatrix, 4> parts_pm;
    ExactMatrix sym_m1, antisym_m1;
};

inline constexpr std::array<std::array<int, 3>, 4> kSignPatterns = {{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}};

inline InvariantDecomposition decompose(const QuatTriple& t, const ExactMatrix& psi) {
    detail::require_form_size(t, psi);
    std::array<ExactMatrix, 3> conj = {conjugate_by(t, 0, psi), conjugate_by(t, 1, psi), conjugate_by(t, 2, psi)};
    InvariantDecomposition d;
    for (std::size_t k = 0; k < 4; ++k) {
        ExactMatrix acc = psi;
        for (std::size_t s = 0; s < 3; ++s) acc = kSignPatterns[k][s] > 0 ? acc + conj[s] : acc - conj[s];
        d.parts_pm[k] = Rational(1, 4) * acc;
    }
    ExactMatrix ups = conj[0] + conj[1] + conj[2];
    d.part3 = Rational(1, 4) * (psi + ups);
    d.partm1 = Rational(1, 4) * (Rational(3) * psi - ups);
    d.sym_m1 = symmetric_part(d.partm1);
    d.antisym_m1 = antisymmetric_part(d.partm1);
    return d;
}

/// Matrix of a linear map on bilinear forms acting on row-major vec(Psi).
template <class Map>
ExactMatrix operator_matrix(std::size_t d, Map&& map) {
    ExactMatrix out(d * d, d * d);
    for (std::size_t col = 0; col < d * d; ++col) {
        ExactMatrix unit(d, d);
        unit(col / d, col % d) = 1;
        ExactMatrix img = map(unit);
        for (std::size_t r = 0; r < d * d; ++r) out(r, col) = img(r / d, r % d);
    }
    return out;
}

/// Dimensions of the [3] and [-1] subspaces of all bilinear forms, computed
/// as projector ranks. Only audited for n = 1.
inline std::pair<std::size_t, std::size_t> component_dims(const QuatTriple& t) {
    if (t.n != 1) throw unsupported_dimension("component_dims is only available for n = 1");
    ExactMatrix p3 = operator_matrix(t.size(), [&](const ExactMatrix& m) { return decompose(t, m).part3; });
    ExactMatrix pm1 = operator_matrix(t.size(), [&](const ExactMatrix& m) { return decompose(t, m).partm1; });
    return {rank(p3), rank(pm1)};
}

struct NormInequalities {
    Rational minus1_lhs, minus1_rhs;  // |Psi_[-1]|^2 >= (1/4n) sum_s <Psi, omega_s>^2
    Rational three_lhs, three_rhs;    // |Psi_[3]|^2 >= (1/4n) (tr Psi)^2
    bool hold() const { return minus1_lhs >= minus1_rhs && three_lhs >= three_rhs; }
};

inline NormInequalities norm_inequalities(const QuatTriple& t, const ExactMatrix& psi) {
    detail::require_form_size(t, psi);
    auto d = decompose(t, psi);
    const Rational inv = Rational(1, 4 * t.n);
    NormInequalities r;
    r.minus1_lhs = norm2(d.partm1);
    r.minus1_rhs = 0;
    for (int s = 0; s < 3; ++s) {
        Rational pairing = frobenius(psi, fundamental_form(t, s));
        r.minus1_rhs += pairing * pairing;
    }
    r.minus1_rhs *= inv;
    r.three_lhs = norm2(d.part3);
    Rational tr = psi.trace();
    r.three_rhs = inv * tr * tr;
    return r;
}

}  // namespace qc7
