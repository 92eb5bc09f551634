#pragma once

// The two seven-dimensional qc models with polynomial coefficient fields:
// the unit sphere S^7 in R^8 = H^2 and the quaternionic Heisenberg group on
// R^7 = H x Im H. Tensors are stored in ambient coordinates; on the sphere
// they are evaluated only at points of S^7 and contracted with tangent
// vectors. Connection coefficients follow nabla_{d_i} d_j = Gamma^k_{ij} d_k,
// so nabla_A C = D_A C + Gamma(A, C).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qc7/errors.hpp"
#include "qc7/ledger.hpp"
#include "qc7/linalg.hpp"
#include "qc7/parallel.hpp"
#include "qc7/poly.hpp"
#include "qc7/quatalg.hpp"
#include "qc7/sampling.hpp"

namespace qc7 {

using PolyVec = std::vector<Poly>;
using RVec = std::vector<Rational>;

struct PolyMat {
    std::size_t n = 0;
    std::vector<Poly> e;

    PolyMat() = default;
    explicit PolyMat(std::size_t size) : n(size), e(size * size) {}
    Poly& operator()(std::size_t i, std::size_t j) { return e[i * n + j]; }
    const Poly& operator()(std::size_t i, std::size_t j) const { return e[i * n + j]; }
};

/// Index order (k, i, j) for Gamma^k_{ij}.
struct PolyTensor3 {
    std::size_t n = 0;
    std::vector<Poly> e;

    PolyTensor3() = default;
    explicit PolyTensor3(std::size_t size) : n(size), e(size * size * size) {}
    Poly& operator()(std::size_t k, std::size_t i, std::size_t j) { return e[(k * n + i) * n + j]; }
    const Poly& operator()(std::size_t k, std::size_t i, std::size_t j) const { return e[(k * n + i) * n + j]; }
};

enum class ModelKind { sphere7, heisenberg7 };
enum class ConnectionKind { biquard, levi_civita };

inline std::string to_string(ModelKind k) { return k == ModelKind::sphere7 ? "sphere7" : "heisenberg7"; }

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "sphere7" || s == "sphere") return ModelKind::sphere7;
    if (s == "heisenberg7" || s == "heisenberg") return ModelKind::heisenberg7;
    throw config_error("unknown model '" + s + "' (expected sphere7 or heisenberg7)");
}

struct ConventionCandidate {
    int xi_sign = 1;
    int i_sign = 1;
    bool passed = false;
    std::vector<std::string> failed;
};

/// Sign choices of the model: xi_s = xi_sign * (i_s p), I_s = i_sign * (i_s .)
/// on H, quaternion multiplication from the left, coordinates ordered
/// (1, i, j, k) in each quaternionic factor.
struct ConventionLedger {
    std::string multiplication = "left";
    std::string coordinate_order = "(1,i,j,k) per quaternionic coordinate";
    int xi_sign = 1;
    int i_sign = 1;
    bool forced = false;
    std::vector<ConventionCandidate> candidates;
};

struct QcModel {
    ModelKind kind = ModelKind::sphere7;
    std::size_t N = 8;  // ambient coordinate count
    int n = 1;          // quaternionic dimension of H
    std::array<PolyVec, 3> xi, eta;
    std::array<PolyMat, 3> I, omega, deta;
    PolyMat proj_h, metric, metric_inv;
    std::vector<PolyMat> dmetric;  // d_l g_ij
    PolyTensor3 gamma_lc, gamma;
    std::vector<PolyTensor3> dgamma_lc, dgamma;  // d_l Gamma^k_ij
    std::vector<PolyVec> frame_fields;           // global frame (T_1..T_4, xi_1..xi_3); Heisenberg only
    Rational S = 0;
    ConventionLedger convention;
    bool validated = false;
    std::vector<std::string> failures;

    Poly reduce(const Poly& p) const { return kind == ModelKind::sphere7 ? reduce_mod_sphere(p) : p; }
    const PolyTensor3& connection(ConnectionKind k) const { return k == ConnectionKind::biquard ? gamma : gamma_lc; }
    const std::vector<PolyTensor3>& connection_derivatives(ConnectionKind k) const {
        return k == ConnectionKind::biquard ? dgamma : dgamma_lc;
    }
};

/// Seed-deterministic evaluation points: rational points of S^7, or small
/// rational points of R^7 (last coordinate zero) for the Heisenberg model.
inline std::vector<RationalPoint> model_points(const QcModel& m, std::uint64_t seed, int count) {
    if (m.kind == ModelKind::sphere7) return sample_rational_points(seed, count);
    if (count < 1) throw input_error("point count must be at least 1");
    RationalRng rng(seed ^ 0x48e15e4bULL);
    std::vector<RationalPoint> pts(static_cast<std::size_t>(count));
    for (auto& p : pts)
        for (std::size_t i = 0; i < 7; ++i) p[i] = rng.small_rational(4);
    return pts;
}

namespace detail {

inline PolyVec mat_vec(const PolyMat& m, const PolyVec& v) {
    PolyVec out(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) out[i].add_product(m(i, j), v[j]);
    return out;
}

inline PolyMat mat_mul(const PolyMat& a, const PolyMat& b) {
    PolyMat out(a.n);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t k = 0; k < a.n; ++k) {
            if (a(i, k).is_zero()) continue;
            for (std::size_t j = 0; j < a.n; ++j) out(i, j).add_product(a(i, k), b(k, j));
        }
    return out;
}

inline PolyMat transpose(const PolyMat& a) {
    PolyMat out(a.n);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.n; ++j) out(i, j) = a(j, i);
    return out;
}

inline PolyMat constant_mat(const ExactMatrix& m) {
    PolyMat out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Poly(m(i, j));
    return out;
}

inline std::vector<PolyTensor3> derivative_tables(const PolyTensor3& t, std::size_t nvars) {
    std::vector<PolyTensor3> out(nvars, PolyTensor3(t.n));
    for (std::size_t l = 0; l < nvars; ++l)
        for (std::size_t idx = 0; idx < t.e.size(); ++idx) out[l].e[idx] = t.e[idx].derivative(static_cast<int>(l));
    return out;
}

/// Contorsion of a torsion 3-form T_{ijk} = g(T(d_i, d_j), d_k): returns
/// A^k_{ij} = g^{kl} K_{ijl} with K(X,Y,Z) = (T(X,Y,Z) - T(Y,Z,X) + T(Z,X,Y)) / 2.
inline PolyTensor3 contorsion(const PolyTensor3& tform, const PolyMat& ginv) {
    const std::size_t N = tform.n;
    PolyTensor3 K(N), A(N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k)
                K(i, j, k) = Rational(1, 2) * (tform(i, j, k) - tform(j, k, i) + tform(k, i, j));
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t l = 0; l < N; ++l) A(k, i, j).add_product(ginv(k, l), K(i, j, l));
    return A;
}

inline std::string idx(std::size_t v) { return std::to_string(v + 1); }

}  // namespace detail

/// Evaluated geometry at one point: values of every coefficient field, their
/// first derivatives, and the rational qc-adapted frame
/// F = (h, I1 h, I2 h, I3 h, xi_1, xi_2, xi_3) with g(h, h) = c.
class PointGeometry {
public:
    PointGeometry(const QcModel& m, const RationalPoint& p, ConnectionKind kind = ConnectionKind::biquard)
        : m_(&m), p_(p), N_(m.N) {
        const std::size_t N = N_;
        G_.resize(N * N);
        dG_.resize(N * N * N);
        for (std::size_t i = 0; i < N * N; ++i) G_[i] = m.metric.e[i].evaluate(p);
        for (std::size_t l = 0; l < N; ++l)
            for (std::size_t i = 0; i < N * N; ++i) dG_[l * N * N + i] = m.dmetric[l].e[i].evaluate(p);
        const PolyTensor3& gam = m.connection(kind);
        const auto& dgam = m.connection_derivatives(kind);
        Gam_.resize(N * N * N);
        dGam_.resize(N * N * N * N);
        // Before the connection is attached (structure validation) the tables are empty.
        if (!gam.e.empty()) {
            for (std::size_t i = 0; i < Gam_.size(); ++i) Gam_[i] = gam.e[i].evaluate(p);
            for (std::size_t l = 0; l < N; ++l)
                for (std::size_t i = 0; i < Gam_.size(); ++i) dGam_[l * Gam_.size() + i] = dgam[l].e[i].evaluate(p);
        }
        for (int s = 0; s < 3; ++s) {
            xi_[s] = eval(m.xi[s]);
            eta_[s] = eval(m.eta[s]);
            I_[s] = eval(m.I[s]);
        }
        Pi_ = eval(m.proj_h);
        build_frame();
    }

    const QcModel& model() const { return *m_; }
    const RationalPoint& point() const { return p_; }
    std::size_t dim() const { return N_; }
    const std::array<RVec, 7>& frame() const { return F_; }
    const RVec& frame_vector(std::size_t A) const { return F_[A]; }
    const Rational& c() const { return c_; }
    /// g(F_A, F_A) as computed.
    const Rational& frame_norm2(std::size_t A) const { return fnorm_[A]; }
    const RVec& xi(int s) const { return xi_[static_cast<std::size_t>(s)]; }
    const RVec& eta(int s) const { return eta_[static_cast<std::size_t>(s)]; }

    Rational eval(const Poly& q) const { return q.evaluate(p_); }
    RVec eval(const PolyVec& v) const {
        RVec out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].evaluate(p_);
        return out;
    }
    RVec eval(const PolyMat& m) const {
        RVec out(m.e.size());
        for (std::size_t i = 0; i < m.e.size(); ++i) out[i] = m.e[i].evaluate(p_);
        return out;
    }

    /// Directional derivative D_dir of a polynomial field.
    Rational derivative(const Poly& q, const RVec& dir) const {
        Rational acc = 0;
        for (std::size_t l = 0; l < N_; ++l)
            if (dir[l] != 0) acc += dir[l] * q.derivative(static_cast<int>(l)).evaluate(p_);
        return acc;
    }
    RVec derivative(const PolyVec& v, const RVec& dir) const {
        RVec out(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) out[k] = derivative(v[k], dir);
        return out;
    }
    /// (D_dir M) v for a polynomial matrix field M.
    RVec derivative_apply(const PolyMat& m, const RVec& dir, const RVec& v) const {
        RVec out(N_);
        for (std::size_t i = 0; i < N_; ++i)
            for (std::size_t j = 0; j < N_; ++j)
                if (v[j] != 0) out[i] += derivative(m(i, j), dir) * v[j];
        return out;
    }

    RVec apply(const RVec& mat, const RVec& v) const {
        RVec out(N_);
        for (std::size_t i = 0; i < N_; ++i)
            for (std::size_t j = 0; j < N_; ++j) out[i] += mat[i * N_ + j] * v[j];
        return out;
    }
    RVec apply_I(int s, const RVec& v) const { return apply(I_[static_cast<std::size_t>(s)], v); }
    RVec apply_proj(const RVec& v) const { return apply(Pi_, v); }

    Rational metric(const RVec& u, const RVec& v) const {
        Rational acc = 0;
        for (std::size_t i = 0; i < N_; ++i) {
            if (u[i] == 0) continue;
            Rational row = 0;
            for (std::size_t j = 0; j < N_; ++j) row += G_[i * N_ + j] * v[j];
            acc += u[i] * row;
        }
        return acc;
    }
    /// (D_dir g)(u, v) for constant u, v.
    Rational metric_derivative(const RVec& dir, const RVec& u, const RVec& v) const {
        Rational acc = 0;
        for (std::size_t l = 0; l < N_; ++l) {
            if (dir[l] == 0) continue;
            for (std::size_t i = 0; i < N_; ++i)
                for (std::size_t j = 0; j < N_; ++j) acc += dir[l] * dG_[(l * N_ + i) * N_ + j] * u[i] * v[j];
        }
        return acc;
    }

    const Rational& gamma_value(std::size_t k, std::size_t i, std::size_t j) const { return Gam_[(k * N_ + i) * N_ + j]; }
    const Rational& dgamma_value(std::size_t l, std::size_t k, std::size_t i, std::size_t j) const {
        return dGam_[((l * N_ + k) * N_ + i) * N_ + j];
    }

    RVec gamma(const RVec& u, const RVec& v) const {
        RVec out(N_);
        for (std::size_t i = 0; i < N_; ++i) {
            if (u[i] == 0) continue;
            for (std::size_t j = 0; j < N_; ++j) {
                if (v[j] == 0) continue;
                Rational uv = u[i] * v[j];
                for (std::size_t k = 0; k < N_; ++k) out[k] += gamma_value(k, i, j) * uv;
            }
        }
        return out;
    }
    /// sum_l dir^l d_l Gamma(u, v).
    RVec dgamma(const RVec& dir, const RVec& u, const RVec& v) const {
        RVec out(N_);
        for (std::size_t l = 0; l < N_; ++l) {
            if (dir[l] == 0) continue;
            for (std::size_t i = 0; i < N_; ++i) {
                if (u[i] == 0) continue;
                for (std::size_t j = 0; j < N_; ++j) {
                    if (v[j] == 0) continue;
                    Rational w = dir[l] * u[i] * v[j];
                    for (std::size_t k = 0; k < N_; ++k) out[k] += dgamma_value(l, k, i, j) * w;
                }
            }
        }
        return out;
    }
    RVec torsion(const RVec& u, const RVec& v) const {
        RVec a = gamma(u, v), b = gamma(v, u);
        for (std::size_t k = 0; k < N_; ++k) a[k] -= b[k];
        return a;
    }
    /// Covariant derivative of the polynomial vector field v along dir.
    RVec covariant(const PolyVec& v, const RVec& dir) const {
        RVec out = derivative(v, dir), g = gamma(dir, eval(v));
        for (std::size_t k = 0; k < N_; ++k) out[k] += g[k];
        return out;
    }

    /// Frame coefficients of a tangent vector: g(v, F_A) / g(F_A, F_A).
    RVec coeffs(const RVec& v) const {
        RVec out(7);
        for (std::size_t A = 0; A < 7; ++A) out[A] = metric(v, F_[A]) / fnorm_[A];
        return out;
    }
    RVec ambient(const RVec& coeff) const {
        RVec out(N_);
        for (std::size_t A = 0; A < 7; ++A)
            if (coeff[A] != 0)
                for (std::size_t k = 0; k < N_; ++k) out[k] += coeff[A] * F_[A][k];
        return out;
    }

private:
    void build_frame() {
        RVec h;
        for (std::size_t a = 0; a < N_ && h.empty(); ++a) {
            RVec e(N_);
            e[a] = 1;
            RVec v = apply(Pi_, e);
            for (const auto& x : v)
                if (x != 0) {
                    h = v;
                    break;
                }
        }
        if (h.empty()) throw validation_error("horizontal projector vanishes at the evaluation point");
        F_[0] = h;
        for (int s = 0; s < 3; ++s) {
            F_[1 + s] = apply_I(s, h);
            F_[4 + s] = xi_[s];
        }
        for (std::size_t A = 0; A < 7; ++A) {
            fnorm_[A] = metric(F_[A], F_[A]);
            if (fnorm_[A] == 0) throw validation_error("degenerate frame vector at the evaluation point");
        }
        c_ = fnorm_[0];
    }

    const QcModel* m_;
    RationalPoint p_;
    std::size_t N_;
    RVec G_, dG_, Gam_, dGam_;
    std::array<RVec, 3> xi_, eta_, I_;
    RVec Pi_;
    std::array<RVec, 7> F_;
    std::array<Rational, 7> fnorm_;
    Rational c_;
};

/// Pointwise algebra on frame coefficients: metric diag(c, c, c, c, 1, 1, 1)
/// and the structure endomorphisms J_s acting on coefficient vectors.
struct FrameAlgebra {
    Rational c = 1;
    std::array<ExactMatrix, 3> J;

    static FrameAlgebra from(const PointGeometry& geo) {
        FrameAlgebra alg;
        alg.c = geo.c();
        for (int s = 0; s < 3; ++s) {
            alg.J[s] = ExactMatrix(7, 7);
            for (std::size_t a = 0; a < 4; ++a) {
                RVec col = geo.coeffs(geo.apply_I(s, geo.frame_vector(a)));
                for (std::size_t b = 0; b < 7; ++b) alg.J[s](b, a) = col[b];
            }
        }
        return alg;
    }

    Rational norm2(std::size_t A) const { return A < 4 ? c : Rational(1); }
    Rational g(const RVec& u, const RVec& v) const {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A) acc += norm2(A) * u[A] * v[A];
        return acc;
    }
    RVec apply(int s, const RVec& u) const {
        RVec out(7);
        const ExactMatrix& m = J[static_cast<std::size_t>(s)];
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = 0; j < 7; ++j) out[i] += m(i, j) * u[j];
        return out;
    }
    Rational omega(int s, const RVec& u, const RVec& v) const { return g(apply(s, u), v); }

    /// The triple on H in the orthonormal basis F_a / sqrt(c).
    QuatTriple horizontal_triple() const {
        QuatTriple t;
        t.n = 1;
        t.g = ExactMatrix::identity(4);
        for (std::size_t s = 0; s < 3; ++s) {
            t.I[s] = ExactMatrix(4, 4);
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) t.I[s](a, b) = J[s](a, b);
        }
        return t;
    }

    static RVec unit(std::size_t A) {
        RVec e(7);
        e[A] = 1;
        return e;
    }
};

inline RVec random_horizontal(RationalRng& rng) {
    RVec v(7);
    for (std::size_t a = 0; a < 4; ++a) v[a] = rng.small_rational(3);
    if (v[0] == 0 && v[1] == 0 && v[2] == 0 && v[3] == 0) v[0] = 1;
    return v;
}

/// Lowered four-tensor in the frame: R(F_A, F_B, F_C, F_D) = g(R(F_A, F_B) F_C, F_D)
/// with R(A, B) C = D_A Gamma(B, C) - D_B Gamma(A, C) + Gamma(A, Gamma(B, C)) - Gamma(B, Gamma(A, C)).
inline std::vector<Rational> frame_curvature(const PointGeometry& geo) {
    const std::size_t N = geo.dim();
    // Rc[k][l][i][j] = (R(d_l, d_i) d_j)^k
    std::vector<Rational> Rc(N * N * N * N);
    Rational t;
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t l = 0; l < N; ++l)
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j) {
                    Rational acc = geo.dgamma_value(l, k, i, j) - geo.dgamma_value(i, k, l, j);
                    for (std::size_t m = 0; m < N; ++m) {
                        acc += geo.gamma_value(k, l, m) * geo.gamma_value(m, i, j);
                        acc -= geo.gamma_value(k, i, m) * geo.gamma_value(m, l, j);
                    }
                    Rc[((k * N + l) * N + i) * N + j] = acc;
                }
    const auto& F = geo.frame();
    // Contract one slot at a time.
    std::vector<Rational> X1(7 * N * N * N);  // [A][k][i][j]
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t l = 0; l < N; ++l) {
                if (F[A][l] == 0) continue;
                for (std::size_t ij = 0; ij < N * N; ++ij)
                    X1[(A * N + k) * N * N + ij] += F[A][l] * Rc[((k * N + l) * N * N) + ij];
            }
    std::vector<Rational> X2(49 * N * N);  // [A][B][k][j]
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B)
            for (std::size_t k = 0; k < N; ++k)
                for (std::size_t i = 0; i < N; ++i) {
                    if (F[B][i] == 0) continue;
                    for (std::size_t j = 0; j < N; ++j)
                        X2[((A * 7 + B) * N + k) * N + j] += F[B][i] * X1[((A * N + k) * N + i) * N + j];
                }
    std::vector<Rational> out(2401);
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B)
            for (std::size_t C = 0; C < 7; ++C) {
                RVec v(N);
                for (std::size_t k = 0; k < N; ++k)
                    for (std::size_t j = 0; j < N; ++j)
                        if (F[C][j] != 0) v[k] += F[C][j] * X2[((A * 7 + B) * N + k) * N + j];
                for (std::size_t D = 0; D < 7; ++D) out[((A * 7 + B) * 7 + C) * 7 + D] = geo.metric(v, F[D]);
            }
    return out;
}

struct CurvatureData {
    FrameAlgebra alg;
    std::vector<Rational> R;  // lowered, frame indices
    ExactMatrix ric;          // Ric(F_A, F_B)
    Rational S = 0;           // from the trace 8n(n+2) S = R(e_b, e_a, e_a, e_b)
    Rational full_trace = 0;  // R(e_b, e_a, e_a, e_b)
    std::array<ExactMatrix, 3> rho, tau, zeta;  // on frame vectors
    ExactMatrix ric_riemannian;                 // Ricci of the extended metric, on frame vectors

    const Rational& r(std::size_t A, std::size_t B, std::size_t C, std::size_t D) const {
        return R[((A * 7 + B) * 7 + C) * 7 + D];
    }
    /// R on frame-coefficient vectors.
    Rational R4(const RVec& u, const RVec& v, const RVec& w, const RVec& z) const {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A) {
            if (u[A] == 0) continue;
            for (std::size_t B = 0; B < 7; ++B) {
                if (v[B] == 0) continue;
                for (std::size_t C = 0; C < 7; ++C) {
                    if (w[C] == 0) continue;
                    Rational uvw = u[A] * v[B] * w[C];
                    for (std::size_t D = 0; D < 7; ++D)
                        if (z[D] != 0) acc += uvw * z[D] * r(A, B, C, D);
                }
            }
        }
        return acc;
    }
    static Rational form(const ExactMatrix& m, const RVec& u, const RVec& v) {
        Rational acc = 0;
        for (std::size_t A = 0; A < 7; ++A)
            for (std::size_t B = 0; B < 7; ++B) acc += m(A, B) * u[A] * v[B];
        return acc;
    }
};

inline CurvatureData curvature_at(const QcModel& m, const RationalPoint& p) {
    PointGeometry geo(m, p, ConnectionKind::biquard);
    CurvatureData cd;
    cd.alg = FrameAlgebra::from(geo);
    cd.R = frame_curvature(geo);
    const Rational& c = cd.alg.c;
    const int n = m.n;
    cd.ric = ExactMatrix(7, 7);
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B) {
            Rational acc = 0;
            for (std::size_t b = 0; b < 4; ++b) acc += cd.r(b, A, B, b);
            cd.ric(A, B) = acc / c;
        }
    for (std::size_t a = 0; a < 4; ++a) cd.full_trace += cd.ric(a, a) / c;
    cd.S = cd.full_trace / (8 * n * (n + 2));
    for (std::size_t s = 0; s < 3; ++s) {
        cd.rho[s] = cd.tau[s] = cd.zeta[s] = ExactMatrix(7, 7);
        const ExactMatrix& J = cd.alg.J[s];
        for (std::size_t A = 0; A < 7; ++A)
            for (std::size_t B = 0; B < 7; ++B) {
                Rational rho = 0, tau = 0, zeta = 0;
                for (std::size_t a = 0; a < 4; ++a)
                    for (std::size_t b = 0; b < 4; ++b) {
                        if (J(b, a) == 0) continue;  // I_s F_a = sum_b J(b, a) F_b
                        rho += J(b, a) * cd.r(A, B, a, b);
                        tau += J(b, a) * cd.r(a, b, A, B);
                        zeta += J(b, a) * cd.r(a, A, B, b);
                    }
                Rational scale = c * 4 * n;
                cd.rho[s](A, B) = rho / scale;
                cd.tau[s](A, B) = tau / scale;
                cd.zeta[s](A, B) = zeta / scale;
            }
    }
    PointGeometry lc(m, p, ConnectionKind::levi_civita);
    std::vector<Rational> RL = frame_curvature(lc);
    cd.ric_riemannian = ExactMatrix(7, 7);
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B) {
            Rational acc = 0;
            for (std::size_t E = 0; E < 7; ++E) acc += RL[((E * 7 + A) * 7 + B) * 7 + E] / cd.alg.norm2(E);
            cd.ric_riemannian(A, B) = acc;
        }
    return cd;
}

/// Torsion pieces at a point. Endomorphisms of H are 4x4 matrices in the
/// orthonormal basis F_a / sqrt(c); bilinear forms use the same basis.
struct TorsionData {
    FrameAlgebra alg;
    std::vector<Rational> T;                 // T(F_A, F_B, F_C) = g(T(F_A, F_B), F_C)
    std::array<ExactMatrix, 3> t_xi;         // T_{xi_s} = T(xi_s, .) on H
    std::array<ExactMatrix, 3> t0_xi, b_xi;  // symmetric and skew parts of T_{xi_s}
    ExactMatrix u_end;                       // u with b_{xi_s} = I_s u
    ExactMatrix t0, u;                       // T^0(X, Y) and U(X, Y) = g(uX, Y)
    std::array<std::array<RVec, 3>, 3> vertical;  // frame coefficients of T(xi_i, xi_j)

    const Rational& t(std::size_t A, std::size_t B, std::size_t C) const { return T[(A * 7 + B) * 7 + C]; }
};

inline TorsionData torsion_at(const QcModel& m, const RationalPoint& p) {
    PointGeometry geo(m, p);
    TorsionData td;
    td.alg = FrameAlgebra::from(geo);
    td.T.resize(343);
    std::array<std::array<RVec, 7>, 7> coeff;
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B) {
            RVec tv = geo.torsion(geo.frame_vector(A), geo.frame_vector(B));
            coeff[A][B] = geo.coeffs(tv);
            for (std::size_t C = 0; C < 7; ++C) td.T[(A * 7 + B) * 7 + C] = geo.metric(tv, geo.frame_vector(C));
        }
    QuatTriple trip = td.alg.horizontal_triple();
    td.u_end = ExactMatrix(4, 4);
    for (std::size_t s = 0; s < 3; ++s) {
        td.t_xi[s] = ExactMatrix(4, 4);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) td.t_xi[s](b, a) = coeff[4 + s][a][b];
        td.t0_xi[s] = symmetric_part(td.t_xi[s]);
        td.b_xi[s] = antisymmetric_part(td.t_xi[s]);
        td.u_end = td.u_end - Rational(1, 3) * (trip.I[s] * td.b_xi[s]);
        for (std::size_t j = 0; j < 3; ++j) td.vertical[s][j] = coeff[4 + s][4 + j];
    }
    ExactMatrix sum(4, 4);
    for (std::size_t s = 0; s < 3; ++s) sum = sum + td.t0_xi[s] * trip.I[s];
    td.t0 = sum.transpose();  // form matrix of X -> g(M X, .)
    td.u = td.u_end.transpose();
    return td;
}

namespace detail {

/// Prescribed torsion 3-forms: the omega part 2 sum_s omega_s(X, Y) eta_s(Z)
/// and the vertical volume part (eta_1 ^ eta_2 ^ eta_3)(X, Y, Z).
inline std::pair<PolyTensor3, PolyTensor3> torsion_forms(const QcModel& m) {
    const std::size_t N = m.N;
    PolyTensor3 tw(N), tv(N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k)
                for (int s = 0; s < 3; ++s) tw(i, j, k).add_product(m.omega[s](i, j), m.eta[s][k], 2);
    static constexpr int perms[6][4] = {{0, 1, 2, 1}, {1, 2, 0, 1}, {2, 0, 1, 1},
                                        {0, 2, 1, -1}, {2, 1, 0, -1}, {1, 0, 2, -1}};
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k)
                for (const auto& pm : perms) {
                    Poly prod = m.eta[pm[0]][i] * m.eta[pm[1]][j];
                    tv(i, j, k).add_product(prod, m.eta[pm[2]][k], pm[3]);
                }
    return {tw, tv};
}

inline void derive_tables(QcModel& m) {
    m.dgamma = derivative_tables(m.gamma, m.N);
    m.dgamma_lc = derivative_tables(m.gamma_lc, m.N);
}

inline void finish_structure(QcModel& m) {
    const std::size_t N = m.N;
    for (int s = 0; s < 3; ++s) {
        m.omega[s] = mat_mul(transpose(m.I[s]), m.metric);
        m.deta[s] = PolyMat(N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                m.deta[s](i, j) = m.eta[s][j].derivative(static_cast<int>(i)) - m.eta[s][i].derivative(static_cast<int>(j));
    }
    m.dmetric.assign(N, PolyMat(N));
    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t i = 0; i < N * N; ++i) m.dmetric[l].e[i] = m.metric.e[i].derivative(static_cast<int>(l));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation suites

namespace detail {

template <class T>
struct Evaluator;

template <>
struct Evaluator<Rational> {
    RationalPoint p;
    Rational operator()(const Poly& q) const { return q.evaluate(p); }
};

template <>
struct Evaluator<Poly> {
    Poly operator()(const Poly& q) const { return q; }
};

template <class T>
struct StructureFrame {
    std::array<std::vector<T>, 7> F;
    T c;
};

template <class T, class Ev>
T bilinear(const PolyMat& m, const std::vector<T>& u, const std::vector<T>& v, const Ev& ev) {
    T acc = T(0);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) {
            if (m(i, j).is_zero()) continue;
            acc += ev(m(i, j)) * u[i] * v[j];
        }
    return acc;
}

template <class T, class Ev>
T linear(const PolyVec& f, const std::vector<T>& u, const Ev& ev) {
    T acc = T(0);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!f[i].is_zero()) acc += ev(f[i]) * u[i];
    return acc;
}

template <class T, class Ev>
std::vector<T> apply_mat(const PolyMat& m, const std::vector<T>& u, const Ev& ev) {
    std::vector<T> out(m.n, T(0));
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j)
            if (!m(i, j).is_zero()) out[i] += ev(m(i, j)) * u[j];
    return out;
}

/// Records a scalar identity; for polynomial values the difference is reduced
/// and must vanish identically.
struct Recorder {
    ResidualLedger& ledger;
    const QcModel& m;

    void operator()(const std::string& name, const std::string& formula, const Rational& lhs, const Rational& rhs) const {
        ledger.record(name, formula, lhs, rhs);
    }
    void operator()(const std::string& name, const std::string& formula, const Poly& lhs, const Poly& rhs) const {
        ledger.record_poly(name, formula, m.reduce(lhs - rhs));
    }
};

template <class T, class Ev>
void structure_checks(const QcModel& m, const StructureFrame<T>& fr, const Ev& ev, const Recorder& rec) {
    const auto& F = fr.F;
    const T zero(0), one(1);
    auto g = [&](const std::vector<T>& u, const std::vector<T>& v) { return bilinear(m.metric, u, v, ev); };
    auto deta = [&](int s, const std::vector<T>& u, const std::vector<T>& v) { return bilinear(m.deta[s], u, v, ev); };
    auto omega = [&](int s, const std::vector<T>& u, const std::vector<T>& v) { return bilinear(m.omega[s], u, v, ev); };
    for (int s = 0; s < 3; ++s)
        for (int k = 0; k < 3; ++k)
            rec("reeb_normalization", "eta_s(xi_k) = delta_sk", linear(m.eta[s], F[4 + k], ev), s == k ? one : zero);
    for (int s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 4; ++a) {
            rec("reeb_contraction_self", "(xi_s _| d eta_s)(X) = 0 for X in H", deta(s, F[4 + s], F[a]), zero);
            for (int k = 0; k < 3; ++k)
                rec("reeb_contraction_cross", "(xi_s _| d eta_k)(X) = -(xi_k _| d eta_s)(X) for X in H",
                    deta(k, F[4 + s], F[a]), -deta(s, F[4 + k], F[a]));
        }
    for (int s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                std::vector<T> Ia = apply_mat(m.I[s], F[a], ev);
                T d = deta(s, F[a], F[b]);
                rec("contact_compatibility", "2 g(I_s X, Y) = d eta_s(X, Y) for X, Y in H", T(2) * g(Ia, F[b]), d);
                rec("fundamental_form_on_H", "2 omega_s(X, Y) = d eta_s(X, Y) for X, Y in H", T(2) * omega(s, F[a], F[b]), d);
                rec("hermitian_compatibility", "g(I_s X, I_s Y) = g(X, Y)", g(Ia, apply_mat(m.I[s], F[b], ev)),
                    g(F[a], F[b]));
            }
    for (int s = 0; s < 3; ++s)
        for (int k = 0; k < 3; ++k)
            for (std::size_t A = 0; A < 7; ++A) {
                rec("reeb_omega_contraction", "omega_s(xi_k, A) = 0", omega(s, F[4 + k], F[A]), zero);
                rec("reeb_omega_contraction", "omega_s(xi_k, A) = 0", omega(s, F[A], F[4 + k]), zero);
            }
    // Frame orthogonality and horizontality.
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B) {
            T expect = A != B ? zero : (A < 4 ? fr.c : one);
            rec("adapted_frame_orthogonality", "g(F_A, F_B) = diag(c, c, c, c, 1, 1, 1)", g(F[A], F[B]), expect);
        }
    for (int s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 4; ++a) {
            std::vector<T> proj = apply_mat(m.proj_h, F[a], ev);
            std::vector<T> projxi = apply_mat(m.proj_h, F[4 + s], ev);
            for (std::size_t k = 0; k < m.N; ++k) {
                rec("horizontal_projector", "Pi_H X = X for X in H", proj[k], F[a][k]);
                rec("horizontal_projector", "Pi_H xi_s = 0", projxi[k], zero);
            }
        }
    // Quaternion relations on H through the frame matrices M_s(a, b) = g(F_a, I_s F_b);
    // the orthonormal matrices are M_s / c.
    std::array<std::array<std::array<T, 4>, 4>, 3> M;
    for (int s = 0; s < 3; ++s)
        for (std::size_t b = 0; b < 4; ++b) {
            std::vector<T> Ib = apply_mat(m.I[s], F[b], ev);
            for (std::size_t a = 0; a < 4; ++a) M[s][a][b] = g(F[a], Ib);
            for (int t = 0; t < 3; ++t)
                rec("structure_preserves_H", "eta_t(I_s X) = 0", linear(m.eta[t], Ib, ev), zero);
        }
    auto prod = [&](int s, int t, std::size_t a, std::size_t b) {
        T acc = T(0);
        for (std::size_t d = 0; d < 4; ++d) acc += M[s][a][d] * M[t][d][b];
        return acc;
    };
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            T delta = zero;
            if (a == b) delta = fr.c * fr.c;
            for (int s = 0; s < 3; ++s)
                rec("quaternion_square_I" + std::to_string(s + 1), "I_s^2 = -Id on H", prod(s, s, a, b), -delta);
            rec("quaternion_product", "I_1 I_2 = I_3 on H", prod(0, 1, a, b), fr.c * M[2][a][b]);
            rec("quaternion_anticommute", "I_1 I_2 = -I_2 I_1 on H", prod(0, 1, a, b), -prod(1, 0, a, b));
            T triple = T(0);
            for (std::size_t d = 0; d < 4; ++d) triple += prod(0, 1, a, d) * M[2][d][b];
            rec("quaternion_triple_product", "I_1 I_2 I_3 = -Id on H", triple, -(delta * fr.c));
        }
    if (m.kind == ModelKind::sphere7) {
        std::vector<T> x(m.N);
        for (std::size_t i = 0; i < m.N; ++i) x[i] = ev(Poly::variable(static_cast<int>(i)));
        for (std::size_t A = 0; A < 7; ++A) {
            T dot = T(0);
            for (std::size_t i = 0; i < m.N; ++i) dot += x[i] * F[A][i];
            rec("sphere_tangency", "<p, F_A> = 0", dot, zero);
        }
    }
}

inline StructureFrame<Rational> point_frame(const QcModel& m, const RationalPoint& p) {
    PointGeometry geo(m, p);
    StructureFrame<Rational> fr;
    for (std::size_t A = 0; A < 7; ++A) fr.F[A] = geo.frame_vector(A);
    fr.c = geo.c();
    return fr;
}

}  // namespace detail

/// Structure identities at the given points (sphere) or at the given points
/// plus globally as polynomial identities (Heisenberg).
inline ResidualLedger structure_suite(const QcModel& m, const std::vector<RationalPoint>& pts) {
    ResidualLedger ledger("models.structure");
    detail::Recorder rec{ledger, m};
    for (const auto& p : pts) detail::structure_checks(m, detail::point_frame(m, p), detail::Evaluator<Rational>{p}, rec);
    if (m.kind == ModelKind::heisenberg7) {
        ResidualLedger global("models.structure");
        detail::Recorder grec{global, m};
        detail::StructureFrame<Poly> fr;
        for (std::size_t A = 0; A < 7; ++A) fr.F[A] = m.frame_fields[A];
        fr.c = Poly(1);
        detail::structure_checks(m, fr, detail::Evaluator<Poly>{}, grec);
        for (auto e : global.entries()) {
            ledger.record(e.name + "_global", e.formula, e.lhs, e.rhs, true, e.note);
        }
    }
    return ledger;
}

namespace detail {

inline RVec sub(RVec a, const RVec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}
inline RVec add(RVec a, const RVec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}
inline RVec scale(RVec a, const Rational& c) {
    for (auto& x : a) x *= c;
    return a;
}
inline void record_vec(ResidualLedger& l, const std::string& name, const std::string& formula, const RVec& lhs,
                       const RVec& rhs) {
    for (std::size_t k = 0; k < lhs.size(); ++k) l.record(name, formula, lhs[k], rhs[k]);
}

/// (nabla_A I_s) Y for constant A, Y at the point.
inline RVec nabla_structure(const PointGeometry& geo, int s, const RVec& A, const RVec& Y) {
    const QcModel& m = geo.model();
    RVec out = geo.derivative_apply(m.I[s], A, Y);
    out = add(out, geo.gamma(A, geo.apply_I(s, Y)));
    return sub(out, geo.apply_I(s, geo.gamma(A, Y)));
}

}  // namespace detail

/// Connection properties at each point: metricity, preservation of H, V and
/// the quaternionic structure, and the prescribed torsion.
inline ResidualLedger connection_suite(const QcModel& m, const std::vector<RationalPoint>& pts) {
    using namespace detail;
    ResidualLedger L("models.connection");
    for (const auto& p : pts) {
        PointGeometry geo(m, p);
        const auto& F = geo.frame();
        RVec zero(m.N);
        for (std::size_t A = 0; A < 7; ++A) {
            for (std::size_t B = 0; B < 7; ++B)
                for (std::size_t C = 0; C < 7; ++C) {
                    Rational v = geo.metric_derivative(F[A], F[B], F[C]) - geo.metric(geo.gamma(F[A], F[B]), F[C]) -
                                 geo.metric(F[B], geo.gamma(F[A], F[C]));
                    L.record("metric_parallel", "(nabla_A g)(B, C) = 0", v, 0);
                }
            for (std::size_t a = 0; a < 4; ++a) {
                // Y = Pi_H F_a extends F_a to a horizontal field.
                RVec dY = add(geo.derivative_apply(m.proj_h, F[A], F[a]), geo.gamma(F[A], F[a]));
                for (int s = 0; s < 3; ++s)
                    L.record("preserves_H", "eta_s(nabla_A Y) = 0 for horizontal fields Y", geo.metric(dY, geo.xi(s)), 0);
            }
            std::array<std::array<Rational, 3>, 3> conn{};
            for (int s = 0; s < 3; ++s) {
                RVec dxi = geo.covariant(m.xi[s], F[A]);
                for (std::size_t b = 0; b < 4; ++b)
                    L.record("preserves_V", "g(nabla_A xi_s, X) = 0 for X in H", geo.metric(dxi, F[b]), 0);
                for (int r = 0; r < 3; ++r) conn[s][r] = geo.metric(dxi, geo.xi(r));
            }
            for (int s = 0; s < 3; ++s)
                for (int r = s; r < 3; ++r)
                    L.record("reeb_connection_skew", "g(nabla_A xi_s, xi_r) = -g(nabla_A xi_r, xi_s)", conn[s][r], -conn[r][s]);
            for (int s = 0; s < 3; ++s)
                for (std::size_t b = 0; b < 4; ++b) {
                    RVec lhs = nabla_structure(geo, s, F[A], F[b]);
                    RVec rhs(m.N);
                    for (int r = 0; r < 3; ++r) rhs = add(rhs, scale(geo.apply_I(r, F[b]), conn[s][r]));
                    record_vec(L, "preserves_Q", "(nabla_A I_s) X = sum_r g(nabla_A xi_s, xi_r) I_r X", lhs, rhs);
                }
        }
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                RVec T = geo.torsion(F[a], F[b]);
                RVec expect(m.N);
                for (int s = 0; s < 3; ++s) {
                    Rational w = geo.metric(geo.apply_I(s, F[a]), F[b]);
                    expect = add(expect, scale(geo.xi(s), 2 * w));
                }
                record_vec(L, "horizontal_torsion", "T(X, Y) = 2 sum_s omega_s(X, Y) xi_s", T, expect);
                RVec br = sub(geo.derivative_apply(m.proj_h, F[a], F[b]), geo.derivative_apply(m.proj_h, F[b], F[a]));
                RVec brV(m.N);
                for (int s = 0; s < 3; ++s) brV = add(brV, scale(geo.xi(s), geo.metric(br, geo.xi(s))));
                record_vec(L, "torsion_is_minus_vertical_bracket", "T(X, Y) = -[X, Y]_V", T, scale(brV, -1));
            }
        for (int s = 0; s < 3; ++s) {
            for (std::size_t a = 0; a < 4; ++a)
                record_vec(L, "reeb_horizontal_torsion", "T(xi_s, X) = 0 for X in H", geo.torsion(F[4 + s], F[a]), zero);
            int j = (s + 1) % 3, k = (s + 2) % 3;
            record_vec(L, "vertical_torsion", "T(xi_i, xi_j) = -S xi_k (cyclic)", geo.torsion(F[4 + s], F[4 + j]),
                       scale(geo.xi(k), -m.S));
            RVec br = sub(geo.derivative(m.xi[j], F[4 + s]), geo.derivative(m.xi[s], F[4 + j]));
            for (std::size_t a = 0; a < 4; ++a)
                L.record("vertical_integrability", "g([xi_i, xi_j], X) = 0 for X in H", geo.metric(br, F[a]), 0);
        }
    }
    if (m.kind == ModelKind::heisenberg7) {
        // Connection coefficients in the global frame: nabla_{E_A} E_B = 0.
        for (std::size_t A = 0; A < 7; ++A)
            for (std::size_t B = 0; B < 7; ++B)
                for (std::size_t k = 0; k < m.N; ++k) {
                    Poly acc;
                    for (std::size_t l = 0; l < m.N; ++l) acc.add_product(m.frame_fields[A][l], m.frame_fields[B][k].derivative(static_cast<int>(l)));
                    for (std::size_t i = 0; i < m.N; ++i)
                        for (std::size_t j = 0; j < m.N; ++j) {
                            if (m.gamma(k, i, j).is_zero()) continue;
                            acc += m.gamma(k, i, j) * m.frame_fields[A][i] * m.frame_fields[B][j];
                        }
                    L.record_poly("frame_parallel_global", "nabla_{E_A} E_B = 0 in the left-invariant frame", acc);
                }
        // [T_a, T_b] = -2 sum_s omega_s(T_a, T_b) xi_s.
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b)
                for (std::size_t k = 0; k < m.N; ++k) {
                    Poly br;
                    for (std::size_t l = 0; l < m.N; ++l) {
                        br.add_product(m.frame_fields[a][l], m.frame_fields[b][k].derivative(static_cast<int>(l)));
                        br.add_product(m.frame_fields[b][l], m.frame_fields[a][k].derivative(static_cast<int>(l)), -1);
                    }
                    Poly rhs;
                    for (int s = 0; s < 3; ++s) {
                        Poly w = detail::bilinear(m.omega[s], m.frame_fields[a], m.frame_fields[b], detail::Evaluator<Poly>{});
                        rhs.add_product(w, m.frame_fields[4 + s][k], -2);
                    }
                    L.record_poly("heisenberg_structure_constants", "[T_a, T_b] = -2 sum_s omega_s(T_a, T_b) xi_s", br - rhs);
                }
    }
    return L;
}

/// Curvature identities at each point for a model with vanishing torsion
/// endomorphism (both models here).
inline ResidualLedger curvature_suite(const QcModel& m, const std::vector<RationalPoint>& pts, std::uint64_t seed = 1) {
    ResidualLedger L("models.curvature");
    RationalRng rng(seed);
    const int n = m.n;
    for (const auto& p : pts) {
        CurvatureData cd = curvature_at(m, p);
        TorsionData td = torsion_at(m, p);
        const FrameAlgebra& alg = cd.alg;
        QuatTriple trip = alg.horizontal_triple();
        L.record("scalar_curvature_trace", "8n(n+2) S = R(e_b, e_a, e_a, e_b) with the connection's S",
                 Rational(8 * n * (n + 2)) * m.S, cd.full_trace);
        L.record("scalar_curvature_value", m.kind == ModelKind::sphere7 ? "S = 2" : "S = 0", cd.S,
                 m.kind == ModelKind::sphere7 ? 2 : 0);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                Rational gab = a == b ? alg.c : Rational(0);
                Rational t0ab = td.t0(a, b) * alg.c, uab = td.u(a, b) * alg.c;
                L.record("qc_ricci", "Ric(X, Y) = (2n+2) T0(X, Y) + (4n+10) U(X, Y) + 2(n+2) S g(X, Y)", cd.ric(a, b),
                         Rational(2 * n + 2) * t0ab + Rational(4 * n + 10) * uab + Rational(2 * (n + 2)) * cd.S * gab);
                if (m.kind == ModelKind::sphere7)
                    L.record("qc_ricci_sphere", "Ric(X, Y) = 12 g(X, Y)", cd.ric(a, b), 12 * gab);
                for (int s = 0; s < 3; ++s) {
                    RVec X = FrameAlgebra::unit(a), Y = FrameAlgebra::unit(b);
                    RVec IX = alg.apply(s, X), IY = alg.apply(s, Y);
                    Rational t0IXIY = 0;
                    for (std::size_t k = 0; k < 4; ++k)
                        for (std::size_t l = 0; l < 4; ++l) t0IXIY += td.t0(k, l) * alg.c * IX[k] * IY[l];
                    Rational rhs = Rational(2 * n + 1, 4 * n) * t0ab + Rational(1, 4 * n) * t0IXIY +
                                   Rational(2 * n + 1, 2 * n) * uab + cd.S / 2 * gab;
                    L.record("zeta_form", "zeta_s(X, I_s Y) = (2n+1)/(4n) T0(X,Y) + 1/(4n) T0(I_sX, I_sY) + (2n+1)/(2n) U(X,Y) + (S/2) g(X,Y)",
                             CurvatureData::form(cd.zeta[s], X, IY), rhs);
                }
            }
        for (std::size_t s = 0; s < 3; ++s) L.record("torsion_endomorphism_zero", "T_xi = 0 on H", norm2(td.t_xi[s]), 0);
        L.record("T0_vanishes", "T0 = 0", norm2(td.t0), 0);
        L.record("U_vanishes_n1", "U = 0 when n = 1", norm2(td.u), 0);
        ExactMatrix casimir_t0 = td.t0 + casimir_apply(trip, td.t0);
        L.record("T0_casimir_relation", "T0(X,Y) + sum_s T0(I_sX, I_sY) = 0", norm2(casimir_t0), 0);
        for (int s = 0; s < 3; ++s)
            L.record("U_invariance", "U(I_sX, I_sY) = U(X, Y)", norm2(conjugate_by(trip, s, td.u) - td.u), 0);
        // Vertical torsion and the Ricci forms.
        RVec Xr = random_horizontal(rng), Yr = random_horizontal(rng), Zr = random_horizontal(rng);
        for (int i = 0; i < 3; ++i) {
            int j = (i + 1) % 3, k = (i + 2) % 3;
            RVec xi_i = FrameAlgebra::unit(4 + i), xi_j = FrameAlgebra::unit(4 + j);
            L.record("scalar_from_vertical_torsion", "S = -g(T(xi_1, xi_2), xi_3)", cd.S, -td.t(4, 5, 6));
            Rational gT = 0;
            for (std::size_t a = 0; a < 4; ++a) gT += td.vertical[i][j][a] * alg.c * Xr[a];
            Rational rk_i = CurvatureData::form(cd.rho[k], alg.apply(i, Xr), xi_i);
            Rational rk_j = CurvatureData::form(cd.rho[k], alg.apply(j, Xr), xi_j);
            L.record("vertical_torsion_rho_i", "g(T(xi_i, xi_j), X) = -rho_k(I_i X, xi_i)", gT, -rk_i);
            L.record("vertical_torsion_rho_j", "g(T(xi_i, xi_j), X) = -rho_k(I_j X, xi_j)", gT, -rk_j);
            RVec xi_s = FrameAlgebra::unit(4 + i);
            L.record("rho_reeb_self", "rho_s(xi_s, X) = X(S)/6 = 0 with T0 = U = 0 and S constant",
                     CurvatureData::form(cd.rho[i], xi_s, Xr), 0);
            L.record("rho_reeb_cross", "rho_i(xi_j, I_k X) = (2n-1) X(S)/6 = 0 with T0 = U = 0 and S constant",
                     CurvatureData::form(cd.rho[i], xi_j, alg.apply(k, Xr)), 0);
            // Reeb curvature with T0 = U = 0.
            auto rj = [&](const RVec& v) { return CurvatureData::form(cd.rho[k], alg.apply(i, v), xi_i); };
            auto rkk = [&](const RVec& v) { return CurvatureData::form(cd.rho[j], alg.apply(i, v), xi_i); };
            Rational rhs = alg.omega(j, Xr, Yr) * rj(Zr) - alg.omega(k, Xr, Yr) * rkk(Zr) - alg.omega(j, Xr, Zr) * rj(Yr) +
                           alg.omega(k, Xr, Zr) * rkk(Yr) - alg.omega(j, Yr, Zr) * rj(Xr) + alg.omega(k, Yr, Zr) * rkk(Xr);
            L.record("reeb_curvature", "R(xi_i, X, Y, Z) from rho_j, rho_k (T0 = U = 0 form)",
                     cd.R4(xi_i, Xr, Yr, Zr), rhs);
            if (m.kind == ModelKind::sphere7)
                L.record("reeb_curvature_sphere", "R(xi_i, X, Y, Z) = 0", cd.R4(xi_i, Xr, Yr, Zr), 0);
        }
        if (m.kind == ModelKind::sphere7)
            for (std::size_t A = 0; A < 7; ++A)
                for (std::size_t B = 0; B < 7; ++B)
                    L.record("riemannian_einstein", "Ric^g(A, B) = (4n+2) g(A, B)", cd.ric_riemannian(A, B),
                             A == B ? Rational(4 * n + 2) * alg.norm2(A) : Rational(0));
        if (m.kind == ModelKind::heisenberg7) {
            Rational r2 = 0;
            for (const auto& v : cd.R) r2 += v * v;
            L.record("flat_curvature", "R = 0", r2, 0);
        }
    }
    return L;
}

/// Ricci of the extended metric on the frame, for the sphere model.
inline ExactMatrix riemannian_check(const QcModel& m, const RationalPoint& p) {
    if (m.kind != ModelKind::sphere7) throw input_error("riemannian_check requires the sphere model");
    return curvature_at(m, p).ric_riemannian;
}

/// Density of Vol_eta = eta_1 ^ eta_2 ^ eta_3 ^ omega_s^2 against the
/// Riemannian volume of the extended metric, oriented by the frame order.
inline Rational volume_density_at(const QcModel& m, const RationalPoint& p, int s) {
    PointGeometry geo(m, p);
    FrameAlgebra alg = FrameAlgebra::from(geo);
    std::array<std::array<Rational, 7>, 7> w{};
    for (std::size_t A = 0; A < 7; ++A)
        for (std::size_t B = 0; B < 7; ++B) w[A][B] = geo.metric(geo.apply_I(s, geo.frame_vector(A)), geo.frame_vector(B));
    std::array<int, 7> perm{0, 1, 2, 3, 4, 5, 6};
    Rational acc = 0;
    do {
        int inv = 0;
        for (int a = 0; a < 7; ++a)
            for (int b = a + 1; b < 7; ++b) inv += perm[a] > perm[b];
        // eta_s(F_A) = delta_{A, 4+s}
        if (perm[0] != 4 || perm[1] != 5 || perm[2] != 6) continue;
        Rational term = w[perm[3]][perm[4]] * w[perm[5]][perm[6]];
        acc += inv % 2 ? Rational(-term) : term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    // 1/(1! 1! 1! 2! 2!) normalization of the wedge; orthonormal scaling of H.
    return acc / 4 / (alg.c * alg.c);
}

inline Rational volume_density(const QcModel& m, const std::vector<RationalPoint>& pts) {
    if (m.kind != ModelKind::sphere7) throw input_error("volume_density requires the sphere model");
    if (pts.size() < 2) throw input_error("volume_density needs at least two points");
    Rational ref = volume_density_at(m, pts[0], 0);
    for (const auto& p : pts)
        for (int s = 0; s < 3; ++s)
            if (volume_density_at(m, p, s) != ref) throw validation_error("volume density is not constant");
    return ref;
}

// ---------------------------------------------------------------------------
// Builders

struct BuildOptions {
    std::optional<std::size_t> forced_candidate;  // negative-control hook
    std::uint64_t validation_seed = 7;
    int validation_points = 10;
};

namespace detail {

inline std::array<ExactMatrix, 3> left_multiplication_8() {
    QuatTriple t = QuatTriple::standard(2);
    return t.I;
}

inline QcModel sphere_structure(int xi_sign, int i_sign) {
    QcModel m;
    m.kind = ModelKind::sphere7;
    m.N = 8;
    const std::size_t N = 8;
    PolyVec x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = Poly::variable(static_cast<int>(i));
    auto L = left_multiplication_8();
    for (int s = 0; s < 3; ++s) {
        m.xi[s] = mat_vec(constant_mat(L[s]), x);
        for (auto& c : m.xi[s]) c *= Rational(xi_sign);
        m.eta[s] = m.xi[s];
    }
    m.metric = m.metric_inv = constant_mat(ExactMatrix::identity(N));
    m.proj_h = PolyMat(N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            Poly v = i == j ? Poly(1) : Poly();
            v -= x[i] * x[j];
            for (int s = 0; s < 3; ++s) v -= m.xi[s][i] * m.xi[s][j];
            m.proj_h(i, j) = v;
        }
    for (int s = 0; s < 3; ++s) {
        m.I[s] = mat_mul(constant_mat(L[s]), m.proj_h);
        for (auto& c : m.I[s].e) c *= Rational(i_sign);
    }
    m.gamma_lc = PolyTensor3(N);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t i = 0; i < N; ++i) m.gamma_lc(k, i, i) = x[k];
    m.convention.xi_sign = xi_sign;
    m.convention.i_sign = i_sign;
    finish_structure(m);
    return m;
}

inline QcModel heisenberg_structure() {
    QcModel m;
    m.kind = ModelKind::heisenberg7;
    m.N = 7;
    const std::size_t N = 7;
    QuatTriple q = QuatTriple::standard(1);
    PolyVec x(4);
    for (std::size_t a = 0; a < 4; ++a) x[a] = Poly::variable(static_cast<int>(a));
    // Columns of E: T_a = d_{x_a} - sum_{s,b} (Q_s)_{ab} x_b d_{t_s}; xi_s = d_{t_s}.
    // Rows of theta = E^{-1}: dx_a and eta_s = dt_s + sum_{a,b} (Q_s)_{ab} x_b dx_a.
    m.frame_fields.assign(7, PolyVec(N));
    std::vector<PolyVec> theta(7, PolyVec(N));
    for (std::size_t a = 0; a < 4; ++a) {
        m.frame_fields[a][a] = Poly(1);
        theta[a][a] = Poly(1);
    }
    for (std::size_t s = 0; s < 3; ++s) {
        m.frame_fields[4 + s][4 + s] = Poly(1);
        theta[4 + s][4 + s] = Poly(1);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                if (q.I[s](a, b) == 0) continue;
                m.frame_fields[a][4 + s].add_product(x[b], Poly(1), -q.I[s](a, b));
                theta[4 + s][a].add_product(x[b], Poly(1), q.I[s](a, b));
            }
    }
    m.metric = PolyMat(N);
    m.metric_inv = PolyMat(N);
    m.proj_h = PolyMat(N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t A = 0; A < 7; ++A) {
                m.metric(i, j).add_product(theta[A][i], theta[A][j]);
                m.metric_inv(i, j).add_product(m.frame_fields[A][i], m.frame_fields[A][j]);
                if (A < 4) m.proj_h(i, j).add_product(m.frame_fields[A][i], theta[A][j]);
            }
    for (std::size_t s = 0; s < 3; ++s) {
        m.xi[s] = m.frame_fields[4 + s];
        m.eta[s] = theta[4 + s];
        m.I[s] = PolyMat(N);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                if (q.I[s](b, a) == 0) continue;
                for (std::size_t i = 0; i < N; ++i)
                    for (std::size_t j = 0; j < N; ++j)
                        m.I[s](i, j).add_product(m.frame_fields[b][i], theta[a][j], q.I[s](b, a));
            }
    }
    finish_structure(m);
    // Levi-Civita by the Koszul formula.
    m.gamma_lc = PolyTensor3(N);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t l = 0; l < N; ++l) {
                    if (m.metric_inv(k, l).is_zero()) continue;
                    Poly koszul = m.dmetric[i](j, l) + m.dmetric[j](i, l) - m.dmetric[l](i, j);
                    m.gamma_lc(k, i, j).add_product(m.metric_inv(k, l), koszul, Rational(1, 2));
                }
    return m;
}

/// Adds the contorsion of the prescribed torsion and fixes S by requiring
/// g(nabla_{xi_1} xi_2, xi_3) to match the I_3-coefficient of nabla_{xi_1} I_2.
inline void finish_connection(QcModel& m, const RationalPoint& p) {
    auto [tw, tv] = torsion_forms(m);
    PolyTensor3 aw = contorsion(tw, m.metric_inv);
    PolyTensor3 av = contorsion(tv, m.metric_inv);
    m.gamma = PolyTensor3(m.N);
    for (std::size_t i = 0; i < m.gamma.e.size(); ++i) m.gamma.e[i] = m.gamma_lc.e[i] + aw.e[i];
    m.S = 0;
    derive_tables(m);
    PointGeometry geo(m, p);
    RVec d = geo.covariant(m.xi[1], geo.xi(0));
    Rational gamma0 = geo.metric(d, geo.xi(2));
    const RVec& h = geo.frame_vector(0);
    Rational beta = geo.metric(nabla_structure(geo, 1, geo.xi(0), h), geo.apply_I(2, h)) / geo.c();
    m.S = 2 * (gamma0 - beta);
    // Volume part enters with coefficient -S in the torsion form.
    for (std::size_t i = 0; i < m.gamma.e.size(); ++i)
        if (!av.e[i].is_zero()) m.gamma.e[i] -= m.S * av.e[i];
    derive_tables(m);
}

inline void throw_if_failed(const QcModel& m, const ResidualLedger& l, const char* what) {
    auto f = l.failures();
    if (!f.empty()) throw validation_error(to_string(m.kind) + " " + what + " failed: " + f.front());
}

}  // namespace detail

/// Validates structure and connection at the given points.
inline ResidualLedger validate_model(const QcModel& m, const std::vector<RationalPoint>& pts) {
    ResidualLedger all("models");
    all.append(structure_suite(m, pts));
    all.append(connection_suite(m, pts));
    return all;
}

inline QcModel build_sphere7(const BuildOptions& opt = {}) {
    static constexpr int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    auto pts = sample_rational_points(opt.validation_seed, opt.validation_points);
    std::vector<ConventionCandidate> candidates;
    std::optional<std::size_t> chosen;
    for (std::size_t c = 0; c < 4; ++c) {
        QcModel trial = detail::sphere_structure(signs[c][0], signs[c][1]);
        ConventionCandidate cand{signs[c][0], signs[c][1], false, {}};
        cand.failed = structure_suite(trial, pts).failures();
        cand.passed = cand.failed.empty();
        if (cand.passed && !chosen) chosen = c;
        candidates.push_back(cand);
    }
    bool forced = opt.forced_candidate.has_value();
    if (forced) {
        if (*opt.forced_candidate >= 4) throw config_error("forced convention candidate must be 0..3");
        chosen = opt.forced_candidate;
    }
    if (!chosen) throw validation_error("no sign convention passes the structure identities");
    QcModel m = detail::sphere_structure(signs[*chosen][0], signs[*chosen][1]);
    m.convention.candidates = candidates;
    m.convention.forced = forced;
    detail::finish_connection(m, pts.front());
    ResidualLedger v = validate_model(m, pts);
    m.failures = v.failures();
    m.validated = m.failures.empty();
    if (!forced) detail::throw_if_failed(m, v, "validation");
    return m;
}

inline QcModel build_heisenberg7(const BuildOptions& opt = {}) {
    QcModel m = detail::heisenberg_structure();
    auto pts = model_points(m, opt.validation_seed, opt.validation_points);
    ConventionCandidate cand{1, 1, false, structure_suite(m, pts).failures()};
    cand.passed = cand.failed.empty();
    m.convention.candidates = {cand};
    detail::finish_connection(m, pts.front());
    ResidualLedger v = validate_model(m, pts);
    m.failures = v.failures();
    m.validated = m.failures.empty();
    detail::throw_if_failed(m, v, "validation");
    return m;
}

inline QcModel build_model(ModelKind k, const BuildOptions& opt = {}) {
    return k == ModelKind::sphere7 ? build_sphere7(opt) : build_heisenberg7(opt);
}

}  // namespace qc7
