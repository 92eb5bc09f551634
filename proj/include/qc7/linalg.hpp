#pragma once

// Dense exact linear algebra over Q and the generalized symmetric-definite
// eigensolver used for Rayleigh-Ritz spectra. Floating point enters only as
// an advisory approximation; eigenvalues are certified by exact arithmetic.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qc7/errors.hpp"
#include "qc7/rational.hpp"

namespace qc7 {

class ExactMatrix {
public:
    ExactMatrix() = default;
    ExactMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static ExactMatrix identity(std::size_t n) {
        ExactMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }
    static ExactMatrix diagonal(const std::vector<Rational>& d) {
        ExactMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    ExactMatrix transpose() const {
        ExactMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
    bool is_symmetric() const {
        if (!square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }
    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const Rational& r) { return r == 0; });
    }
    Rational trace() const {
        Rational t = 0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    friend ExactMatrix operator+(const ExactMatrix& a, const ExactMatrix& b) {
        check_same(a, b);
        ExactMatrix r = a;
        for (std::size_t k = 0; k < r.data_.size(); ++k) r.data_[k] += b.data_[k];
        return r;
    }
    friend ExactMatrix operator-(const ExactMatrix& a, const ExactMatrix& b) {
        check_same(a, b);
        ExactMatrix r = a;
        for (std::size_t k = 0; k < r.data_.size(); ++k) r.data_[k] -= b.data_[k];
        return r;
    }
    friend ExactMatrix operator*(const Rational& c, const ExactMatrix& a) {
        ExactMatrix r = a;
        for (auto& v : r.data_) v *= c;
        return r;
    }
    friend ExactMatrix operator*(const ExactMatrix& a, const ExactMatrix& b) {
        if (a.cols_ != b.rows_) throw dimension_error("matrix product shape mismatch");
        ExactMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += a(i, k) * b(k, j);
            }
        return r;
    }
    friend bool operator==(const ExactMatrix& a, const ExactMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    Eigen::MatrixXd to_double() const {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).get_d();
        return m;
    }

private:
    static void check_same(const ExactMatrix& a, const ExactMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw dimension_error("matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Rational> data_;
};

/// Row-echelon rank over Q.
inline std::size_t rank(ExactMatrix m) {
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t piv = r;
        while (piv < m.rows() && m(piv, c) == 0) ++piv;
        if (piv == m.rows()) continue;
        if (piv != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(r, j));
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            if (m(i, c) == 0) continue;
            Rational f = m(i, c) / m(r, c);
            for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        ++r;
    }
    return r;
}

inline std::size_t nullity(const ExactMatrix& m) { return m.cols() - rank(m); }

/// Basis of the right null space, one column vector per entry.
inline std::vector<std::vector<Rational>> null_space(ExactMatrix m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && m(piv, c) == 0) ++piv;
        if (piv == rows) continue;
        if (piv != r)
            for (std::size_t j = 0; j < cols; ++j) std::swap(m(piv, j), m(r, j));
        Rational inv = 1 / m(r, c);
        for (std::size_t j = 0; j < cols; ++j) m(r, j) *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m(i, c) == 0) continue;
            Rational f = m(i, c);
            for (std::size_t j = 0; j < cols; ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    std::vector<std::vector<Rational>> basis;
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<Rational> v(cols);
        v[free] = 1;
        for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -m(k, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Solves A X = B exactly; A must be square and nonsingular.
inline ExactMatrix solve(ExactMatrix a, ExactMatrix b) {
    if (!a.square() || a.rows() != b.rows()) throw dimension_error("solve: shape mismatch");
    const std::size_t n = a.rows();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a(piv, c) == 0) ++piv;
        if (piv == n) throw input_error("solve: singular matrix");
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(c, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(piv, j), b(c, j));
        }
        Rational inv = 1 / a(c, c);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a(i, c) == 0) continue;
            Rational f = a(i, c) * inv;
            for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(c, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        Rational inv = 1 / a(i, i);
        for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) *= inv;
    }
    return b;
}

/// Pivots of the unpivoted LDL^T factorization; all positive iff the
/// symmetric matrix is positive definite.
inline std::optional<std::vector<Rational>> ldlt_pivots_if_positive_definite(ExactMatrix m) {
    const std::size_t n = m.rows();
    std::vector<Rational> d;
    d.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (m(k, k) <= 0) return std::nullopt;
        d.push_back(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (m(i, k) == 0) continue;
            Rational f = m(i, k) / m(k, k);
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return d;
}

struct Inertia {
    std::size_t negative = 0, zero = 0, positive = 0;
};

/// Exact Sylvester inertia of a symmetric matrix by symmetric elimination
/// with 1x1 and 2x2 pivots.
inline Inertia inertia(ExactMatrix m) {
    if (!m.is_symmetric()) throw input_error("inertia: matrix is not symmetric");
    Inertia out;
    std::vector<std::size_t> live(m.rows());
    for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
    auto eliminate = [&](const std::vector<std::size_t>& block) {
        // Schur complement of the pivot block over the remaining indices.
        std::vector<std::size_t> rest;
        for (auto i : live)
            if (std::find(block.begin(), block.end(), i) == block.end()) rest.push_back(i);
        if (block.size() == 1) {
            std::size_t p = block[0];
            for (auto i : rest) {
                if (m(i, p) == 0) continue;
                Rational f = m(i, p) / m(p, p);
                for (auto j : rest) m(i, j) -= f * m(p, j);
            }
        } else {
            std::size_t p = block[0], q = block[1];
            Rational a = m(p, p), b = m(p, q), c = m(q, q);
            Rational det = a * c - b * b;
            // inverse of [[a,b],[b,c]] = [[c,-b],[-b,a]] / det
            for (auto i : rest) {
                Rational u = m(i, p), v = m(i, q);
                if (u == 0 && v == 0) continue;
                Rational wp = (c * u - b * v) / det, wq = (a * v - b * u) / det;
                for (auto j : rest) m(i, j) -= wp * m(p, j) + wq * m(q, j);
            }
        }
        live = rest;
    };
    while (!live.empty()) {
        auto diag = std::find_if(live.begin(), live.end(), [&](std::size_t i) { return m(i, i) != 0; });
        if (diag != live.end()) {
            std::size_t p = *diag;
            (m(p, p) > 0 ? out.positive : out.negative)++;
            eliminate({p});
            continue;
        }
        bool found = false;
        for (std::size_t a = 0; a < live.size() && !found; ++a)
            for (std::size_t b = a + 1; b < live.size() && !found; ++b)
                if (m(live[a], live[b]) != 0) {
                    // [[0, x], [x, 0]] has one positive and one negative eigenvalue.
                    out.positive++;
                    out.negative++;
                    eliminate({live[a], live[b]});
                    found = true;
                }
        if (!found) {
            out.zero += live.size();
            live.clear();
        }
    }
    return out;
}

/// Characteristic polynomial det(x I - M), coefficients in ascending order,
/// via reduction to Hessenberg form over Q.
inline std::vector<Rational> characteristic_polynomial(ExactMatrix h) {
    if (!h.square()) throw dimension_error("characteristic polynomial of non-square matrix");
    const std::size_t n = h.rows();
    for (std::size_t m = 1; m + 1 < n + 1 && m < n; ++m) {
        std::size_t i = m;
        while (i < n && h(i, m - 1) == 0) ++i;
        if (i == n) continue;
        if (i != m) {
            for (std::size_t j = 0; j < n; ++j) std::swap(h(i, j), h(m, j));
            for (std::size_t j = 0; j < n; ++j) std::swap(h(j, i), h(j, m));
        }
        Rational t = h(m, m - 1);
        for (std::size_t k = m + 1; k < n; ++k) {
            if (h(k, m - 1) == 0) continue;
            Rational u = h(k, m - 1) / t;
            for (std::size_t j = 0; j < n; ++j) h(k, j) -= u * h(m, j);
            for (std::size_t j = 0; j < n; ++j) h(j, m) += u * h(j, k);
        }
    }
    // p_k = characteristic polynomial of the leading k x k block.
    std::vector<std::vector<Rational>> p(n + 1);
    p[0] = {Rational(1)};
    for (std::size_t m = 1; m <= n; ++m) {
        std::vector<Rational> next(m + 1);
        for (std::size_t k = 0; k < p[m - 1].size(); ++k) {
            next[k + 1] += p[m - 1][k];
            next[k] -= h(m - 1, m - 1) * p[m - 1][k];
        }
        Rational t = 1;
        for (std::size_t i = 1; i < m; ++i) {
            t *= h(m - i, m - i - 1);
            Rational coeff = t * h(m - i - 1, m - 1);
            if (coeff == 0) continue;
            for (std::size_t k = 0; k < p[m - i - 1].size(); ++k) next[k] -= coeff * p[m - i - 1][k];
        }
        p[m] = std::move(next);
    }
    return p[n];
}

inline Rational evaluate_univariate(const std::vector<Rational>& coeffs, const Rational& x) {
    Rational acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

/// Multiplicity of x = r as a root, by repeated synthetic division.
inline std::size_t root_multiplicity(std::vector<Rational> coeffs, const Rational& r) {
    std::size_t mult = 0;
    while (coeffs.size() > 1 && evaluate_univariate(coeffs, r) == 0) {
        std::vector<Rational> q(coeffs.size() - 1);
        Rational carry = 0;
        for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
            carry = coeffs[k + 1] + carry * r;
            q[k] = carry;
        }
        coeffs = std::move(q);
        ++mult;
    }
    return mult;
}

/// Continued-fraction convergents of x with denominators up to max_den.
inline std::vector<Rational> rational_candidates(double x, long max_den = 1000) {
    std::vector<Rational> out;
    double v = x;
    mpz_class h0 = 1, h1 = 0, k0 = 0, k1 = 1;
    for (int step = 0; step < 40; ++step) {
        double a = std::floor(v);
        mpz_class ai(a);
        mpz_class h2 = ai * h0 + h1, k2 = ai * k0 + k1;
        if (k2 > max_den) break;
        Rational c(h2, k2);
        c.canonicalize();
        out.push_back(c);
        h1 = h0;
        h0 = h2;
        k1 = k0;
        k0 = k2;
        double frac = v - a;
        if (std::abs(frac) < 1e-13) break;
        v = 1.0 / frac;
    }
    return out;
}

struct EigenCluster {
    double approx = 0;                // mean of the float eigenvalues in the cluster
    std::size_t multiplicity = 0;     // float cluster size
    std::optional<Rational> exact;    // certified rational value
    std::size_t exact_multiplicity = 0;
    bool certified = false;           // exact multiplicity equals cluster size
    double residual = 0;              // worst a-posteriori residual in the cluster
    std::string method;               // "charpoly", "nullity" or "float"
};

struct GeneralizedEigenResult {
    std::vector<double> values;                   // ascending
    std::vector<double> residuals;                // per value
    std::vector<EigenCluster> clusters;           // ascending, grouped
    Eigen::MatrixXd vectors;                      // columns, G-orthonormal
};

/// Solves A v = lambda G v for symmetric A and symmetric positive definite G.
/// Floats come from a symmetric-definite QR iteration; each cluster is then
/// certified by exact rational root extraction from the characteristic
/// polynomial of G^{-1} A (size <= charpoly_limit) or by exact nullity of
/// A - r G at the rational candidate r.
inline GeneralizedEigenResult generalized_eigen(const ExactMatrix& a, const ExactMatrix& g, double tol,
                                                std::size_t charpoly_limit = 60) {
    if (!a.square() || !g.square() || a.rows() != g.rows()) throw dimension_error("generalized_eigen: shape mismatch");
    if (!a.is_symmetric() || !g.is_symmetric()) throw input_error("generalized_eigen: matrices must be symmetric");
    if (!ldlt_pivots_if_positive_definite(g)) throw input_error("generalized_eigen: G is not positive definite");
    const std::size_t n = a.rows();
    GeneralizedEigenResult out;
    if (n == 0) return out;

    Eigen::MatrixXd ad = a.to_double(), gd = g.to_double();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ad, gd);
    if (es.info() != Eigen::Success) throw convergence_error("generalized_eigen: QR iteration did not converge", INFINITY);
    out.vectors = es.eigenvectors();
    double worst = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double lam = es.eigenvalues()(static_cast<Eigen::Index>(k));
        Eigen::VectorXd v = out.vectors.col(static_cast<Eigen::Index>(k));
        double gnorm = std::sqrt(v.dot(gd * v));
        double res = (ad * v - lam * (gd * v)).norm() / gnorm;
        out.values.push_back(lam);
        out.residuals.push_back(res);
        worst = std::max(worst, res);
    }

    std::optional<std::vector<Rational>> charpoly;
    if (n <= charpoly_limit) charpoly = characteristic_polynomial(solve(g, a));

    for (std::size_t k = 0; k < n;) {
        std::size_t end = k + 1;
        double scale = std::max(1.0, std::abs(out.values[k]));
        while (end < n && std::abs(out.values[end] - out.values[k]) <= 1e-7 * scale) ++end;
        EigenCluster c;
        c.multiplicity = end - k;
        double sum = 0;
        for (std::size_t i = k; i < end; ++i) {
            sum += out.values[i];
            c.residual = std::max(c.residual, out.residuals[i]);
        }
        c.approx = sum / static_cast<double>(c.multiplicity);
        c.method = "float";
        for (const auto& cand : rational_candidates(c.approx)) {
            if (std::abs(cand.get_d() - c.approx) > 1e-6 * scale) continue;
            std::size_t mult = 0;
            std::string method;
            if (charpoly) {
                mult = root_multiplicity(*charpoly, cand);
                method = "charpoly";
            } else {
                mult = nullity(a - cand * g);
                method = "nullity";
            }
            if (mult > 0) {
                c.exact = cand;
                c.exact_multiplicity = mult;
                c.certified = (mult == c.multiplicity);
                c.method = method;
                if (c.certified) c.residual = 0;
                break;
            }
        }
        if (!c.certified && c.residual > tol)
            throw convergence_error("generalized_eigen: residual above tolerance for eigenvalue " +
                                        std::to_string(c.approx),
                                    c.residual);
        out.clusters.push_back(std::move(c));
        k = end;
    }
    return out;
}

/// Number of pencil eigenvalues strictly below sigma, exactly (Sylvester's
/// law applied to A - sigma G).
inline std::size_t count_eigenvalues_below(const ExactMatrix& a, const ExactMatrix& g, const Rational& sigma) {
    return inertia(a - sigma * g).negative;
}

} // namespace qc7
