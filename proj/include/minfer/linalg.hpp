#ifndef MINFER_LINALG_HPP
#define MINFER_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include "minfer/matrix.hpp"

namespace minfer {

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LinalgTolerances {
    double sigma_tol = 1e-10;  // relative singularity threshold
    double delta_tol = 1e-12;  // swap-update denominator guard, relative to ||C||
    int refactor_period = 64;  // full refactorization every K swaps
    double drift_bound = 1e-6; // max allowed ||C*inv - I|| drift before refactor
};

namespace detail {

// Lower Cholesky factor of a symmetric PSD matrix. Returns nullopt when a
// pivot falls below sigma_tol * max diagonal (rank deficiency).
inline std::optional<Matrix> cholesky(const Matrix& c, double sigma_tol) {
    const std::size_t n = c.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(c(i, i)));
    const double pivot_floor = sigma_tol * std::max(max_diag, 1e-300);

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = c(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= pivot_floor) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = c(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

inline Vector cholesky_solve(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix: a = v diag(w) v^T.
inline void jacobi_eigen(Matrix a, Vector& w, Matrix& v) {
    const std::size_t n = a.rows();
    v = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-300) break;
        double scale = 0.0;
        for (std::size_t p = 0; p < n; ++p) scale = std::max(scale, std::abs(a(p, p)));
        if (std::sqrt(off) <= 1e-15 * std::max(scale, 1.0)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = cs * akp - sn * akq;
                    a(k, q) = sn * akp + cs * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = cs * apk - sn * aqk;
                    a(q, k) = sn * apk + cs * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = cs * vkp - sn * vkq;
                    v(k, q) = sn * vkp + cs * vkq;
                }
            }
        }
    }
    w.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) w[i] = a(i, i);
}

inline void check_symmetric(const Matrix& c) {
    if (c.rows() != c.cols()) throw std::invalid_argument("matrix not square");
    if (max_asymmetry(c) > 1e-9 * std::max(max_abs(c), 1e-300))
        throw std::invalid_argument("matrix not symmetric");
}

} // namespace detail

/// Minimum-norm least-squares solve of c x = b for symmetric PSD c, via
/// eigendecomposition with eigenvalues below sigma_tol * max|eigenvalue|
/// treated as zero.
inline Vector pseudo_solve(const Matrix& c, const Vector& b,
                           const LinalgTolerances& tol = {}) {
    detail::check_symmetric(c);
    if (c.rows() != b.size()) throw std::invalid_argument("pseudo_solve: dimension mismatch");
    Vector w;
    Matrix v;
    detail::jacobi_eigen(c, w, v);
    const std::size_t n = w.size();
    double wmax = 0.0;
    for (double e : w) wmax = std::max(wmax, std::abs(e));
    const double cut = tol.sigma_tol * wmax;

    Vector x(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(w[k]) <= cut) continue;
        double coef = 0.0;
        for (std::size_t i = 0; i < n; ++i) coef += v(i, k) * b[i];
        coef /= w[k];
        for (std::size_t i = 0; i < n; ++i) x[i] += coef * v(i, k);
    }
    return x;
}

/// Solve c x = b for symmetric c. Cholesky when nonsingular; pseudo_solve
/// fallback when rank deficiency is detected. If `used_pseudo` is non-null it
/// reports which path ran.
inline Vector solve_spd(const Matrix& c, const Vector& b,
                        const LinalgTolerances& tol = {},
                        bool* used_pseudo = nullptr) {
    detail::check_symmetric(c);
    if (c.rows() != b.size()) throw std::invalid_argument("solve_spd: dimension mismatch");
    if (auto l = detail::cholesky(c, tol.sigma_tol)) {
        if (used_pseudo) *used_pseudo = false;
        return detail::cholesky_solve(*l, b);
    }
    if (used_pseudo) *used_pseudo = true;
    return pseudo_solve(c, b, tol);
}

/// Explicit inverse of a symmetric matrix, maintained across O(r^2) row/column
/// exchanges. Owns a copy of the current matrix so it can refactorize.
class MaintainedInverse {
public:
    MaintainedInverse(Matrix c, LinalgTolerances tol = {})
        : c_(std::move(c)), tol_(tol) {
        detail::check_symmetric(c_);
        refactor();
    }

    const Matrix& inverse() const { return inv_; }
    const Matrix& matrix() const { return c_; }
    std::size_t size() const { return c_.rows(); }
    int swaps_since_refactor() const { return swaps_; }

    Vector apply(const Vector& b) const { return matvec(inv_, b); }

    /// 1-norm condition estimate ||C||_1 * ||C^-1||_1.
    double condition_estimate() const {
        return one_norm(c_) * one_norm(inv_);
    }

    /// Replace row and column `i` of the matrix with `new_row` (new diagonal at
    /// position i) and update the inverse, normally via two rank-one
    /// corrections in O(r^2). Falls back to a full refactorization when the
    /// update denominator is unsafe, the drift check fails, or the refactor
    /// period elapses. Throws SingularMatrixError when the new matrix is
    /// singular.
    void swap_row_col(std::size_t i, const Vector& new_row) {
        const std::size_t r = size();
        if (i >= r) throw std::invalid_argument("swap_row_col: index out of range");
        if (new_row.size() != r) throw std::invalid_argument("swap_row_col: row length mismatch");

        // delta = new_row - old_row; C' = C + e_i u^T + u e_i^T with
        // u = delta - (delta_i / 2) e_i.
        Vector u(r);
        for (std::size_t j = 0; j < r; ++j) u[j] = new_row[j] - c_(i, j);
        u[i] *= 0.5;

        // Write the new row/column into the stored matrix first so a fallback
        // refactorization sees the updated system.
        for (std::size_t j = 0; j < r; ++j) {
            c_(i, j) = new_row[j];
            c_(j, i) = new_row[j];
        }

        for (std::size_t j = 0; j < r; ++j)
            norm_est_ = std::max(norm_est_, std::abs(new_row[j]));
        const double guard = tol_.delta_tol * std::max(norm_est_, 1e-300);
        if (!rank_one_update_pair(i, u, guard) || !row_consistent(i) ||
            ++swaps_ >= tol_.refactor_period) {
            refactor();
        }
    }

    /// Full O(r^3) refactorization from the stored matrix.
    void refactor() {
        norm_est_ = max_abs(c_);
        auto l = detail::cholesky(c_, tol_.sigma_tol);
        if (!l) throw SingularMatrixError("matrix is singular; use pseudo_solve");
        inv_ = Matrix(size(), size());
        Vector e(size(), 0.0);
        for (std::size_t j = 0; j < size(); ++j) {
            e[j] = 1.0;
            Vector col = detail::cholesky_solve(*l, e);
            for (std::size_t k = 0; k < size(); ++k) inv_(k, j) = col[k];
            e[j] = 0.0;
        }
        swaps_ = 0;
    }

private:
    static double one_norm(const Matrix& m) {
        double mx = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
            mx = std::max(mx, s);
        }
        return mx;
    }

    // Sherman-Morrison for C + e_i u^T followed by C + u e_i^T.
    // Returns false when a denominator is below the guard.
    bool rank_one_update_pair(std::size_t i, const Vector& u, double guard) {
        const std::size_t r = size();

        // inv <- inv - (inv e_i)(u^T inv) / (1 + u^T inv e_i)
        Vector inv_ei(r), ut_inv(r, 0.0);
        for (std::size_t k = 0; k < r; ++k) inv_ei[k] = inv_(k, i);
        // accumulate u^T inv row by row; walking columns of the row-major
        // storage is a cache-miss cascade at larger r
        for (std::size_t k = 0; k < r; ++k) {
            const double uk = u[k];
            if (uk == 0.0) continue;
            for (std::size_t j = 0; j < r; ++j) ut_inv[j] += uk * inv_(k, j);
        }
        const double d1 = 1.0 + ut_inv[i];
        if (std::abs(d1) < guard) return false;
        for (std::size_t a = 0; a < r; ++a)
            for (std::size_t b = 0; b < r; ++b)
                inv_(a, b) -= inv_ei[a] * ut_inv[b] / d1;

        // inv <- inv - (inv u)(e_i^T inv) / (1 + e_i^T inv u)
        Vector inv_u(r, 0.0), ei_inv(r);
        for (std::size_t a = 0; a < r; ++a) {
            double s = 0.0;
            for (std::size_t k = 0; k < r; ++k) s += inv_(a, k) * u[k];
            inv_u[a] = s;
        }
        for (std::size_t j = 0; j < r; ++j) ei_inv[j] = inv_(i, j);
        const double d2 = 1.0 + inv_u[i];
        if (std::abs(d2) < guard) return false;
        for (std::size_t a = 0; a < r; ++a)
            for (std::size_t b = 0; b < r; ++b)
                inv_(a, b) -= inv_u[a] * ei_inv[b] / d2;

        return true;
    }

    // O(r^2) drift check on the exchanged row: row i of C*inv must equal e_i^T.
    bool row_consistent(std::size_t i) const {
        const std::size_t r = size();
        Vector s(r, 0.0);
        for (std::size_t k = 0; k < r; ++k) {
            const double cik = c_(i, k);
            if (cik == 0.0) continue;
            for (std::size_t j = 0; j < r; ++j) s[j] += cik * inv_(k, j);
        }
        for (std::size_t j = 0; j < r; ++j)
            if (std::abs(s[j] - (i == j ? 1.0 : 0.0)) > tol_.drift_bound) return false;
        return true;
    }

    Matrix c_;
    Matrix inv_;
    LinalgTolerances tol_;
    int swaps_ = 0;
    double norm_est_ = 0.0; // running upper bound on max |C_ij| for the guard
};

/// Inverse of a symmetric nonsingular matrix. Throws SingularMatrixError when
/// rank deficient (callers should route singular systems to pseudo_solve).
inline MaintainedInverse invert(const Matrix& c, const LinalgTolerances& tol = {}) {
    return MaintainedInverse(c, tol);
}

} // namespace minfer

#endif
