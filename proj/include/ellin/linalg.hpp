#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "ellin/errors.hpp"
#include "ellin/matrix.hpp"

namespace ellin {

namespace tolerances {
// Relative symmetry tolerance accepted on input matrices.
inline constexpr double kSymmetryRel = 1e-8;
// Membership slack for quadratic-form tests.
inline constexpr double kMembership = 1e-10;
// Relative threshold below which a rotated center component is treated as zero.
inline constexpr double kSupportRel = 1e-12;
// Evaluations this close to an open left endpoint are rejected as out of domain.
inline constexpr double kNearPole = 1e-13;
// Relative nudge applied to an open left endpoint before evaluating there.
inline constexpr double kLowerNudge = 1e-9;
// Relative tolerance for spectral comparisons (eigenvalue equality, definiteness).
inline constexpr double kSpectralRel = 1e-9;
// Default bracket width at which bisection declares touching.
inline constexpr double kDefaultEps = 1e-12;
// Default gradient/touching tolerance for scaling computations.
inline constexpr double kDefaultTol = 1e-10;
}  // namespace tolerances

// Square symmetric matrix. Construction symmetrizes (M + M^T)/2 and rejects
// inputs whose asymmetry exceeds the relative tolerance.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m) : entries_(std::move(m)) {
        if (entries_.rows() == 0 || entries_.rows() != entries_.cols())
            throw DimensionMismatch("SymMatrix: matrix must be square and nonempty");
        if (!all_finite(entries_))
            throw Error("SymMatrix: entries must be finite");
        const double scale = std::max(1.0, max_abs(entries_));
        const std::size_t n = entries_.rows();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(entries_(i, j) - entries_(j, i)) > tolerances::kSymmetryRel * scale)
                    throw Error("SymMatrix: input is not symmetric within tolerance");
                const double v = 0.5 * (entries_(i, j) + entries_(j, i));
                entries_(i, j) = v;
                entries_(j, i) = v;
            }
        }
    }

    std::size_t n() const { return entries_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const Matrix& entries() const { return entries_; }

private:
    Matrix entries_;
};

// Lower-triangular Cholesky factor, L L^T = input, diagonal strictly positive.
struct CholeskyFactor {
    Matrix L;
    std::size_t n() const { return L.rows(); }
};

// Eigenvalues ascending, eigenvectors as orthonormal columns.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

// Unblocked Cholesky. Pivots are required to clear n * eps * (largest diagonal
// entry); anything below that is reported as not positive definite.
inline CholeskyFactor cholesky(const SymMatrix& m) {
    const std::size_t n = m.n();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, m(i, i));
    if (max_diag <= 0.0)
        throw NotPositiveDefinite("cholesky: no positive diagonal entry");
    const double threshold =
        static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;

    Matrix L(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = m(j, j);
        const double* lj = L.row(j);
        for (std::size_t k = 0; k < j; ++k) s -= lj[k] * lj[k];
        if (s <= threshold)
            throw NotPositiveDefinite("cholesky: pivot below positivity threshold");
        const double d = std::sqrt(s);
        L(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = m(i, j);
            const double* li = L.row(i);
            for (std::size_t k = 0; k < j; ++k) t -= li[k] * lj[k];
            L(i, j) = t / d;
        }
    }
    return CholeskyFactor{std::move(L)};
}

namespace detail {
inline void check_solvable_diagonal(const Matrix& L) {
    for (std::size_t i = 0; i < L.rows(); ++i)
        if (!(std::abs(L(i, i)) >= std::numeric_limits<double>::min()))
            throw SingularFactor("triangular solve: zero diagonal entry");
}
}  // namespace detail

// Solves L X = B by forward substitution, column by column.
inline Matrix solve_lower_triangular(const CholeskyFactor& f, const Matrix& b) {
    const Matrix& L = f.L;
    const std::size_t n = L.rows();
    if (b.rows() != n) throw DimensionMismatch("solve_lower_triangular: row count disagrees");
    detail::check_solvable_diagonal(L);
    Matrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = L.row(i);
        double* xi = x.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = li[k];
            if (lik == 0.0) continue;
            const double* xk = x.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) xi[j] -= lik * xk[j];
        }
        const double d = li[i];
        for (std::size_t j = 0; j < b.cols(); ++j) xi[j] /= d;
    }
    return x;
}

inline Vector solve_lower_triangular(const CholeskyFactor& f, const Vector& b) {
    const Matrix& L = f.L;
    const std::size_t n = L.rows();
    if (b.size() != n) throw DimensionMismatch("solve_lower_triangular: length disagrees");
    detail::check_solvable_diagonal(L);
    Vector x = b;
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = L.row(i);
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
        x[i] = s / li[i];
    }
    return x;
}

// Solves L^T x = b by back substitution (no transpose is formed).
inline Vector solve_lower_transposed(const CholeskyFactor& f, const Vector& b) {
    const Matrix& L = f.L;
    const std::size_t n = L.rows();
    if (b.size() != n) throw DimensionMismatch("solve_lower_transposed: length disagrees");
    detail::check_solvable_diagonal(L);
    Vector x = b;
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= L(k, ii) * x[k];
        x[ii] = s / L(ii, ii);
    }
    return x;
}

// Symmetric eigendecomposition: Householder reduction to tridiagonal form with
// accumulated transforms, then QL iterations with implicit shifts, then an
// ascending sort. Bounded at 50 QL iterations per eigenvalue.
inline SpectralDecomposition sym_eig(const SymMatrix& m) {
    using std::abs;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(m.n());
    Matrix z = m.entries();
    Vector d(static_cast<std::size_t>(n), 0.0);
    Vector e(static_cast<std::size_t>(n), 0.0);

    // Householder reduction.
    for (std::ptrdiff_t i = n - 1; i >= 1; --i) {
        const std::ptrdiff_t l = i - 1;
        double h = 0.0;
        double scale = 0.0;
        if (l > 0) {
            for (std::ptrdiff_t k = 0; k <= l; ++k) scale += abs(z(i, k));
            if (scale == 0.0) {
                e[i] = z(i, l);
            } else {
                for (std::ptrdiff_t k = 0; k <= l; ++k) {
                    z(i, k) /= scale;
                    h += z(i, k) * z(i, k);
                }
                double f = z(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                z(i, l) = f - g;
                f = 0.0;
                for (std::ptrdiff_t j = 0; j <= l; ++j) {
                    z(j, i) = z(i, j) / h;
                    g = 0.0;
                    for (std::ptrdiff_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
                    for (std::ptrdiff_t k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
                    e[j] = g / h;
                    f += e[j] * z(i, j);
                }
                const double hh = f / (h + h);
                for (std::ptrdiff_t j = 0; j <= l; ++j) {
                    f = z(i, j);
                    g = e[j] - hh * f;
                    e[j] = g;
                    for (std::ptrdiff_t k = 0; k <= j; ++k)
                        z(j, k) -= f * e[k] + g * z(i, k);
                }
            }
        } else {
            e[i] = z(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::ptrdiff_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::ptrdiff_t k = 0; k < i; ++k) g += z(i, k) * z(k, j);
                for (std::ptrdiff_t k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
            }
        }
        d[i] = z(i, i);
        z(i, i) = 1.0;
        for (std::ptrdiff_t j = 0; j < i; ++j) {
            z(j, i) = 0.0;
            z(i, j) = 0.0;
        }
    }

    // QL with implicit shifts.
    for (std::ptrdiff_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (std::ptrdiff_t l = 0; l < n; ++l) {
        int iter = 0;
        std::ptrdiff_t mm;
        do {
            for (mm = l; mm < n - 1; ++mm) {
                const double dd = abs(d[mm]) + abs(d[mm + 1]);
                if (abs(e[mm]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (mm != l) {
                if (iter++ == 50)
                    throw NoConvergence("sym_eig: QL iteration budget exhausted");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[mm] - d[l] + e[l] / (g + (g >= 0.0 ? abs(r) : -abs(r)));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                std::ptrdiff_t i = mm - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[mm] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (std::ptrdiff_t k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[mm] = 0.0;
            }
        } while (mm != l);
    }

    // Ascending sort with matching column permutation.
    for (std::ptrdiff_t i = 0; i < n - 1; ++i) {
        std::ptrdiff_t kmin = i;
        for (std::ptrdiff_t j = i + 1; j < n; ++j)
            if (d[j] < d[kmin]) kmin = j;
        if (kmin != i) {
            std::swap(d[i], d[kmin]);
            for (std::ptrdiff_t k = 0; k < n; ++k) std::swap(z(k, i), z(k, kmin));
        }
    }

    return SpectralDecomposition{std::move(d), std::move(z)};
}

}  // namespace ellin
