#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ellin/errors.hpp"
#include "ellin/linalg.hpp"
#include "ellin/matrix.hpp"

namespace ellin {

// Solid ellipsoid {x : (x - center)^T shape (x - center) <= 1}. The shape
// matrix is kept symmetric by construction; positive definiteness is checked
// where the algorithms need it (factorization or spectrum).
struct Ellipsoid {
    Vector center;
    SymMatrix shape;

    Ellipsoid(Vector c, SymMatrix p) : center(std::move(c)), shape(std::move(p)) {
        if (center.size() != shape.n())
            throw DimensionMismatch("Ellipsoid: center length disagrees with shape order");
        if (!all_finite(center)) throw Error("Ellipsoid: center must be finite");
    }

    std::size_t dim() const { return center.size(); }
};

// (x - center)^T shape (x - center): below 1 inside, 1 on the boundary.
inline double shape_norm_sq(const Ellipsoid& e, const Vector& x) {
    if (x.size() != e.dim())
        throw DimensionMismatch("shape_norm_sq: point dimension disagrees");
    return quadratic_form(e.shape.entries(), x - e.center);
}

inline bool contains(const Ellipsoid& e, const Vector& x,
                     double tol = tolerances::kMembership) {
    return shape_norm_sq(e, x) <= 1.0 + tol;
}

// Inner/outer pair reduced to coordinates where the outer ellipsoid is the
// unit ball and the inner shape is diagonal.
//
// With P0 = L0 L0^T the affine map x -> L0^T (x - c0) sends the outer
// ellipsoid to the unit ball, the inner center to c_tilde and the inner shape
// to P_tilde = L0^{-1} P L0^{-T}. Diagonalizing P_tilde = V diag(lambda) V^T
// (lambda ascending) rotates the center once more to c_bar = V^T c_tilde.
struct NormalizedProblem {
    std::size_t dim = 0;
    Vector c_tilde;
    Vector lambda;      // eigenvalues of P_tilde, ascending
    Matrix eigvectors;  // columns are the matching eigenvectors
    Vector c_bar;
    // Indices i with c_bar[i] far enough from zero to contribute a pole term.
    std::vector<std::size_t> support;
    double lambda_min = 0.0;
    double c_sq = 0.0;  // |c_tilde|^2 = |c_bar|^2
    // True when some support index sits in the bottom eigenspace, which makes
    // the dual domain open at 1/lambda_min.
    bool lower_open = false;
    // Kept so results can be mapped back to the original coordinates.
    CholeskyFactor outer_factor;
    Vector outer_center;

    double interval_lo() const { return 1.0 / lambda_min; }
    double interval_hi() const { return 1.0 - c_sq; }
};

namespace detail {
// Fills support, lower_open and c_sq from lambda and c_bar.
inline void finish_support(NormalizedProblem& np) {
    np.lambda_min = np.lambda.front();
    np.c_sq = dot(np.c_bar, np.c_bar);
    np.support.clear();
    np.lower_open = false;
    const double support_cut = tolerances::kSupportRel * (1.0 + std::sqrt(np.c_sq));
    const double bottom_cut = np.lambda_min * (1.0 + tolerances::kSpectralRel);
    for (std::size_t i = 0; i < np.dim; ++i) {
        if (std::abs(np.c_bar[i]) > support_cut) {
            np.support.push_back(i);
            if (np.lambda[i] <= bottom_cut) np.lower_open = true;
        }
    }
}
}  // namespace detail

// Normalization against an already factored outer ellipsoid. Useful when many
// inner ellipsoids are checked against the same outer one.
inline NormalizedProblem normalize_given(const CholeskyFactor& outer_factor,
                                         const Vector& outer_center,
                                         const Ellipsoid& inner) {
    const std::size_t n = outer_center.size();
    if (inner.dim() != n)
        throw DimensionMismatch("normalize: ellipsoid dimensions disagree");

    NormalizedProblem np{.outer_factor = outer_factor, .outer_center = outer_center};
    np.dim = n;
    np.c_tilde = matvec_transposed(outer_factor.L, inner.center - outer_center);

    // P_tilde = L0^{-1} P L0^{-T} through two triangular solves; the second
    // solve works on the transpose of the first result, so no inverse and no
    // explicit transpose of a solve output is needed.
    Matrix y = solve_lower_triangular(outer_factor, inner.shape.entries());
    Matrix p_tilde = solve_lower_triangular(outer_factor, transpose(y));
    SpectralDecomposition es = sym_eig(SymMatrix(std::move(p_tilde)));
    np.lambda = std::move(es.eigenvalues);
    np.eigvectors = std::move(es.eigenvectors);
    np.lambda_min = np.lambda.front();
    if (!(np.lambda_min > 0.0))
        throw NotPositiveDefinite("normalize: inner shape is not positive definite");

    np.c_bar = matvec_transposed(np.eigvectors, np.c_tilde);
    detail::finish_support(np);
    return np;
}

// Problem assembled directly from a spectrum and a rotated center, as if the
// outer ellipsoid were the unit ball and the inner shape already diagonal.
// lambda must be ascending and positive.
inline NormalizedProblem normalized_from_spectrum(Vector lambda, Vector c_bar) {
    const std::size_t n = lambda.size();
    if (n == 0 || c_bar.size() != n)
        throw DimensionMismatch("normalized_from_spectrum: lengths disagree or empty");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (lambda[i] > lambda[i + 1])
            throw Error("normalized_from_spectrum: lambda must be ascending");
    if (!(lambda.front() > 0.0))
        throw NotPositiveDefinite("normalized_from_spectrum: lambda must be positive");

    NormalizedProblem np{.outer_factor = CholeskyFactor{Matrix::identity(n)},
                         .outer_center = Vector(n, 0.0)};
    np.dim = n;
    np.c_tilde = c_bar;
    np.lambda = std::move(lambda);
    np.eigvectors = Matrix::identity(n);
    np.c_bar = std::move(c_bar);
    detail::finish_support(np);
    return np;
}

inline NormalizedProblem normalize(const Ellipsoid& inner, const Ellipsoid& outer) {
    if (inner.dim() != outer.dim())
        throw DimensionMismatch("normalize: ellipsoid dimensions disagree");
    return normalize_given(cholesky(outer.shape), outer.center, inner);
}

// Inverse of the normalizing map: x = L0^{-T} x_tilde + c0.
inline Vector denormalize_point(const NormalizedProblem& np, const Vector& x_tilde) {
    return solve_lower_transposed(np.outer_factor, x_tilde) + np.outer_center;
}

}  // namespace ellin
