#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ellin/ellipsoid.hpp"
#include "ellin/errors.hpp"
#include "ellin/linalg.hpp"
#include "ellin/matrix.hpp"

// Slow, independent cross-checks used to validate the fast machinery. Nothing
// here calls the dual-function code, so agreement between the two paths is
// meaningful evidence.

namespace ellin::oracle {

struct OracleReport {
    // max over the inner ellipsoid of (x - c0)^T P0 (x - c0).
    double max_sq_norm = 0.0;
    // A maximizing point, in the original coordinates.
    Vector argmax;
    // Number of seed directions that were polished.
    std::size_t seeds_used = 0;
};

namespace detail {

// Inverse of the standard normal CDF (Acklam's rational approximation,
// ~1.15e-9 relative error, fine for scattering seed directions).
inline double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p <= 0.0) p = 1e-300;
    if (p >= 1.0) p = 1.0 - 1e-16;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Kronecker sequence based on the positive root of x^(d+1) = x + 1. Fills the
// unit cube evenly and is fully deterministic; extending the sequence keeps
// every earlier point.
inline std::vector<Vector> kronecker_points(std::size_t d, std::size_t count) {
    double phi = 1.3;
    for (int it = 0; it < 64; ++it)
        phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(d + 1));
    std::vector<double> alpha(d);
    double a = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        a /= phi;
        alpha[j] = a;
    }
    std::vector<Vector> pts(count, Vector(d, 0.0));
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            double v = 0.5 + static_cast<double>(k + 1) * alpha[j];
            pts[k][j] = v - std::floor(v);
        }
    }
    return pts;
}

// V diag(eigenvalues^(-1/2)) V^T for a decomposed SPD matrix.
inline Matrix inverse_sqrt_from_spectrum(const SpectralDecomposition& es) {
    const std::size_t n = es.eigenvalues.size();
    Matrix scaled = es.eigenvectors;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(es.eigenvalues[j] > 0.0))
            throw NotPositiveDefinite("inverse_sqrt: nonpositive eigenvalue");
        const double s = 1.0 / std::sqrt(es.eigenvalues[j]);
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= s;
    }
    return matmul(scaled, transpose(es.eigenvectors));
}

}  // namespace detail

// Maximizes (x - c0)^T P0 (x - c0) over x in the inner ellipsoid by
// multi-start ascent on the unit sphere of parameters. Substituting
// x = c + P^(-1/2) u turns the objective into |M u + b|^2 with
// M = L0^T P^(-1/2) and b = L0^T (c - c0); the maximum over |u| <= 1 lies on
// the sphere, and u <- M^T(M u + b)/|M^T(M u + b)| never decreases the
// objective. Seeds are the coordinate directions, the direction of b, and a
// deterministic low-discrepancy scatter, so the result is reproducible.
inline OracleReport boundary_max_norm(const Ellipsoid& inner, const Ellipsoid& outer,
                                      std::size_t scatter_count = 0) {
    const std::size_t n = inner.dim();
    if (outer.dim() != n)
        throw DimensionMismatch("boundary_max_norm: ellipsoid dimensions disagree");
    if (scatter_count == 0) scatter_count = std::max<std::size_t>(64, 16 * n);

    const CholeskyFactor l0 = cholesky(outer.shape);
    const SpectralDecomposition es = sym_eig(inner.shape);
    const Matrix p_inv_sqrt = detail::inverse_sqrt_from_spectrum(es);
    const Matrix m = matmul(transpose(l0.L), p_inv_sqrt);
    const Vector b = matvec_transposed(l0.L, inner.center - outer.center);

    const auto objective = [&](const Vector& u) {
        const Vector r = matvec(m, u) + b;
        return dot(r, r);
    };
    const auto polish = [&](Vector u, double& value) {
        value = objective(u);
        for (int it = 0; it < 300; ++it) {
            const Vector g = matvec_transposed(m, matvec(m, u) + b);
            const double gn = norm2(g);
            if (gn == 0.0) break;
            Vector next = (1.0 / gn) * g;
            const double fnext = objective(next);
            if (fnext <= value + 1e-15 * std::max(1.0, value)) {
                if (fnext > value) {
                    value = fnext;
                    u = std::move(next);
                }
                break;
            }
            value = fnext;
            u = std::move(next);
        }
        return u;
    };

    std::vector<Vector> seeds;
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = 1.0;
        seeds.push_back(e);
        e[i] = -1.0;
        seeds.push_back(e);
    }
    const double bn = norm2(b);
    if (bn > 1e-14) {
        seeds.push_back((1.0 / bn) * b);
        seeds.push_back((-1.0 / bn) * b);
    }
    for (const Vector& q : detail::kronecker_points(n, scatter_count)) {
        Vector u(n);
        for (std::size_t j = 0; j < n; ++j) u[j] = detail::inverse_normal_cdf(q[j]);
        const double un = norm2(u);
        if (un == 0.0) continue;
        seeds.push_back((1.0 / un) * u);
    }

    OracleReport report;
    report.seeds_used = seeds.size();
    double best = -1.0;
    Vector best_u;
    for (Vector& s : seeds) {
        double v = 0.0;
        Vector u = polish(std::move(s), v);
        if (v > best) {
            best = v;
            best_u = std::move(u);
        }
    }
    report.max_sq_norm = best;
    report.argmax = inner.center + matvec(p_inv_sqrt, best_u);
    return report;
}

// Minimal inflation factor in one dimension: the farthest point of the
// interval [c - lambda^(-1/2), c + lambda^(-1/2)] from the origin, squared.
inline double gamma_closed_form_1d(double c_bar, double lambda) {
    if (!(lambda > 0.0))
        throw NonPositiveLambda("gamma_closed_form_1d: lambda must be positive");
    const double r = std::abs(c_bar) + 1.0 / std::sqrt(lambda);
    return r * r;
}

// Smallest eigenvalue of the (n+1)x(n+1) block certificate matrix
//
//   [ beta*P_tilde - I          -beta*P_tilde*c_tilde            ]
//   [ (-beta*P_tilde*c_tilde)^T  beta*(c_tilde^T P_tilde c_tilde - 1) + 1 ]
//
// which is positive semidefinite exactly when beta certifies containment.
// P_tilde is reconstructed from the stored spectrum, so this path shares no
// arithmetic with the dual-function evaluation.
inline double containment_certificate_min_eig(const NormalizedProblem& np, double beta) {
    const std::size_t n = np.dim;
    Matrix scaled = np.eigvectors;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= np.lambda[j];
    const Matrix p_tilde = matmul(scaled, transpose(np.eigvectors));
    const Vector pc = matvec(p_tilde, np.c_tilde);
    const double cpc = dot(np.c_tilde, pc);

    Matrix f(n + 1, n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) f(i, j) = beta * p_tilde(i, j);
        f(i, i) -= 1.0;
        f(i, n) = -beta * pc[i];
        f(n, i) = -beta * pc[i];
    }
    f(n, n) = beta * (cpc - 1.0) + 1.0;

    const SpectralDecomposition es = sym_eig(SymMatrix(std::move(f)));
    return es.eigenvalues.front();
}

}  // namespace ellin::oracle
