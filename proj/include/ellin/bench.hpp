#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ellin/ellipsoid.hpp"
#include "ellin/errors.hpp"
#include "ellin/inclusion.hpp"
#include "ellin/linalg.hpp"
#include "ellin/matrix.hpp"

// Deterministic benchmark instances with known containment labels. A raw
// problem is drawn in spectral coordinates, its minimal inflation factor is
// measured, and the exact scaling law gamma(c/sqrt(s), s*lambda) = gamma/s is
// used to rescale it onto a target factor: below 1 for contained cases, above
// 1 for non-contained ones. A rejection sieve keeps every instance away from
// the cheap pretests so the corpus exercises the full decision path.

namespace ellin::bench {

struct BenchInstance {
    Ellipsoid inner;
    Ellipsoid outer;
    bool inside_label = false;
    double target_gamma = 0.0;
    std::size_t attempts = 0;
};

namespace detail {

// Random orthogonal matrix: Gram-Schmidt over a Gaussian square matrix.
inline Matrix random_orthogonal(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix q(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vector col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = gauss(rng);
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += q(i, k) * col[i];
            for (std::size_t i = 0; i < n; ++i) col[i] -= proj * q(i, k);
        }
        double nrm = norm2(col);
        if (nrm < 1e-12) {
            // Degenerate draw; replace with a coordinate direction and redo
            // the projection once.
            std::fill(col.begin(), col.end(), 0.0);
            col[j] = 1.0;
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += q(i, k) * col[i];
                for (std::size_t i = 0; i < n; ++i) col[i] -= proj * q(i, k);
            }
            nrm = norm2(col);
        }
        for (std::size_t i = 0; i < n; ++i) q(i, j) = col[i] / nrm;
    }
    return q;
}

inline Matrix rotated_diagonal(const Matrix& q, const Vector& d) {
    const std::size_t n = d.size();
    Matrix scaled = q;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= d[j];
    Matrix m = matmul(scaled, transpose(q));
    // Round off the asymmetry the two products leave behind.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

}  // namespace detail

// Instance (seed, n, case_id); even case ids are contained, odd ones are not.
inline BenchInstance generate_instance(std::uint64_t seed, std::size_t n,
                                       std::size_t case_id) {
    if (n == 0) throw DimensionMismatch("generate_instance: dimension must be positive");
    std::seed_seq seq{seed, static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(case_id)};
    std::mt19937_64 rng(seq);
    const bool inside = case_id % 2 == 0;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> target_in(0.5, 0.95);
    std::uniform_real_distribution<double> target_out(1.05, 2.0);
    const double log_lo = std::log(0.5);
    const double log_hi = std::log(50.0);

    for (std::size_t attempt = 1; attempt <= 10000; ++attempt) {
        const double gamma_t = inside ? target_in(rng) : target_out(rng);

        Vector lambda(n);
        for (double& v : lambda)
            v = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
        std::sort(lambda.begin(), lambda.end());

        Vector dir(n);
        for (double& v : dir) v = gauss(rng);
        const double dn = norm2(dir);
        if (dn < 1e-12) continue;
        const double rho = 0.2 + 0.5 * unit(rng);
        Vector c_bar = (rho / dn) * dir;

        // Measured factor of the raw draw, then the exact rescale onto the
        // target.
        const MaximizeResult raw = maximize_dual(normalized_from_spectrum(lambda, c_bar));
        const double gamma0 = -raw.value;
        if (!(gamma0 > 0.0)) continue;
        const double s = gamma0 / gamma_t;

        Vector lambda_f(n);
        for (std::size_t i = 0; i < n; ++i) lambda_f[i] = s * lambda[i];
        const double shrink = 1.0 / std::sqrt(s);
        Vector c_bar_f = shrink * c_bar;

        // Sieve: stay clear of every pretest so the bisection path is the
        // thing the corpus measures.
        const double c_norm = norm2(c_bar_f);
        const double lambda_min_f = lambda_f.front();
        if (lambda_min_f < 1.0 + 1e-6) continue;
        if (c_norm > 0.999 || c_norm < 1e-3) continue;
        if (1.0 - c_norm * c_norm < (1.0 + 1e-6) / lambda_min_f) continue;

        // Un-normalize through a random outer ellipsoid.
        const Matrix q = detail::random_orthogonal(n, rng);
        const Matrix q0 = detail::random_orthogonal(n, rng);
        Vector mu(n);
        for (double& v : mu) v = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
        Vector c0(n);
        for (double& v : c0) v = sym(rng);

        const Matrix p_tilde = detail::rotated_diagonal(q, lambda_f);
        const Matrix p0 = detail::rotated_diagonal(q0, mu);
        const CholeskyFactor l0 = cholesky(SymMatrix(p0));

        // P = L0 P_tilde L0^T, c = c0 + L0^{-T} c_tilde.
        const Matrix p = matmul(matmul(l0.L, p_tilde), transpose(l0.L));
        const Vector c_tilde = matvec(q, c_bar_f);
        const Vector c = solve_lower_transposed(l0, c_tilde) + c0;

        return BenchInstance{Ellipsoid(c, SymMatrix(p)),
                             Ellipsoid(c0, SymMatrix(p0)), inside, gamma_t, attempt};
    }
    throw NoConvergence("generate_instance: rejection sieve never accepted a draw");
}

}  // namespace ellin::bench
