#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "ellin/bench.hpp"
#include "ellin/dual_function.hpp"
#include "ellin/ellipsoid.hpp"
#include "ellin/inclusion.hpp"
#include "ellin/linalg.hpp"
#include "ellin/matrix.hpp"

namespace test_support {

using ellin::CholeskyFactor;
using ellin::Ellipsoid;
using ellin::Matrix;
using ellin::SymMatrix;
using ellin::Vector;
using ellin::operator+;
using ellin::operator-;
using ellin::operator*;

inline Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline Ellipsoid unit_ball(std::size_t n) {
    return Ellipsoid(Vector(n, 0.0), SymMatrix(Matrix::identity(n)));
}

// Diagonal-shape ellipsoid, handy for instances with a known spectrum.
inline Ellipsoid diag_ellipsoid(Vector center, const Vector& lambda) {
    Matrix m(lambda.size(), lambda.size(), 0.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) m(i, i) = lambda[i];
    return Ellipsoid(std::move(center), SymMatrix(std::move(m)));
}

// Derivative-free concave maximization by ternary search; independent of the
// Newton/bisection logic under test.
template <typename F>
std::pair<double, double> ternary_max(const F& f, double lo, double hi,
                                      double width = 1e-13) {
    double l = lo;
    double u = hi;
    while (u - l > width) {
        const double m1 = l + (u - l) / 3.0;
        const double m2 = u - (u - l) / 3.0;
        if (f(m1) < f(m2)) l = m1;
        else u = m2;
    }
    const double m = 0.5 * (l + u);
    return {m, f(m)};
}

// A random pair in spectral coordinates rescaled so its minimal inflation
// factor is exactly gamma_target, then pushed through a random outer
// ellipsoid. force_degenerate zeroes the rotated center on the bottom
// eigenspace (made two-dimensional) and shrinks it until the dual maximum
// sits at the domain endpoint.
struct LabeledPair {
    Ellipsoid inner;
    Ellipsoid outer;
    double gamma = 0.0;
    bool degenerate = false;
};

inline LabeledPair make_scaled_pair(std::mt19937_64& rng, std::size_t n,
                                    double gamma_target, bool force_degenerate = false) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int attempt = 0; attempt < 200; ++attempt) {
        Vector lambda(n);
        for (double& v : lambda) v = std::exp(std::log(0.5) + unit(rng) * std::log(100.0));
        std::sort(lambda.begin(), lambda.end());
        if (force_degenerate && n >= 2) lambda[1] = lambda[0];

        Vector c_bar(n);
        for (double& v : c_bar) v = gauss(rng);
        const double nn = ellin::norm2(c_bar);
        if (nn < 1e-12) continue;
        const double rho = 0.2 + 0.5 * unit(rng);
        for (double& v : c_bar) v *= rho / nn;

        if (force_degenerate) {
            c_bar[0] = 0.0;
            if (n >= 2) c_bar[1] = 0.0;
            if (ellin::norm2(c_bar) < 1e-6) continue;
        }

        ellin::MaximizeResult raw{};
        bool shrunk_ok = true;
        if (force_degenerate) {
            // Shrink the center until the maximum lands on the endpoint.
            int tries = 0;
            for (;; ++tries) {
                if (tries == 60) {
                    shrunk_ok = false;
                    break;
                }
                raw = ellin::maximize_dual(ellin::normalized_from_spectrum(lambda, c_bar));
                if (raw.at_lower_boundary) break;
                for (double& v : c_bar) v *= 0.5;
                if (ellin::norm2(c_bar) < 1e-10) {
                    shrunk_ok = false;
                    break;
                }
            }
            if (!shrunk_ok) continue;
        } else {
            raw = ellin::maximize_dual(ellin::normalized_from_spectrum(lambda, c_bar));
        }

        const double gamma0 = -raw.value;
        if (!(gamma0 > 0.0)) continue;
        const double s = gamma0 / gamma_target;
        Vector lambda_f(n);
        for (std::size_t i = 0; i < n; ++i) lambda_f[i] = s * lambda[i];
        Vector c_bar_f = (1.0 / std::sqrt(s)) * c_bar;

        const Matrix q = ellin::bench::detail::random_orthogonal(n, rng);
        const Matrix q0 = ellin::bench::detail::random_orthogonal(n, rng);
        Vector mu(n);
        for (double& v : mu) v = std::exp(std::log(0.5) + unit(rng) * std::log(100.0));
        Vector c0(n);
        for (double& v : c0) v = sym(rng);

        const Matrix p_tilde = ellin::bench::detail::rotated_diagonal(q, lambda_f);
        const Matrix p0 = ellin::bench::detail::rotated_diagonal(q0, mu);
        const CholeskyFactor l0 = ellin::cholesky(SymMatrix(p0));
        const Matrix p = matmul(matmul(l0.L, p_tilde), transpose(l0.L));
        const Vector c_tilde = matvec(q, c_bar_f);
        const Vector c = solve_lower_transposed(l0, c_tilde) + c0;

        return LabeledPair{Ellipsoid(c, SymMatrix(p)), Ellipsoid(c0, SymMatrix(p0)),
                           gamma_target, force_degenerate};
    }
    throw std::runtime_error("make_scaled_pair: construction failed");
}

// Random symmetric matrix with entries in [-1, 1].
inline SymMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = sym(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = sym(rng);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return SymMatrix(std::move(m));
}

}  // namespace test_support
