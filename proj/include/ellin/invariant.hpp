#pragma once

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

namespace ellin {

// Linear system x' = A x + B u + H w under the fixed feedback u = -K x, with
// the disturbance w confined to the convex hull of the listed vertices. P is
// a quadratic Lyapunov shape for the closed loop.
struct DisturbedSystem {
    Matrix A;
    Matrix B;
    Matrix H;
    SymMatrix P;
    Matrix K;
    std::vector<Vector> disturbance_vertices;
};

namespace detail {
inline void validate_system(const DisturbedSystem& sys) {
    const std::size_t n = sys.A.rows();
    if (sys.A.cols() != n) throw DimensionMismatch("system: A must be square");
    if (sys.B.rows() != n) throw DimensionMismatch("system: B row count disagrees with A");
    if (sys.K.rows() != sys.B.cols() || sys.K.cols() != n)
        throw DimensionMismatch("system: K must map states to inputs");
    if (sys.H.rows() != n) throw DimensionMismatch("system: H row count disagrees with A");
    if (sys.P.n() != n) throw DimensionMismatch("system: P order disagrees with A");
    for (const Vector& w : sys.disturbance_vertices)
        if (w.size() != sys.H.cols())
            throw DimensionMismatch("system: disturbance vertex length disagrees with H");
}

inline Matrix closed_loop(const DisturbedSystem& sys) {
    const Matrix bk = matmul(sys.B, sys.K);
    Matrix ac = sys.A;
    for (std::size_t i = 0; i < ac.rows(); ++i)
        for (std::size_t j = 0; j < ac.cols(); ++j) ac(i, j) -= bk(i, j);
    return ac;
}

// S = -(Ac^T P + P Ac), the Lyapunov decrease rate shape. Must be positive
// definite for the feedback to certify decay.
inline SymMatrix decrease_shape(const DisturbedSystem& sys, const Matrix& ac) {
    const Matrix pac = matmul(sys.P.entries(), ac);
    Matrix s(ac.rows(), ac.cols(), 0.0);
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) = -(pac(j, i) + pac(i, j));
    return SymMatrix(std::move(s));
}
}  // namespace detail

// States where the Lyapunov derivative can fail to be negative under the
// fixed disturbance vertex w. Completing the square in
// d/dt x^T P x = -x^T S x + 2 x^T P H w yields the ball
// (x - g)^T S (x - g) <= r with g = S^{-1} P H w and r = g^T S g.
struct ViolationEllipsoid {
    Ellipsoid set;
    Vector vertex;  // the disturbance vertex that produced it
    double r = 0.0;  // squared size before normalization; grows with |w|^2
};

inline ViolationEllipsoid violation_ellipsoid(const DisturbedSystem& sys, const Vector& w) {
    detail::validate_system(sys);
    if (w.size() != sys.H.cols())
        throw DimensionMismatch("violation_ellipsoid: vertex length disagrees with H");

    const Matrix ac = detail::closed_loop(sys);
    const SymMatrix s = detail::decrease_shape(sys, ac);
    const CholeskyFactor ls = cholesky(s);

    const Vector phw = matvec(sys.P.entries(), matvec(sys.H, w));
    const Vector g = solve_lower_transposed(ls, solve_lower_triangular(ls, phw));
    const double r = dot(g, phw);  // g^T S g with S g = P H w
    if (!(r > 0.0))
        throw ZeroDisturbance("violation_ellipsoid: disturbance vertex maps to zero");

    Matrix shape = s.entries();
    for (std::size_t i = 0; i < shape.rows(); ++i)
        for (std::size_t j = 0; j < shape.cols(); ++j) shape(i, j) /= r;
    return ViolationEllipsoid{Ellipsoid(g, SymMatrix(std::move(shape))), w, r};
}

struct InvariantLevel {
    // Smallest gamma with every violation ellipsoid inside {x^T P x <= gamma}.
    double gamma = 0.0;
    std::vector<ViolationEllipsoid> pieces;
    CoverResult cover;
};

// Level of the Lyapunov function whose sublevel set is invariant for every
// disturbance in the hull: outside it the derivative is negative for all
// vertices, and by linearity for the whole hull.
inline InvariantLevel invariant_level(const DisturbedSystem& sys,
                                      bool exploit_symmetry = true) {
    detail::validate_system(sys);
    InvariantLevel out;
    for (const Vector& w : sys.disturbance_vertices) {
        // Vertices that map to zero disturb nothing and contribute level 0.
        if (norm2(matvec(sys.H, w)) == 0.0) continue;
        out.pieces.push_back(violation_ellipsoid(sys, w));
    }
    if (out.pieces.empty()) return out;

    std::vector<Ellipsoid> parts;
    parts.reserve(out.pieces.size());
    for (const ViolationEllipsoid& v : out.pieces) parts.push_back(v.set);
    const Ellipsoid tmpl(Vector(sys.A.rows(), 0.0), sys.P);
    out.cover = cover(parts, tmpl, exploit_symmetry);
    out.gamma = out.cover.gamma;
    return out;
}

struct SimulationResult {
    std::vector<Vector> trajectory;  // states at every step, x0 first
    bool violation = false;
    double violation_time = 0.0;
    std::size_t violation_step = 0;
};

// Integrates the closed loop under a randomly switching vertex-hull
// disturbance and watches for Lyapunov increase outside the gamma level set.
// The disturbance is piecewise constant over integration steps, drawn as a
// uniform convex combination of the vertices; RK4 handles each step. A
// violation is recorded when a state outside the level set fails to strictly
// decrease the Lyapunov value at the next step.
inline SimulationResult simulate_check(const DisturbedSystem& sys, double gamma,
                                       const Vector& x0, double horizon = 30.0,
                                       double dt = 1e-3,
                                       std::uint64_t disturbance_seed = 0) {
    detail::validate_system(sys);
    if (x0.size() != sys.A.rows())
        throw DimensionMismatch("simulate_check: state length disagrees with A");
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw Error("simulate_check: horizon and dt must be positive");

    const Matrix ac = detail::closed_loop(sys);
    const std::size_t nv = sys.disturbance_vertices.size();
    std::mt19937_64 rng(disturbance_seed);
    std::exponential_distribution<double> expo(1.0);

    const auto draw_disturbance = [&]() {
        Vector w(sys.H.cols(), 0.0);
        if (nv == 0) return w;
        Vector theta(nv);
        double total = 0.0;
        for (std::size_t i = 0; i < nv; ++i) {
            theta[i] = expo(rng);
            total += theta[i];
        }
        for (std::size_t i = 0; i < nv; ++i) {
            const double t = theta[i] / total;
            for (std::size_t j = 0; j < w.size(); ++j)
                w[j] += t * sys.disturbance_vertices[i][j];
        }
        return w;
    };
    const auto deriv = [&](const Vector& x, const Vector& hw) {
        return matvec(ac, x) + hw;
    };

    const std::size_t steps = static_cast<std::size_t>(std::ceil(horizon / dt));
    SimulationResult out;
    out.trajectory.reserve(steps + 1);
    out.trajectory.push_back(x0);

    Vector x = x0;
    double v = quadratic_form(sys.P.entries(), x);
    for (std::size_t k = 0; k < steps; ++k) {
        const Vector hw = matvec(sys.H, draw_disturbance());
        const Vector k1 = deriv(x, hw);
        const Vector k2 = deriv(x + (0.5 * dt) * k1, hw);
        const Vector k3 = deriv(x + (0.5 * dt) * k2, hw);
        const Vector k4 = deriv(x + dt * k3, hw);
        Vector xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double vn = quadratic_form(sys.P.entries(), xn);

        if (v >= gamma * (1.0 + 1e-9) && vn > v + 1e-10 * std::max(1.0, v) &&
            !out.violation) {
            out.violation = true;
            out.violation_time = static_cast<double>(k) * dt;
            out.violation_step = k;
        }
        x = std::move(xn);
        v = vn;
        out.trajectory.push_back(x);
    }
    return out;
}

}  // namespace ellin
