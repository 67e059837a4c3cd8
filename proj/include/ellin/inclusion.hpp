#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ellin/dual_function.hpp"
#include "ellin/ellipsoid.hpp"
#include "ellin/errors.hpp"
#include "ellin/linalg.hpp"
#include "ellin/matrix.hpp"

namespace ellin {

enum class Relation { StrictlyInside, Touching, TouchingWithinEps, Outside };

inline const char* relation_name(Relation r) {
    switch (r) {
        case Relation::StrictlyInside: return "strictly_inside";
        case Relation::Touching: return "touching";
        case Relation::TouchingWithinEps: return "touching_within_eps";
        case Relation::Outside: return "outside";
    }
    return "unknown";
}

struct InclusionVerdict {
    Relation relation = Relation::Outside;
    // Which test settled the question; stable strings for tooling.
    std::string rule;
    int iterations = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    // For inside/touching outcomes, a multiplier at which the containment
    // certificate matrix is positive semidefinite. NaN when not applicable.
    double beta_certificate = std::numeric_limits<double>::quiet_NaN();
};

struct MaximizeResult {
    double beta_star = 0.0;
    double value = 0.0;
    bool at_lower_boundary = false;
    int iterations = 0;
};

// Maximizes the dual objective over its domain, to machine precision. The
// support-free case is a pure -beta line maximized at the left endpoint;
// otherwise the unique root of the strictly decreasing slope is found with a
// bracketed Newton iteration (the slope is convex, so Newton from the left
// stays left of the root; the bracket catches everything else).
inline MaximizeResult maximize_dual(const NormalizedProblem& np) {
    const DualFunction f(np);
    const double lo = f.domain_lo();

    if (f.support_size() == 0)
        return MaximizeResult{lo, -lo, true, 0};

    double l = f.eval_lo();
    if (f.slope(l) <= 0.0)
        return MaximizeResult{lo, f.value(l), true, 0};

    double u = l;
    for (int i = 0;; ++i) {
        if (i == 1024) throw NoConvergence("maximize_dual: no negative-slope point found");
        u = 2.0 * u + 1.0;
        if (f.slope(u) < 0.0) break;
    }

    double beta = l;
    bool converged = false;
    int iter = 0;
    while (iter < 200) {
        ++iter;
        const DualSample s = f.sample(beta);
        if (s.slope == 0.0) {
            converged = true;
            break;
        }
        if (s.slope > 0.0) l = beta;
        else u = beta;

        double next;
        if (s.curvature < 0.0) {
            next = beta - s.slope / s.curvature;
            if (!(next > l && next < u)) next = 0.5 * (l + u);
        } else {
            next = 0.5 * (l + u);
        }
        const double step = std::abs(next - beta);
        beta = next;
        if (step <= 1e-15 * std::max(1.0, std::abs(beta)) ||
            u - l <= 1e-15 * std::max(1.0, u)) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NoConvergence("maximize_dual: iteration budget exhausted");
    return MaximizeResult{beta, f.value(beta), false, iter};
}

namespace detail {

inline InclusionVerdict verdict(Relation r, const char* rule, int iters, double blo,
                                double bhi, double cert) {
    InclusionVerdict v;
    v.relation = r;
    v.rule = rule;
    v.iterations = iters;
    v.bracket_lo = blo;
    v.bracket_hi = bhi;
    v.beta_certificate = cert;
    return v;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace detail

// Decides the relation between the inner ellipsoid and the outer one up to a
// bracket resolution of eps on the multiplier axis. Cheap certified pretests
// run first; the remaining cases are settled by bisection of the concave dual
// objective, where every Outside exit carries a curvature-based certificate
// that the objective cannot reach -1 anywhere in the bracket.
inline InclusionVerdict decide(const Ellipsoid& inner, const Ellipsoid& outer,
                               double eps = tolerances::kDefaultEps) {
    using detail::kNaN;
    using detail::verdict;
    if (inner.dim() != outer.dim())
        throw DimensionMismatch("decide: ellipsoid dimensions disagree");

    // A center outside the outer set settles it without any factorization.
    const double center_gap =
        quadratic_form(outer.shape.entries(), inner.center - outer.center);
    if (center_gap > 1.0 + tolerances::kMembership)
        return verdict(Relation::Outside, "pretest:center", 0, 0.0, 0.0, kNaN);

    const NormalizedProblem np = normalize(inner, outer);

    // Any semi-axis longer than the outer unit radius is disqualifying.
    if (np.lambda_min < 1.0 - tolerances::kSpectralRel)
        return verdict(Relation::Outside, "pretest:shape", 0, 0.0, 0.0, kNaN);

    const double lo = np.interval_lo();
    const double hi = np.interval_hi();

    if (np.support.empty()) {
        // Concentric after normalization; containment is a pure spectrum
        // test, and it must run before the interval test: for an exactly
        // touching spectrum lo sits on 1.0 up to rounding and the raw
        // comparison against hi is noise.
        if (np.lambda_min <= 1.0 + tolerances::kSpectralRel)
            return verdict(Relation::Touching, "pretest:concentric-touch", 0, lo, lo, lo);
        return verdict(Relation::StrictlyInside, "pretest:concentric", 0, lo, lo, lo);
    }

    // The objective can reach -1 only inside [lo, hi].
    if (lo > hi)
        return verdict(Relation::Outside, "pretest:interval", 0, lo, hi, kNaN);

    const DualFunction f(np);
    double l = f.eval_lo();
    double u = hi;

    if (l > u) {
        // The feasible stretch is narrower than the pole guard band. Evaluate
        // at hi if the guard allows it; otherwise the maximum hides in a band
        // of width below eps and the objective dives to -inf at its left edge.
        double vh;
        try {
            vh = f.value(u);
        } catch (const OutOfDomain&) {
            return verdict(Relation::Outside, "pretest:interval", 0, lo, hi, kNaN);
        }
        if (vh > -1.0)
            return verdict(Relation::StrictlyInside, "bisection:endpoint", 0, lo, u, u);
        return verdict(Relation::TouchingWithinEps, "bisection:bracket-eps", 0, lo, u, u);
    }

    DualSample sl = f.sample(l);
    if (!f.lower_open() && sl.slope <= 0.0) {
        // The slope is decreasing, so the closed left endpoint is the global
        // maximizer and its value alone settles the question. An exactly
        // grazing pair computes -1 up to a few ulps, so the comparisons get
        // a band of that width.
        const double vtol = 64.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(sl.value));
        if (sl.value > -1.0 + vtol)
            return verdict(Relation::StrictlyInside, "bisection:endpoint", 0, l, u, l);
        if (sl.value >= -1.0 - vtol)
            return verdict(Relation::Touching, "bisection:endpoint", 0, l, u, l);
        return verdict(Relation::Outside, "bisection:slope", 0, l, u, kNaN);
    }
    if (sl.value > -1.0)
        return verdict(Relation::StrictlyInside, "bisection:endpoint", 0, l, u, l);
    const DualSample su = f.sample(u);
    if (su.value > -1.0)
        return verdict(Relation::StrictlyInside, "bisection:endpoint", 0, l, u, u);

    // Maximum right of hi: by the interval bound the objective is below -1
    // there, and on [l, hi] it peaks at hi, already checked.
    if (su.slope > 0.0)
        return verdict(Relation::Outside, "bisection:slope", 0, l, u, kNaN);

    if (sl.slope <= 0.0) {
        // Open endpoint and the slope already flipped inside the nudge band:
        // refine inside the band, staying right of the pole guard.
        u = l;
        l = lo + 2.0 * tolerances::kNearPole * std::max(1.0, lo);
        sl = f.sample(l);
        if (sl.value > -1.0)
            return verdict(Relation::StrictlyInside, "bisection:endpoint", 0, l, u, l);
    }

    double curv_l = sl.curvature;
    int iter = 0;
    while (u - l > eps) {
        if (++iter > 4096) throw NoConvergence("decide: bisection budget exhausted");
        const double m = 0.5 * (l + u);
        if (!(m > l && m < u)) break;  // bracket no longer splittable
        const DualSample s = f.sample(m);
        if (s.value > -1.0)
            return verdict(Relation::StrictlyInside, "bisection:midpoint-above", iter, l, u, m);
        // Concavity bound: the peak exceeds the midpoint value by at most
        // |curvature(l)| (u - l)^2 / 2, the curvature being most negative at l.
        const double w = u - l;
        if (s.value < -1.0 + 0.5 * curv_l * w * w)
            return verdict(Relation::Outside, "bisection:certified-below", iter, l, u, kNaN);
        if (s.slope > 0.0) {
            l = m;
            curv_l = s.curvature;
        } else if (s.slope < 0.0) {
            u = m;
        } else {
            // Exact stationary point with value <= -1.
            if (s.value < -1.0)
                return verdict(Relation::Outside, "bisection:stationary", iter, m, m, kNaN);
            return verdict(Relation::Touching, "bisection:stationary", iter, m, m, m);
        }
    }
    return verdict(Relation::TouchingWithinEps, "bisection:bracket-eps", iter, l, u,
                   0.5 * (l + u));
}

struct ScalingResult {
    // Smallest factor by which the outer set must be inflated (shape divided
    // by gamma) to contain the inner set with contact.
    double gamma = 0.0;
    double beta_star = 0.0;
    double dual_value = 0.0;
    bool at_lower_boundary = false;
    int iterations = 0;
};

inline ScalingResult minimal_scaling(const Ellipsoid& inner, const Ellipsoid& outer) {
    const NormalizedProblem np = normalize(inner, outer);
    const MaximizeResult m = maximize_dual(np);
    return ScalingResult{-m.value, m.beta_star, m.value, m.at_lower_boundary, m.iterations};
}

// The outer ellipsoid inflated by gamma: same center, shape divided by gamma.
inline Ellipsoid inflate_outer(const Ellipsoid& outer, double gamma) {
    if (!(gamma > 0.0)) throw Error("inflate_outer: gamma must be positive");
    Matrix s = outer.shape.entries();
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) /= gamma;
    return Ellipsoid(outer.center, SymMatrix(std::move(s)));
}

// The inner ellipsoid contracted toward the outer center so that it fits the
// unchanged outer set with contact: center moves by gamma^(-1/2), shape is
// multiplied by gamma.
inline Ellipsoid rescale_inner(const Ellipsoid& inner, const Vector& outer_center,
                               double gamma) {
    if (!(gamma > 0.0)) throw Error("rescale_inner: gamma must be positive");
    if (inner.dim() != outer_center.size())
        throw DimensionMismatch("rescale_inner: dimensions disagree");
    const double shrink = 1.0 / std::sqrt(gamma);
    const Vector c = outer_center + shrink * (inner.center - outer_center);
    Matrix s = inner.shape.entries();
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) *= gamma;
    return Ellipsoid(c, SymMatrix(std::move(s)));
}

struct ContactPointSet {
    std::vector<Vector> points;
    double beta_star = 0.0;
    // True when the maximum sits at the domain endpoint and the contact set
    // was parameterized along the bottom eigenspace.
    bool degenerate = false;
};

// Contact points of a touching pair, mapped back to original coordinates.
// In the regular case the stationarity condition pins a single point in the
// eigenbasis. When the maximum is at the left endpoint the bottom-eigenspace
// components are free; they are fixed by intersecting with the unit sphere,
// giving a symmetric pair of points along the first bottom direction.
inline ContactPointSet contact_points(const Ellipsoid& inner, const Ellipsoid& outer,
                                      double touch_tol = 1e-8) {
    const NormalizedProblem np = normalize(inner, outer);
    const MaximizeResult m = maximize_dual(np);
    if (std::abs(m.value + 1.0) > touch_tol)
        throw NotTouching("contact_points: dual maximum is not at the touching level");

    const std::size_t n = np.dim;
    const double beta = m.beta_star;
    const double bottom_cut = np.lambda_min * (1.0 + tolerances::kSpectralRel);

    ContactPointSet out;
    out.beta_star = beta;
    out.degenerate = m.at_lower_boundary;

    Vector y(n, 0.0);
    if (!m.at_lower_boundary) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = beta * np.lambda[i] - 1.0;
            y[i] = beta * np.lambda[i] * np.c_bar[i] / d;
        }
        out.points.push_back(denormalize_point(np, matvec(np.eigvectors, y)));
        return out;
    }

    // Endpoint case: fill the pinned components, then place the free bottom
    // component on the unit sphere.
    double partial_sq = 0.0;
    std::size_t bottom_index = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (np.lambda[i] <= bottom_cut) {
            if (bottom_index == n) bottom_index = i;
            continue;
        }
        const double d = beta * np.lambda[i] - 1.0;
        y[i] = beta * np.lambda[i] * np.c_bar[i] / d;
        partial_sq += y[i] * y[i];
    }
    const double disc = 1.0 - partial_sq;
    if (disc < -1e-12)
        throw NoRealRoot("contact_points: pinned components already leave the sphere");
    const double alpha = std::sqrt(std::max(0.0, disc));

    y[bottom_index] = alpha;
    out.points.push_back(denormalize_point(np, matvec(np.eigvectors, y)));
    if (alpha > 0.0) {
        y[bottom_index] = -alpha;
        out.points.push_back(denormalize_point(np, matvec(np.eigvectors, y)));
    }
    return out;
}

struct CoverResult {
    // Smallest gamma with every listed ellipsoid inside the template inflated
    // by gamma.
    double gamma = 0.0;
    std::size_t argmax_index = 0;
    Vector gammas;
    // Dual maximizations actually run (mirror pairs are computed once).
    std::size_t maximizations = 0;
};

// Minimal common inflation of one template ellipsoid covering a family.
// Mirror-symmetric members (equal shapes, centers reflected through the
// template center) produce the same factor, so with exploit_symmetry only one
// of each pair is maximized.
inline CoverResult cover(const std::vector<Ellipsoid>& parts, const Ellipsoid& outer,
                         bool exploit_symmetry = true) {
    if (parts.empty()) throw Error("cover: empty family");
    const CholeskyFactor l0 = cholesky(outer.shape);

    CoverResult out;
    out.gammas.assign(parts.size(), 0.0);
    std::vector<bool> done(parts.size(), false);

    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (done[i]) continue;
        const NormalizedProblem np = normalize_given(l0, outer.center, parts[i]);
        const MaximizeResult m = maximize_dual(np);
        out.gammas[i] = -m.value;
        done[i] = true;
        ++out.maximizations;

        if (!exploit_symmetry) continue;
        const Vector ci = parts[i].center - outer.center;
        const double ci_norm = norm2(ci);
        const double shape_scale = 1.0 + max_abs(parts[i].shape.entries());
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            if (done[j]) continue;
            if (parts[j].dim() != parts[i].dim()) continue;
            const Vector cj = parts[j].center - outer.center;
            if (norm2(ci + cj) > 1e-12 * (1.0 + ci_norm)) continue;
            double shape_gap = 0.0;
            for (std::size_t r = 0; r < parts[i].dim(); ++r)
                for (std::size_t c = 0; c < parts[i].dim(); ++c)
                    shape_gap = std::max(
                        std::abs(parts[i].shape(r, c) - parts[j].shape(r, c)), shape_gap);
            if (shape_gap > 1e-12 * shape_scale) continue;
            out.gammas[j] = out.gammas[i];
            done[j] = true;
        }
    }

    out.argmax_index = 0;
    for (std::size_t i = 1; i < parts.size(); ++i)
        if (out.gammas[i] > out.gammas[out.argmax_index]) out.argmax_index = i;
    out.gamma = out.gammas[out.argmax_index];
    return out;
}

}  // namespace ellin
