#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ellin/errors.hpp"
#include "ellin/invariant.hpp"
#include "ellin/oracle.hpp"
#include "test_support.hpp"

using namespace ellin;
using test_support::make_matrix;

namespace {

// Double integrator-like plant with an LQR-style gain; the same system ships
// as fixtures/invariant_lqr2d.json for the command line tests.
DisturbedSystem lqr_system(double vertex_scale = 0.5) {
    return DisturbedSystem{make_matrix({{0.0, 1.0}, {0.1, 0.3}}),
                           make_matrix({{0.0}, {0.5}}),
                           make_matrix({{-0.3}, {0.6}}),
                           SymMatrix(make_matrix({{36.10, 42.36}, {42.36, 72.98}})),
                           make_matrix({{4.24, 7.30}}),
                           {Vector{-vertex_scale}, Vector{vertex_scale}}};
}

}  // namespace

TEST_CASE("violation ellipsoid frozen values", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    const ViolationEllipsoid v = violation_ellipsoid(sys, Vector{0.5});

    CHECK_THAT(v.r, Catch::Matchers::WithinRel(1.0738666496449625, 1e-12));
    CHECK_THAT(v.set.center[0], Catch::Matchers::WithinAbs(-0.1951596287822437, 1e-12));
    CHECK_THAT(v.set.center[1], Catch::Matchers::WithinAbs(0.1606927813612526, 1e-12));

    // Shape is the decrease rate S = -(Ac^T P + P Ac) divided by r.
    const Matrix s = make_matrix({{171.1344, 253.2256}, {253.2256, 404.246}});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK_THAT(v.set.shape.entries()(i, j),
                       Catch::Matchers::WithinRel(s(i, j) / v.r, 1e-12));

    // The mirrored vertex mirrors the center and keeps everything else.
    const ViolationEllipsoid m = violation_ellipsoid(sys, Vector{-0.5});
    CHECK_THAT(m.set.center[0], Catch::Matchers::WithinAbs(-v.set.center[0], 1e-15));
    CHECK_THAT(m.set.center[1], Catch::Matchers::WithinAbs(-v.set.center[1], 1e-15));
    CHECK_THAT(m.r, Catch::Matchers::WithinRel(v.r, 1e-15));
}

TEST_CASE("violation ellipsoid rejects bad input", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    CHECK_THROWS_AS(violation_ellipsoid(sys, Vector{0.0}), ZeroDisturbance);
    CHECK_THROWS_AS(violation_ellipsoid(sys, Vector{0.5, 0.5}), DimensionMismatch);

    DisturbedSystem bad = lqr_system();
    bad.K = make_matrix({{0.0, 0.0}});  // open loop is unstable, S indefinite
    bad.P = SymMatrix(Matrix::identity(2));
    CHECK_THROWS_AS(violation_ellipsoid(bad, Vector{0.5}), NotPositiveDefinite);

    DisturbedSystem mismatched = lqr_system();
    mismatched.disturbance_vertices.push_back(Vector{0.1, 0.2});
    CHECK_THROWS_AS(invariant_level(mismatched), DimensionMismatch);
}

TEST_CASE("invariant level on the fixture system", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    const InvariantLevel lvl = invariant_level(sys);

    CHECK(lvl.pieces.size() == 2);
    CHECK_THAT(lvl.gamma, Catch::Matchers::WithinRel(3.04829992360666, 1e-8));
    // The two vertices mirror each other, so one maximization suffices.
    CHECK(lvl.cover.maximizations == 1);

    const InvariantLevel plain = invariant_level(sys, false);
    CHECK(plain.cover.maximizations == 2);
    CHECK_THAT(plain.gamma, Catch::Matchers::WithinRel(lvl.gamma, 1e-12));
}

TEST_CASE("level scales with the square of the disturbance", "[invariant]") {
    const InvariantLevel base = invariant_level(lqr_system(0.5));
    const InvariantLevel twice = invariant_level(lqr_system(1.0));
    CHECK_THAT(twice.gamma, Catch::Matchers::WithinRel(4.0 * base.gamma, 1e-12));
}

TEST_CASE("per piece level agrees with a sampled maximum", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    const InvariantLevel lvl = invariant_level(sys);
    const Ellipsoid tmpl(Vector(2, 0.0), sys.P);
    for (std::size_t i = 0; i < lvl.pieces.size(); ++i) {
        const oracle::OracleReport rep =
            oracle::boundary_max_norm(lvl.pieces[i].set, tmpl);
        CHECK_THAT(lvl.cover.gammas[i],
                   Catch::Matchers::WithinRel(rep.max_sq_norm, 1e-8));
    }
}

TEST_CASE("zero vertices contribute nothing", "[invariant]") {
    DisturbedSystem sys = lqr_system();
    sys.disturbance_vertices = {Vector{0.0}, Vector{0.5}};
    const InvariantLevel lvl = invariant_level(sys);
    CHECK(lvl.pieces.size() == 1);

    sys.disturbance_vertices = {Vector{0.0}};
    const InvariantLevel none = invariant_level(sys);
    CHECK(none.pieces.empty());
    CHECK(none.gamma == 0.0);
}

TEST_CASE("simulation respects the certified level", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    const InvariantLevel lvl = invariant_level(sys);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SimulationResult r =
            simulate_check(sys, lvl.gamma, Vector{-1.0, -1.0}, 30.0, 1e-3, seed);
        INFO("seed " << seed);
        CHECK_FALSE(r.violation);
        CHECK(r.trajectory.size() == 30001);
        for (double c : r.trajectory.back()) CHECK(std::isfinite(c));
    }
}

TEST_CASE("half the level is not invariant", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    const InvariantLevel lvl = invariant_level(sys);
    const Ellipsoid tmpl(Vector(2, 0.0), sys.P);
    // Start at the state of largest Lyapunov value that some vertex can
    // still push outward.
    const oracle::OracleReport rep =
        oracle::boundary_max_norm(lvl.pieces[0].set, tmpl);

    int violations = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const SimulationResult r =
            simulate_check(sys, 0.5 * lvl.gamma, rep.argmax, 2.0, 1e-3, seed);
        if (r.violation) {
            ++violations;
            CHECK(r.violation_time <= 2.0);
            CHECK(r.violation_step < r.trajectory.size());
        }
    }
    CHECK(violations >= 1);
}

TEST_CASE("simulation input validation", "[invariant]") {
    const DisturbedSystem sys = lqr_system();
    CHECK_THROWS_AS(simulate_check(sys, 1.0, Vector{1.0, 0.0, 0.0}), DimensionMismatch);
    CHECK_THROWS_AS(simulate_check(sys, 1.0, Vector{1.0, 0.0}, -1.0), Error);
    CHECK_THROWS_AS(simulate_check(sys, 1.0, Vector{1.0, 0.0}, 30.0, 0.0), Error);
}
