// Acceptance gate for the containment toolkit. Each criterion prints one
// [PASS]/[FAIL] line with the measured numbers; the exit code is the number
// of failed criteria. Tolerances are fixed here and nowhere else.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellin/bench.hpp"
#include "ellin/dual_function.hpp"
#include "ellin/ellipsoid.hpp"
#include "ellin/inclusion.hpp"
#include "ellin/oracle.hpp"
#include "test_support.hpp"

using namespace ellin;
using test_support::diag_ellipsoid;
using test_support::unit_ball;

namespace {

int failures = 0;

void report(int k, bool pass, const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    std::printf("[%s] C%d %s\n", pass ? "PASS" : "FAIL", k, buf);
    if (!pass) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1: the hand-checkable reference instance, exact factor, fast.
void criterion_1() {
    const Ellipsoid inner = diag_ellipsoid({0.0, 2.0 / 3.0}, {2.0, 9.0});
    const Ellipsoid outer = unit_ball(2);
    const double expected = 15.0 / 14.0;

    const ScalingResult s = minimal_scaling(inner, outer);
    double best = 1e9;
    InclusionVerdict v;
    for (int rep = 0; rep < 5; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        v = decide(inner, outer);
        best = std::min(best, seconds_since(t0));
    }
    const double err = std::abs(s.gamma - expected) / expected;
    const bool pass = err <= 1e-12 && v.relation == Relation::Outside && best < 1e-3;
    report(1, pass, "reference instance: gamma=%.15g rel_err=%.2e verdict=%s time=%.1fus",
           s.gamma, err, relation_name(v.relation), best * 1e6);
}

// 2: one-dimensional problems against the closed form.
void criterion_2() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double c = -1.0 + 2.0 * unit(rng);
        const double lam = std::exp(std::log(0.25) + unit(rng) * std::log(400.0));
        const ScalingResult s = minimal_scaling(diag_ellipsoid({c}, {lam}), unit_ball(1));
        const double cf = oracle::gamma_closed_form_1d(c, lam);
        worst = std::max(worst, std::abs(s.gamma - cf) / std::max(1.0, cf));
    }
    const double t = seconds_since(t0);
    const bool pass = worst <= 1e-9 && t < 1.0;
    report(2, pass, "1000 one-dimensional factors vs closed form: max_err=%.2e time=%.3fs",
           worst, t);
}

// 3: the optimized dual value against an independent sampled maximum.
void criterion_3() {
    std::mt19937_64 rng(203);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t dims[] = {2, 3, 5};
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = dims[i % 3];
        const double target = 0.6 + 1.2 * unit(rng);
        const test_support::LabeledPair pair = test_support::make_scaled_pair(rng, n, target);
        const ScalingResult s = minimal_scaling(pair.inner, pair.outer);
        const oracle::OracleReport rep = oracle::boundary_max_norm(pair.inner, pair.outer);
        worst = std::max(worst, std::abs(s.gamma - rep.max_sq_norm));
    }
    const double t = seconds_since(t0);
    const bool pass = worst <= 1e-4 && t < 30.0;
    report(3, pass, "200 sampled maxima (n=2,3,5): max |gamma - sampled|=%.2e time=%.2fs",
           worst, t);
}

// 4: stationarity at interior optima and minimality of the factor.
void criterion_4() {
    std::mt19937_64 rng(204);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t dims[] = {2, 10, 30};
    const auto t0 = std::chrono::steady_clock::now();
    double worst_slope = 0.0;
    int sandwich_bad = 0;
    int interior = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = dims[i % 3];
        const double target = 0.6 + 1.2 * unit(rng);
        const test_support::LabeledPair pair = test_support::make_scaled_pair(rng, n, target);
        const ScalingResult s = minimal_scaling(pair.inner, pair.outer);

        if (!s.at_lower_boundary) {
            ++interior;
            const NormalizedProblem np = normalize(pair.inner, pair.outer);
            const DualFunction fn(np);
            worst_slope = std::max(worst_slope, std::abs(fn.slope(s.beta_star)));
        }

        const InclusionVerdict up =
            decide(pair.inner, inflate_outer(pair.outer, s.gamma * (1.0 + 1e-4)));
        const InclusionVerdict dn =
            decide(pair.inner, inflate_outer(pair.outer, s.gamma * (1.0 - 1e-4)));
        if (up.relation == Relation::Outside || dn.relation != Relation::Outside)
            ++sandwich_bad;
    }
    const double t = seconds_since(t0);
    const bool pass = worst_slope <= 1e-7 && sandwich_bad == 0 && t < 10.0;
    report(4, pass,
           "200 optima (n=2,10,30): max |slope|=%.2e at %d interior, "
           "sandwich failures=%d time=%.2fs",
           worst_slope, interior, sandwich_bad, t);
}

// 5: contact points land on both boundaries, including degenerate contact.
void criterion_5() {
    std::mt19937_64 rng(205);
    double worst = 0.0;
    int degenerate = 0;
    int built = 0;
    for (int i = 0; i < 100; ++i) {
        const bool force_degenerate = i % 5 == 0;
        const std::size_t n = force_degenerate ? 3 + i % 3 : 2 + i % 4;
        const test_support::LabeledPair pair =
            test_support::make_scaled_pair(rng, n, 1.0, force_degenerate);
        const ContactPointSet cs = contact_points(pair.inner, pair.outer, 1e-6);
        if (cs.points.empty()) continue;
        ++built;
        if (cs.degenerate) ++degenerate;
        for (const Vector& p : cs.points) {
            worst = std::max(worst, std::abs(shape_norm_sq(pair.inner, p) - 1.0));
            worst = std::max(worst, std::abs(shape_norm_sq(pair.outer, p) - 1.0));
        }
    }
    const bool pass = built == 100 && degenerate >= 20 && worst <= 1e-8;
    report(5, pass,
           "100 touching pairs (%d with degenerate contact): max boundary residual=%.2e",
           degenerate, worst);
}

// 6: the bundled disturbed LQR example. The expected level is pinned at
// 1.137; the simulation over ten disturbance draws must stay inside.
void criterion_6() {
    const std::string cmd = std::string(ELLIN_CLI_PATH) + " invariant " ELLIN_FIXTURE_DIR
                            "/invariant_lqr2d.json 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        report(6, false, "invariant example: failed to launch the CLI");
        return;
    }
    std::string out;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    const int status = ::pclose(pipe);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        report(6, false, "invariant example: CLI exited with %d", WEXITSTATUS(status));
        return;
    }
    double gamma = 0.0;
    std::uint64_t violations = 0, seeds = 0;
    try {
        const nlohmann::json doc = nlohmann::json::parse(out);
        gamma = doc.at("gamma").get<double>();
        violations = doc.at("simulation").at("violations").get<std::uint64_t>();
        seeds = doc.at("simulation").at("seeds").get<std::uint64_t>();
    } catch (const std::exception& e) {
        report(6, false, "invariant example: bad CLI output (%s)", e.what());
        return;
    }
    const bool level_ok = std::abs(gamma - 1.137) <= 0.02;
    const bool sim_ok = seeds == 10 && violations == 0;
    report(6, level_ok && sim_ok,
           "invariant example: gamma=%.6f (expected 1.137 +- 0.02), "
           "violations=%llu of %llu seeds",
           gamma, static_cast<unsigned long long>(violations),
           static_cast<unsigned long long>(seeds));
}

struct CorpusTimes {
    std::vector<double> by_dim_median_s;
};

// 7 and 8 share one corpus: 200 generated instances in each dimension.
void criteria_7_and_8() {
    const std::size_t dims[] = {3, 10, 30, 100};
    int indefinite = 0, label_bad = 0, refine_bad = 0;
    double worst_gamma_dev = 0.0;
    std::vector<double> medians;

    for (const std::size_t n : dims) {
        std::vector<double> times;
        times.reserve(200);
        for (std::uint64_t cid = 0; cid < 200; ++cid) {
            const bench::BenchInstance inst = bench::generate_instance(31, n, cid);

            InclusionVerdict v;
            std::vector<double> reps(10);
            for (int rep = 0; rep < 10; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                v = decide(inst.inner, inst.outer);
                reps[rep] = seconds_since(t0);
            }
            std::sort(reps.begin(), reps.end());
            times.push_back(0.5 * (reps[4] + reps[5]));

            const bool definite = v.relation == Relation::StrictlyInside ||
                                  v.relation == Relation::Outside;
            if (!definite) ++indefinite;
            if (definite &&
                (v.relation == Relation::StrictlyInside) != inst.inside_label)
                ++label_bad;

            // Independent refinement: derivative-free maximization of the
            // dual, bracketing the optimum by doubling first.
            const NormalizedProblem np = normalize(inst.inner, inst.outer);
            const DualFunction fn(np);
            const double lo = fn.eval_lo();
            double u = lo + 1.0;
            for (int d = 0; d < 60 && fn.value(2.0 * u) > fn.value(u); ++d) u *= 2.0;
            const auto [arg, val] = test_support::ternary_max(
                [&](double b) { return fn.value(b); }, lo, 2.0 * u,
                1e-13 * std::max(1.0, 2.0 * u));
            (void)arg;
            const double gamma_refined = -val;
            if ((gamma_refined < 1.0) != inst.inside_label) ++refine_bad;
            worst_gamma_dev = std::max(
                worst_gamma_dev, std::abs(gamma_refined - inst.target_gamma) /
                                     inst.target_gamma);
        }
        std::sort(times.begin(), times.end());
        medians.push_back(times[times.size() / 2]);
    }

    const bool c7 = indefinite == 0 && label_bad == 0 && refine_bad == 0 &&
                    worst_gamma_dev <= 1e-8;
    report(7, c7,
           "800 generated instances (n=3,10,30,100): indefinite=%d label_mismatch=%d "
           "refinement_mismatch=%d max_gamma_dev=%.2e",
           indefinite, label_bad, refine_bad, worst_gamma_dev);

    const double med100 = medians[3];
    const double med10 = medians[1];
    const double ratio = med100 / std::max(med10, 1e-12);
    const bool c8 = med100 < 10e-3 && ratio <= 2000.0;
    report(8, c8,
           "decision medians: n=10 %.1fus, n=100 %.1fus (< 10ms), ratio=%.0f (<= 2000)",
           med10 * 1e6, med100 * 1e6, ratio);
}

// 9: the feasibility certificate matrix agrees with the verdicts.
void criterion_9() {
    int cert_bad = 0, grid_bad = 0, inside_seen = 0, outside_seen = 0;
    double worst_inside = 0.0;
    for (std::uint64_t cid = 0; cid < 200; ++cid) {
        const bench::BenchInstance inst = bench::generate_instance(13, 6, cid);
        const NormalizedProblem np = normalize(inst.inner, inst.outer);
        if (inst.inside_label) {
            ++inside_seen;
            const InclusionVerdict v = decide(inst.inner, inst.outer);
            if (!std::isfinite(v.beta_certificate)) {
                ++cert_bad;
                continue;
            }
            const double e = oracle::containment_certificate_min_eig(np, v.beta_certificate);
            worst_inside = std::min(worst_inside, e);
            if (e < -1e-9) ++cert_bad;
        } else {
            ++outside_seen;
            bool feasible_somewhere = false;
            for (int k = 0; k < 200; ++k) {
                const double beta = 2.0 * static_cast<double>(k) / 199.0;
                if (oracle::containment_certificate_min_eig(np, beta) >= -1e-9) {
                    feasible_somewhere = true;
                    break;
                }
            }
            if (feasible_somewhere) ++grid_bad;
        }
    }
    const bool pass = cert_bad == 0 && grid_bad == 0 && inside_seen == 100 &&
                      outside_seen == 100;
    report(9, pass,
           "certificate matrix: %d inside certified (min eig >= %.1e), "
           "%d outside infeasible on the grid, failures=%d/%d",
           inside_seen, worst_inside, outside_seen, cert_bad, grid_bad);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criteria_7_and_8();
    criterion_9();
    if (failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criteria failed\n", failures);
    return failures;
}
