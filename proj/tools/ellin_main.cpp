// Command line front end: containment verdicts, minimal scaling factors,
// contact points, family covers, invariant levels for disturbed linear
// systems, and a labeled benchmark corpus. JSON results go to stdout,
// diagnostics to stderr.
//
// Exit codes: 0 contained (strictly or with contact), 1 not contained,
// 2 undecided at the requested bracket resolution, 3 contact requested for a
// pair that is not touching, 64 malformed input, 65 invalid problem
// (dimension clash, shape not positive definite), 70 internal failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ellin/bench.hpp"
#include "ellin/ellipsoid.hpp"
#include "ellin/errors.hpp"
#include "ellin/inclusion.hpp"
#include "ellin/invariant.hpp"
#include "ellin/io.hpp"

namespace {

using ellin::io::json;

constexpr int kExitContained = 0;
constexpr int kExitNotContained = 1;
constexpr int kExitUndecided = 2;
constexpr int kExitNotTouching = 3;
constexpr int kExitParse = 64;
constexpr int kExitInvalidProblem = 65;
constexpr int kExitInternal = 70;

json read_input(const std::string& path) {
    std::string text;
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
    } else {
        std::ifstream f(path);
        if (!f) throw ellin::ParseError("cannot open input file: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ellin::ParseError(std::string("invalid JSON: ") + e.what());
    }
}

std::string sig15(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

int relation_exit(ellin::Relation r) {
    switch (r) {
        case ellin::Relation::StrictlyInside:
        case ellin::Relation::Touching: return kExitContained;
        case ellin::Relation::Outside: return kExitNotContained;
        case ellin::Relation::TouchingWithinEps: return kExitUndecided;
    }
    return kExitInternal;
}

std::pair<ellin::Ellipsoid, ellin::Ellipsoid> parse_pair(const json& doc) {
    return {ellin::io::parse_ellipsoid(ellin::io::require_key(doc, "inner"), "inner"),
            ellin::io::parse_ellipsoid(ellin::io::require_key(doc, "outer"), "outer")};
}

int cmd_check(const std::string& input, double eps) {
    const json doc = read_input(input);
    const auto [inner, outer] = parse_pair(doc);
    const ellin::InclusionVerdict v = ellin::decide(inner, outer, eps);
    json out{{"relation", ellin::relation_name(v.relation)},
             {"rule", v.rule},
             {"iterations", v.iterations},
             {"bracket", {v.bracket_lo, v.bracket_hi}}};
    out["beta_certificate"] =
        std::isnan(v.beta_certificate) ? json() : json(v.beta_certificate);
    std::cout << out.dump(2) << "\n";
    return relation_exit(v.relation);
}

int cmd_gamma(const std::string& input, bool rescale) {
    const json doc = read_input(input);
    const auto [inner, outer] = parse_pair(doc);
    const ellin::ScalingResult s = ellin::minimal_scaling(inner, outer);
    json out{{"gamma", "__GAMMA__"},
             {"beta_star", s.beta_star},
             {"dual_value", s.dual_value},
             {"at_lower_boundary", s.at_lower_boundary},
             {"iterations", s.iterations}};
    if (rescale) {
        out["inflated_outer"] = ellin::io::ellipsoid_json(ellin::inflate_outer(outer, s.gamma));
        out["rescaled_inner"] =
            ellin::io::ellipsoid_json(ellin::rescale_inner(inner, outer.center, s.gamma));
    }
    // The factor itself is printed with 15 significant digits, which the
    // default shortest-round-trip float printing does not guarantee.
    std::string text = out.dump(2);
    const std::string placeholder = "\"__GAMMA__\"";
    text.replace(text.find(placeholder), placeholder.size(), sig15(s.gamma));
    std::cout << text << "\n";
    return kExitContained;
}

int cmd_contact(const std::string& input, double tol) {
    const json doc = read_input(input);
    const auto [inner, outer] = parse_pair(doc);
    const ellin::ContactPointSet cs = ellin::contact_points(inner, outer, tol);
    json points = json::array();
    json residuals = json::array();
    for (const ellin::Vector& p : cs.points) {
        points.push_back(ellin::io::vector_json(p));
        const double ri = std::abs(ellin::shape_norm_sq(inner, p) - 1.0);
        const double ro = std::abs(ellin::shape_norm_sq(outer, p) - 1.0);
        residuals.push_back(json{{"inner", ri}, {"outer", ro}});
    }
    const json out{{"beta_star", cs.beta_star},
                   {"degenerate", cs.degenerate},
                   {"points", points},
                   {"residuals", residuals}};
    std::cout << out.dump(2) << "\n";
    return kExitContained;
}

int cmd_cover(const std::string& input) {
    const json doc = read_input(input);
    const json& parts_doc = ellin::io::require_key(doc, "parts");
    if (!parts_doc.is_array() || parts_doc.empty())
        throw ellin::ParseError("parts must be a nonempty array");
    std::vector<ellin::Ellipsoid> parts;
    for (std::size_t i = 0; i < parts_doc.size(); ++i)
        parts.push_back(ellin::io::parse_ellipsoid(parts_doc[i],
                                                   "parts[" + std::to_string(i) + "]"));
    const ellin::Ellipsoid tmpl =
        ellin::io::parse_ellipsoid(ellin::io::require_key(doc, "template"), "template");
    const ellin::CoverResult c = ellin::cover(parts, tmpl);
    const json out{{"gamma", c.gamma},
                   {"argmax_index", c.argmax_index},
                   {"gammas", ellin::io::vector_json(c.gammas)},
                   {"maximizations", c.maximizations}};
    std::cout << out.dump(2) << "\n";
    return kExitContained;
}

int cmd_invariant(const std::string& input) {
    const json doc = read_input(input);
    const ellin::DisturbedSystem sys = ellin::io::parse_system(doc);
    const ellin::InvariantLevel lvl = ellin::invariant_level(sys);

    json pieces = json::array();
    for (const ellin::ViolationEllipsoid& v : lvl.pieces)
        pieces.push_back(json{{"vertex", ellin::io::vector_json(v.vertex)},
                              {"r", v.r},
                              {"set", ellin::io::ellipsoid_json(v.set)}});
    json out{{"gamma", "__GAMMA__"},
             {"pieces", pieces},
             {"maximizations", lvl.cover.maximizations}};

    if (doc.contains("simulate")) {
        const json& sim = doc.at("simulate");
        const ellin::Vector x0 =
            ellin::io::parse_vector(ellin::io::require_key(sim, "x0"), "simulate.x0");
        const double horizon =
            sim.contains("horizon") ? ellin::io::parse_number(sim.at("horizon"), "horizon") : 30.0;
        const double dt =
            sim.contains("dt") ? ellin::io::parse_number(sim.at("dt"), "dt") : 1e-3;
        std::uint64_t seeds = 10;
        if (sim.contains("seeds")) {
            if (!sim.at("seeds").is_number_unsigned())
                throw ellin::ParseError("simulate.seeds must be a nonnegative integer");
            seeds = sim.at("seeds").get<std::uint64_t>();
        }
        std::uint64_t violations = 0;
        json first;
        for (std::uint64_t s = 1; s <= seeds; ++s) {
            const ellin::SimulationResult r =
                ellin::simulate_check(sys, lvl.gamma, x0, horizon, dt, s);
            if (r.violation) {
                ++violations;
                if (first.is_null())
                    first = json{{"seed", s},
                                 {"time", r.violation_time},
                                 {"state", ellin::io::vector_json(
                                               r.trajectory[r.violation_step])}};
            }
        }
        out["simulation"] =
            json{{"seeds", seeds}, {"violations", violations}, {"first_violation", first}};
    }

    std::string text = out.dump(2);
    const std::string placeholder = "\"__GAMMA__\"";
    text.replace(text.find(placeholder), placeholder.size(), sig15(lvl.gamma));
    std::cout << text << "\n";
    return kExitContained;
}

int cmd_bench(const std::vector<std::size_t>& dims, std::size_t cases, std::uint64_t seed,
              const std::string& out_path, double eps) {
    std::ostringstream csv;
    csv << "n,case_id,verdict,iterations,wall_time_ns,rule_fired,gamma\n";

    for (std::size_t n : dims) {
        std::vector<std::int64_t> times;
        times.reserve(cases);
        for (std::size_t case_id = 0; case_id < cases; ++case_id) {
            const ellin::bench::BenchInstance inst =
                ellin::bench::generate_instance(seed, n, case_id);

            ellin::InclusionVerdict v;
            std::vector<std::int64_t> reps(10);
            for (int rep = 0; rep < 10; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                v = ellin::decide(inst.inner, inst.outer, eps);
                const auto t1 = std::chrono::steady_clock::now();
                reps[rep] =
                    std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
            }
            std::sort(reps.begin(), reps.end());
            const std::int64_t median = (reps[4] + reps[5]) / 2;
            times.push_back(median);

            const ellin::ScalingResult s = ellin::minimal_scaling(inst.inner, inst.outer);
            csv << n << ',' << case_id << ',' << ellin::relation_name(v.relation) << ','
                << v.iterations << ',' << median << ',' << v.rule << ','
                << sig15(s.gamma) << '\n';
        }
        std::sort(times.begin(), times.end());
        double mean = 0.0;
        for (std::int64_t t : times) mean += static_cast<double>(t);
        mean /= static_cast<double>(times.size());
        const std::int64_t med = times[times.size() / 2];
        std::cerr << "n=" << n << " cases=" << cases << " median_ns=" << med
                  << " mean_ns=" << static_cast<std::int64_t>(mean) << "\n";
    }

    if (out_path.empty() || out_path == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw ellin::Error("cannot open output file: " + out_path);
        f << csv.str();
    }
    return kExitContained;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ellipsoid containment toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    double eps = ellin::tolerances::kDefaultEps;
    double tol = ellin::tolerances::kDefaultTol;
    app.add_option("--eps", eps, "bracket resolution on the multiplier axis")
        ->capture_default_str();
    app.add_option("--tol", tol, "touching tolerance for contact computations")
        ->capture_default_str();

    std::string check_input, gamma_input, contact_input, cover_input, invariant_input;
    bool rescale = false;
    std::vector<std::size_t> dims{3, 10, 30, 100};
    std::size_t cases = 200;
    std::uint64_t seed = 1;
    std::string bench_out;

    CLI::App* check = app.add_subcommand("check", "decide containment of inner in outer");
    check->add_option("input", check_input, "JSON file with inner and outer ('-' = stdin)");

    CLI::App* gamma = app.add_subcommand("gamma", "minimal inflation factor of outer");
    gamma->add_option("input", gamma_input, "JSON file with inner and outer ('-' = stdin)");
    gamma->add_flag("--rescale", rescale, "also emit the touching rescaled pair");

    CLI::App* contact = app.add_subcommand("contact", "contact points of a touching pair");
    contact->add_option("input", contact_input, "JSON file with inner and outer ('-' = stdin)");

    CLI::App* cover = app.add_subcommand("cover", "minimal template inflation covering a family");
    cover->add_option("input", cover_input, "JSON file with parts and template ('-' = stdin)");

    CLI::App* invariant =
        app.add_subcommand("invariant", "invariant level set of a disturbed linear system");
    invariant->add_option("input", invariant_input,
                          "JSON file with A, B, H, P, K, disturbance_vertices ('-' = stdin)");

    CLI::App* bench = app.add_subcommand("bench", "labeled benchmark corpus with timings");
    bench->add_option("--dims", dims, "dimensions to benchmark")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--cases", cases, "cases per dimension")->capture_default_str();
    bench->add_option("--seed", seed, "base seed for instance generation")
        ->capture_default_str();
    bench->add_option("--out", bench_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        if (app.got_subcommand(check)) return cmd_check(check_input, eps);
        if (app.got_subcommand(gamma)) return cmd_gamma(gamma_input, rescale);
        if (app.got_subcommand(contact)) return cmd_contact(contact_input, tol);
        if (app.got_subcommand(cover)) return cmd_cover(cover_input);
        if (app.got_subcommand(invariant)) return cmd_invariant(invariant_input);
        if (app.got_subcommand(bench)) return cmd_bench(dims, cases, seed, bench_out, eps);
    } catch (const ellin::NotTouching& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotTouching;
    } catch (const ellin::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ellin::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidProblem;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
