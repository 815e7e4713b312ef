#include <catch_amalgamated.hpp>

#include <cmath>

#include "blowave/solver.hpp"

using namespace bw;

namespace {

RadialProfile constant_profile(const RadialGrid& g, double c) {
    return sample_function([c](double) { return c; }, g);
}

RadialProfile bump_profile(const RadialGrid& g, double a, double w) {
    return sample_function(
        [a, w](double r) {
            const double x = r / w;
            if (x >= 1.0) return 0.0;
            return a * std::exp(1.0 - 1.0 / (1.0 - x * x));
        },
        g);
}

}  // namespace

TEST_CASE("zero data stays zero") {
    RadialGrid g(4.0, 201);
    auto out = solve_forward(constant_profile(g, 0.0), constant_profile(g, 0.0), 2.0);
    CHECK(out.status == SolveStatus::Completed);
    for (const auto& row : out.field.values)
        for (double v : row) CHECK(v == 0.0);
    for (const auto& [t, m] : out.max_dtu_trace) CHECK(m == 0.0);
}

TEST_CASE("cfl guard") {
    RadialGrid g(2.0, 101);
    SchemeParams p;
    p.cfl = 1.2;
    CHECK_THROWS_AS(solve_forward(constant_profile(g, 0.0), constant_profile(g, 0.0), 1.0, p),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_forward(constant_profile(g, 0.0),
                                  constant_profile(RadialGrid(2.0, 51), 0.0), 1.0),
                    std::invalid_argument);
}

TEST_CASE("spatially homogeneous ode blow-up") {
    // u1 = a everywhere emulates dt u_t = u_t^2, so u(t,0) = -ln(1 - a t) and
    // u_t blows up at t = 1/a. The origin is clean of boundary effects for
    // t < r_max.
    const double a = 1.0;
    RadialGrid g(2.0, 1025);  // h = 1/512
    auto out = solve_forward(constant_profile(g, 0.0), constant_profile(g, a), 1.5);
    REQUIRE(out.status == SolveStatus::BlewUp);
    CHECK(out.t_blow == Catch::Approx(1.0 / a).epsilon(0.02));

    // u(t, 0) tracks the closed form before blow-up
    for (double t : {0.25, 0.5, 0.75}) {
        CHECK(out.field.at(t, 0.0) == Catch::Approx(-std::log(1.0 - a * t)).epsilon(0.01));
    }
}

TEST_CASE("blow-up time sharpens under refinement") {
    const double a = 2.0;
    double prev_err = inf;
    for (std::size_t n : {257, 513, 1025}) {
        RadialGrid g(1.0, n);
        auto out = solve_forward(constant_profile(g, 0.0), constant_profile(g, a), 0.8);
        REQUIRE(out.status == SolveStatus::BlewUp);
        const double err = std::abs(out.t_blow - 0.5);
        CHECK(err < prev_err + 1e-12);
        prev_err = err;
    }
    CHECK(prev_err < 0.01);
}

TEST_CASE("scheme residual on the logarithmic solution") {
    // u = -ln(t + C) solves the equation exactly; the discrete defect must
    // shrink at 2nd order with the corrector and 1st order without.
    auto u = [](double t, double) { return -std::log(t + 2.0); };
    const double t = 1.0, r = 1.5;
    const double r1 = std::abs(scheme_residual(u, t, r, 0.02, 0.018));
    const double r2 = std::abs(scheme_residual(u, t, r, 0.01, 0.009));
    CHECK(r1 / r2 > 3.2);
    CHECK(r1 / r2 < 4.8);

    const double l1 = std::abs(scheme_residual(u, t, r, 0.02, 0.018, true));
    const double l2 = std::abs(scheme_residual(u, t, r, 0.01, 0.009, true));
    CHECK(l1 / l2 > 1.6);
    CHECK(l1 / l2 < 2.4);
}

TEST_CASE("solution converges under joint refinement") {
    // probe u(1, 1) for smooth non-blow-up data against a fine reference
    auto run_at = [](std::size_t n) {
        RadialGrid g(4.0, n);
        auto out = solve_forward(bump_profile(g, 0.1, 1.0), bump_profile(g, -0.05, 1.0), 1.0,
                                 SchemeParams{.cfl = 0.5});
        return out.final_u.interp(1.0);
    };
    const double ref = run_at(2049);
    const double e1 = std::abs(run_at(129) - ref);
    const double e2 = std::abs(run_at(257) - ref);
    CHECK(e1 / e2 > 3.2);
    CHECK(e1 / e2 < 4.8);
}

TEST_CASE("divergence is reported, not thrown") {
    RadialGrid g(1.0, 129);
    SchemeParams p;
    p.blowup_threshold = 1e300;
    auto out = solve_forward(constant_profile(g, 0.0), constant_profile(g, 50.0), 1.0, p);
    CHECK(out.status == SolveStatus::Diverged);
}

TEST_CASE("energy of stored fields") {
    RadialGrid g(6.0, 601);
    SpacetimeField f;
    f.grid = g;
    f.t_start = 0.0;
    f.dt = 0.01;
    std::vector<double> slice(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double r = g.r(j);
        slice[j] = std::exp(-r * r);
    }
    f.values = {slice, slice, slice};

    // zero field
    SpacetimeField z = f;
    for (auto& row : z.values) std::fill(row.begin(), row.end(), 0.0);
    CHECK(energy(z, 0.01) == 0.0);

    // standing profile: E = 4 pi ∫ u0'(r)^2 r^2 dr, oracle by quadrature of the
    // analytic derivative -2 r e^{-r^2}
    auto du = sample_function([](double r) { return -2.0 * r * std::exp(-r * r); }, g);
    const double oracle = weighted_l2(du);
    CHECK(energy(f, 0.01) == Catch::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("near-linear evolution conserves energy") {
    RadialGrid g(8.0, 801);
    auto out = solve_forward(bump_profile(g, 1e-3, 1.0), constant_profile(g, 0.0), 3.0);
    REQUIRE(out.status == SolveStatus::Completed);
    REQUIRE(out.energy_trace.size() > 5);
    const double e0 = out.energy_trace.front().second;
    REQUIRE(e0 > 0.0);
    for (const auto& [t, e] : out.energy_trace)
        CHECK(e == Catch::Approx(e0).epsilon(0.005));
}

TEST_CASE("domain of dependence") {
    auto probe = [](bool perturb) {
        RadialGrid g(6.0, 301);
        auto u0 = bump_profile(g, 0.2, 1.0);
        if (perturb) {
            for (std::size_t j = 0; j < g.n_points; ++j) {
                const double x = (g.r(j) - 4.2) / 0.7;
                if (std::abs(x) < 1.0) u0[j] += 0.3 * std::exp(1.0 - 1.0 / (1.0 - x * x));
            }
        }
        auto out = solve_forward(u0, constant_profile(g, 0.0), 1.0);
        REQUIRE(out.status == SolveStatus::Completed);
        return out.final_u.interp(0.0);
    };
    CHECK(std::abs(probe(true) - probe(false)) < 1e-10);
}

TEST_CASE("backward solve with zero data is zero") {
    BackwardProblemSpec spec;
    spec.data = bump_data(0.0, 1.0);
    spec.T = 5.0;
    auto out = solve_backward(spec);
    CHECK(out.status == SolveStatus::Completed);
    for (const auto& row : out.field.values)
        for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("backward solve guards") {
    BackwardProblemSpec spec;
    spec.data = bump_data(1.0, 1.0);
    spec.T = 0.5;
    CHECK_THROWS_AS(solve_backward(spec), std::invalid_argument);
    spec.T = 5.0;
    spec.data = powerlaw_data(2.0);
    CHECK_THROWS_AS(solve_backward(spec), std::invalid_argument);
}

TEST_CASE("backward solve produces a bounded correction") {
    BackwardProblemSpec spec;
    spec.data = bump_data(1.0, 1.0);
    spec.T = 10.0;
    auto out = solve_backward(spec);
    REQUIRE(out.status == SolveStatus::Completed);
    CHECK(out.field.t_end() <= 1e-9);

    // nontrivial ...
    double vmax = 0.0;
    for (const auto& row : out.field.values)
        for (double v : row) vmax = std::max(vmax, std::abs(v));
    CHECK(vmax > 0.0);
    CHECK(vmax < 1.0);  // perturbative scale for eps = 0.1

    // ... and silent beyond the incoming light cone r - t <= -R
    const double R = spec.data.support_radius;
    for (double t : {2.0, 8.0, 14.0}) {
        for (double r = 0.1; r < t - R - 0.5; r += 0.7)
            CHECK(std::abs(out.field.at(t, r)) < 1e-8);
    }
}

TEST_CASE("cauchy gap") {
    BackwardProblemSpec spec;
    spec.data = bump_data(1.0, 1.0);
    spec.T = 5.0;
    auto a = solve_backward(spec);
    CHECK(cauchy_gap(a, a, 5.0) == 0.0);

    BackwardProblemSpec other = spec;
    other.grid_h = 0.05;
    auto b = solve_backward(other);
    CHECK_THROWS_AS(cauchy_gap(a, b, 5.0), std::invalid_argument);
}
