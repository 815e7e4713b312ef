#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "blowave/grid.hpp"
#include "blowave/quadrature.hpp"

using namespace bw;

namespace {

double sinh_closed_form(double a, double r) {
    return std::exp(-(a * a + r * r)) * std::sinh(2.0 * a * r) / (2.0 * a * r);
}

// Monte-Carlo mean over the unit sphere, used once to validate the closed form.
double mc_mean(const ScalarField3& f, const Vec3& x0, double r, std::size_t n,
               unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 xi{gauss(rng), gauss(rng), gauss(rng)};
        const double len = std::sqrt(xi.x * xi.x + xi.y * xi.y + xi.z * xi.z);
        Vec3 p{x0.x + r * xi.x / len, x0.y + r * xi.y / len, x0.z + r * xi.z / len};
        sum += f(p);
    }
    return sum / double(n);
}

ScalarField3 gaussian3 = [](const Vec3& p) {
    return std::exp(-(p.x * p.x + p.y * p.y + p.z * p.z));
};

}  // namespace

TEST_CASE("quadrature weights") {
    SphereQuadrature q(32, 64);
    CHECK(q.weight_sum() == Catch::Approx(4.0 * pi).margin(1e-12));
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        CHECK(q.weights[i] > 0.0);
        CHECK(q.nodes[i].norm() == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("gauss_legendre nodes integrate polynomials") {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    double wsum = 0.0, m2 = 0.0, m14 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        wsum += w[i];
        m2 += w[i] * x[i] * x[i];
        m14 += w[i] * std::pow(x[i], 14);
    }
    CHECK(wsum == Catch::Approx(2.0).margin(1e-13));
    CHECK(m2 == Catch::Approx(2.0 / 3.0).margin(1e-13));
    CHECK(m14 == Catch::Approx(2.0 / 15.0).margin(1e-12));  // degree 14 < 2*8
}

TEST_CASE("spherical_mean basics") {
    SphereQuadrature q(32, 64);
    CHECK(spherical_mean([](const Vec3&) { return 1.0; }, {0.3, -0.2, 5.0}, 7.0, q) ==
          Catch::Approx(1.0).margin(1e-14));

    for (double r : {0.5, 1.0, 3.0})
        CHECK(spherical_mean([](const Vec3& p) { return p.x * p.x; }, {0, 0, 0}, r, q) ==
              Catch::Approx(r * r / 3.0).margin(1e-8));

    CHECK_THROWS(spherical_mean([](const Vec3& p) { return 1.0 / p.x; },
                                {0, 0, 0}, 0.0, q));
}

TEST_CASE("gaussian mean closed form") {
    const double a = 1.0, r = 2.0;
    const double cf = sinh_closed_form(a, r);
    // validate the closed form independently by Monte Carlo before trusting it
    const double mc = mc_mean(gaussian3, {0, 0, a}, r, 1000000, 20240817u);
    CHECK(mc == Catch::Approx(cf).margin(2e-4));

    SphereQuadrature q(32, 64);
    CHECK(spherical_mean(gaussian3, {0, 0, a}, r, q) == Catch::Approx(cf).margin(1e-6));
    CHECK(spherical_mean(gaussian3, {a, 0, 0}, r, q) == Catch::Approx(cf).margin(1e-6));
}

TEST_CASE("mean_profile") {
    SphereQuadrature q(32, 64);
    RadialGrid g(4.0, 41);

    auto cprof = mean_profile([](const Vec3&) { return 2.5; }, {1, 0, 0}, g, q);
    for (double v : cprof.values) CHECK(v == Catch::Approx(2.5).margin(1e-14));

    auto rad = mean_profile(gaussian3, {0, 0, 0}, g, q);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double r = g.r(i);
        CHECK(rad[i] == Catch::Approx(std::exp(-r * r)).margin(1e-10));
    }

    auto off = mean_profile(gaussian3, {0, 1, 0}, g, q);
    CHECK(off[0] == Catch::Approx(std::exp(-1.0)).margin(1e-12));
    for (std::size_t i = 1; i < g.n_points; ++i) {
        const double r = g.r(i);
        CHECK(off[i] == Catch::Approx(sinh_closed_form(1.0, r)).margin(1e-6));
    }
}

TEST_CASE("translation covariance") {
    SphereQuadrature q(32, 64);
    const Vec3 y{0.4, -1.1, 0.7};
    auto shifted = [&](const Vec3& p) {
        return gaussian3({p.x - y.x, p.y - y.y, p.z - y.z});
    };
    const Vec3 x0{0.2, 0.5, -0.3};
    for (double r : {0.5, 2.0}) {
        const double lhs = spherical_mean(shifted, x0, r, q);
        const double expect =
            spherical_mean(gaussian3, {x0.x - y.x, x0.y - y.y, x0.z - y.z}, r, q);
        CHECK(lhs == Catch::Approx(expect).margin(1e-10));
    }
}

TEST_CASE("monotonicity and cauchy-schwarz") {
    SphereQuadrature q(16, 32);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::uniform_real_distribution<double> rad(0.1, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double ax = uni(rng), ay = uni(rng), az = uni(rng);
        const double k = uni(rng);
        auto f = [&](const Vec3& p) {
            const double dx = p.x - ax, dy = p.y - ay, dz = p.z - az;
            return std::exp(-0.5 * (dx * dx + dy * dy + dz * dz)) +
                   0.3 * std::sin(k * p.x);
        };
        const Vec3 x0{uni(rng), uni(rng), uni(rng)};
        const double r = rad(rng);
        const double m = spherical_mean(f, x0, r, q);
        const double m2 = spherical_mean([&](const Vec3& p) { return f(p) * f(p); },
                                         x0, r, q);
        CHECK(m * m <= m2 + 1e-10);

        auto fp = [&](const Vec3& p) { return std::abs(f(p)); };
        CHECK(spherical_mean(fp, x0, r, q) >= 0.0);
    }
}
