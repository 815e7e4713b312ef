#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "blowave/grid.hpp"

namespace bw {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double c) const { return {x * c, y * c, z * c}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

using ScalarField3 = std::function<double(const Vec3&)>;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
inline void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (double(i) + 0.75) / (double(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * double(j) + 1.0) * z * p1 - double(j) * p2) / (double(j) + 1.0);
            }
            pp = double(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule (single panel).
inline double gl_integrate(const std::function<double(double)>& f, double a, double b,
                           std::size_t n = 32) {
    static thread_local std::vector<double> x, w;
    static thread_local std::size_t cached_n = 0;
    if (cached_n != n) {
        gauss_legendre(n, x, w);
        cached_n = n;
    }
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * f(c + s * x[i]);
    return sum * s;
}

/// Product quadrature on the unit sphere: Gauss-Legendre in cos(theta) times a
/// uniform rule in phi. Weights sum to 4*pi and the rule integrates constants
/// exactly.
struct SphereQuadrature {
    std::size_t n_theta;
    std::size_t n_phi;
    std::vector<Vec3> nodes;
    std::vector<double> weights;

    explicit SphereQuadrature(std::size_t ntheta = 32, std::size_t nphi = 64)
        : n_theta(ntheta), n_phi(nphi) {
        std::vector<double> x, w;
        gauss_legendre(n_theta, x, w);
        const double dphi = 2.0 * pi / double(n_phi);
        nodes.reserve(n_theta * n_phi);
        weights.reserve(n_theta * n_phi);
        for (std::size_t i = 0; i < n_theta; ++i) {
            const double ct = x[i];
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (std::size_t k = 0; k < n_phi; ++k) {
                const double phi = (double(k) + 0.5) * dphi;
                nodes.push_back({st * std::cos(phi), st * std::sin(phi), ct});
                weights.push_back(w[i] * dphi);
            }
        }
    }

    double weight_sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

/// Spherical mean  M_{x0}[f](r) = (1/4pi) ∫_{|xi|=1} f(x0 + r xi) dsigma(xi).
inline double spherical_mean(const ScalarField3& f, const Vec3& x0, double r,
                             const SphereQuadrature& quad) {
    if (r < 0.0) throw std::invalid_argument("spherical_mean: r must be >= 0");
    double sum = 0.0;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
        const double fv = f(x0 + quad.nodes[i] * r);
        if (!std::isfinite(fv))
            throw std::runtime_error("spherical_mean: non-finite integrand at node " +
                                     std::to_string(i));
        sum += quad.weights[i] * fv;
    }
    return sum / (4.0 * pi);
}

/// Profile of M_{x0}[f] over a radial grid; exact at r = 0 where M = f(x0).
inline RadialProfile mean_profile(const ScalarField3& f, const Vec3& x0,
                                  const RadialGrid& grid, const SphereQuadrature& quad) {
    std::vector<double> v(grid.n_points);
    v[0] = f(x0);
    for (std::size_t i = 1; i < grid.n_points; ++i)
        v[i] = spherical_mean(f, x0, grid.r(i), quad);
    return {grid, std::move(v)};
}

}  // namespace bw
