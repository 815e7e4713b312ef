#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bw {

constexpr double pi = 3.14159265358979323846;

/// Uniform radial grid on [0, r_max], including r = 0.
struct RadialGrid {
    double r_max = 1.0;
    std::size_t n_points = 2;

    RadialGrid() = default;
    RadialGrid(double rmax, std::size_t n) : r_max(rmax), n_points(n) {
        if (n_points < 3) throw std::invalid_argument("RadialGrid: n_points must be >= 3");
        if (!(r_max > 0.0)) throw std::invalid_argument("RadialGrid: r_max must be positive");
    }

    double spacing() const { return r_max / double(n_points - 1); }
    double r(std::size_t i) const { return double(i) * spacing(); }

    bool operator==(const RadialGrid& o) const {
        return r_max == o.r_max && n_points == o.n_points;
    }
};

/// Sampled function of r >= 0 on a uniform grid.
struct RadialProfile {
    RadialGrid grid;
    std::vector<double> values;

    RadialProfile() = default;
    RadialProfile(RadialGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n_points)
            throw std::invalid_argument("RadialProfile: values size does not match grid");
    }

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::size_t size() const { return values.size(); }

    /// Linear interpolation; clamps to the boundary values.
    double interp(double r) const {
        const double h = grid.spacing();
        if (r <= 0.0) return values.front();
        if (r >= grid.r_max) return values.back();
        const double x = r / h;
        const auto i = std::size_t(x);
        const double w = x - double(i);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "r,value\n";
        out.precision(17);
        for (std::size_t i = 0; i < size(); ++i)
            out << grid.r(i) << "," << values[i] << "\n";
    }
};

enum class FieldKind { u, v_equals_r_times_u };

/// Sampled v(t,r) (or u(t,r)) on a rectangular (t,r) grid. Row n holds the
/// slice at t = t_start + n*dt; dt may be negative for reversed-time storage.
struct SpacetimeField {
    double t_start = 0.0;
    double dt = 1.0;
    RadialGrid grid;
    FieldKind represents = FieldKind::u;
    std::vector<std::vector<double>> values;  // values[n][j]

    double t_end() const { return t_start + dt * double(values.size() - 1); }
    std::size_t n_steps() const { return values.size(); }

    double time_of(std::size_t n) const { return t_start + dt * double(n); }

    /// Bilinear interpolation in (t, r). Clamps to the stored range.
    double at(double t, double r) const {
        const double ti = (t - t_start) / dt;
        const double ri = r / grid.spacing();
        const double tif = std::clamp(ti, 0.0, double(values.size() - 1));
        const double rif = std::clamp(ri, 0.0, double(grid.n_points - 1));
        auto n = std::min(std::size_t(tif), values.size() - 2);
        auto j = std::min(std::size_t(rif), grid.n_points - 2);
        const double a = tif - double(n);
        const double b = rif - double(j);
        return (1 - a) * (1 - b) * values[n][j] + (1 - a) * b * values[n][j + 1] +
               a * (1 - b) * values[n + 1][j] + a * b * values[n + 1][j + 1];
    }

    /// Time derivative by centered differences of stored slices (one-sided at ends),
    /// then linear interpolation in r.
    double dt_at(double t, double r) const {
        const double ti = std::clamp((t - t_start) / dt, 0.0, double(values.size() - 1));
        auto n = std::size_t(ti + 0.5);
        n = std::min(n, values.size() - 1);
        auto slice_dt = [&](std::size_t m, std::size_t j) {
            if (m == 0) return (values[1][j] - values[0][j]) / dt;
            if (m + 1 == values.size())
                return (values[m][j] - values[m - 1][j]) / dt;
            return (values[m + 1][j] - values[m - 1][j]) / (2.0 * dt);
        };
        const double rif = std::clamp(r / grid.spacing(), 0.0, double(grid.n_points - 1));
        auto j = std::min(std::size_t(rif), grid.n_points - 2);
        const double b = rif - double(j);
        return (1 - b) * slice_dt(n, j) + b * slice_dt(n, j + 1);
    }

    void write_csv(const std::string& path, std::size_t decimate_t = 1,
                   std::size_t decimate_r = 1) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "t,r,value\n";
        out.precision(17);
        for (std::size_t n = 0; n < values.size(); n += decimate_t)
            for (std::size_t j = 0; j < grid.n_points; j += decimate_r)
                out << time_of(n) << "," << grid.r(j) << "," << values[n][j] << "\n";
    }
};

/// Node-wise evaluation of f on the grid. Rejects non-finite values.
inline RadialProfile sample_function(const std::function<double(double)>& f,
                                     const RadialGrid& grid) {
    std::vector<double> v(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        v[i] = f(grid.r(i));
        if (!std::isfinite(v[i]))
            throw std::invalid_argument("sample_function: non-finite value at node " +
                                        std::to_string(i));
    }
    return {grid, std::move(v)};
}

/// 2nd-order finite differences: centered in the interior, one-sided at the ends.
inline RadialProfile radial_derivative(const RadialProfile& p, int order = 1) {
    const std::size_t n = p.size();
    const double h = p.grid.spacing();
    if (order != 1 && order != 2)
        throw std::invalid_argument("radial_derivative: order must be 1 or 2");
    if (order == 2 && n < 5)
        throw std::invalid_argument("radial_derivative: order 2 needs n_points >= 5");
    std::vector<double> d(n);
    const auto& v = p.values;
    if (order == 1) {
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    } else {
        const double h2 = h * h;
        d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        for (std::size_t i = 1; i + 1 < n; ++i)
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    }
    return {p.grid, std::move(d)};
}

/// Trapezoid value of the radial measure integral  ∫ f(r)^2 4π r^2 dr  on [0, r_max].
inline double weighted_l2(const RadialProfile& p) {
    const double h = p.grid.spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = p.grid.r(i);
        const double g = p.values[i] * p.values[i] * 4.0 * pi * r * r;
        sum += (i == 0 || i + 1 == p.size()) ? 0.5 * g : g;
    }
    return sum * h;
}

}  // namespace bw
