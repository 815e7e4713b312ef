#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowave/fit.hpp"
#include "blowave/grid.hpp"
#include "blowave/quadrature.hpp"

namespace bw {

constexpr double inf = std::numeric_limits<double>::infinity();

/// The denominator of the profile solution vanished; an expected, reportable
/// outcome rather than a failure.
struct BlowupReached : std::runtime_error {
    double s, q;
    BlowupReached(double s_, double q_)
        : std::runtime_error("asymptotic profile blew up at s=" + std::to_string(s_) +
                             ", q=" + std::to_string(q_)),
          s(s_), q(q_) {}
};

enum class SignCertificate { Nonnegative, MixedSign };

/// Scattering datum A(q, omega) = U_q(0, q, omega). Either compactly supported
/// in |q| <= support_radius, or decaying like <q>^-gamma with gamma > 1 (then
/// support_radius is inf and q_min truncates the profile integral, with tail
/// bound ~ <q_min>^(1-gamma)).
struct AsymptoticData {
    std::function<double(double, const Vec3&)> A;
    double support_radius = inf;
    double decay_gamma = 0.0;
    SignCertificate sign_certificate = SignCertificate::MixedSign;
    double q_min = -40.0;

    double operator()(double q, const Vec3& omega = {0, 0, 1}) const { return A(q, omega); }

    bool compact() const { return std::isfinite(support_radius); }
    double lower_limit() const { return compact() ? -support_radius : q_min; }
};

/// Smooth compactly supported bump of height a on (center-w, center+w),
/// A(q) = a exp(1 - 1/(1 - x^2)), x = (q - center)/w.
inline AsymptoticData bump_data(double a, double w, double center = 0.0) {
    AsymptoticData d;
    d.A = [a, w, center](double q, const Vec3&) {
        const double x = (q - center) / w;
        if (std::abs(x) >= 1.0) return 0.0;
        return a * std::exp(1.0 - 1.0 / (1.0 - x * x));
    };
    d.support_radius = std::abs(center) + w;
    d.sign_certificate = a >= 0.0 ? SignCertificate::Nonnegative : SignCertificate::MixedSign;
    return d;
}

/// A(q) = <q>^-gamma, gamma > 1.
inline AsymptoticData powerlaw_data(double gamma, double q_min = -300.0) {
    if (!(gamma > 1.0)) throw std::invalid_argument("powerlaw_data: gamma must exceed 1");
    AsymptoticData d;
    d.A = [gamma](double q, const Vec3&) { return std::pow(1.0 + q * q, -0.5 * gamma); };
    d.decay_gamma = gamma;
    d.q_min = q_min;
    d.sign_certificate = SignCertificate::Nonnegative;
    return d;
}

/// Closed-form q-derivative of the profile:
///   U_q(s, q, omega) = 2 A / (A s + 2),  A = A(q, omega).
inline double solve_Uq(const AsymptoticData& data, double s, double q,
                       const Vec3& omega = {0, 0, 1}, double denom_tol = 1e-12) {
    const double a = data(q, omega);
    const double denom = a * s + 2.0;
    if (std::abs(denom) < denom_tol) throw BlowupReached(s, q);
    return 2.0 * a / denom;
}

/// Lifespan of the profile over a sample lattice in q: +inf when min A >= 0,
/// otherwise 2/|min A|.
inline double asymptotic_lifespan(const AsymptoticData& data, const std::vector<double>& q_lattice,
                                  const Vec3& omega = {0, 0, 1}) {
    if (q_lattice.empty()) throw std::invalid_argument("asymptotic_lifespan: empty lattice");
    double amin = inf;
    for (double q : q_lattice) amin = std::min(amin, data(q, omega));
    if (amin >= 0.0) return inf;
    return 2.0 / (-amin);
}

inline std::vector<double> uniform_lattice(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

/// Profile value U(s, q, omega) = ∫_{-inf}^q 2A/(As+2) drho, computed by the
/// trapezoid rule with the given step. The lower limit is -support_radius for
/// compact data, q_min otherwise; the boundary condition U -> 0 as q -> -inf
/// holds by construction.
inline double integrate_U(const AsymptoticData& data, double s, double q,
                          const Vec3& omega = {0, 0, 1}, double step = 1e-3) {
    const double lo = data.lower_limit();
    double hi = q;
    if (data.compact()) hi = std::min(q, data.support_radius);
    if (hi <= lo) return 0.0;
    const auto n = std::max<std::size_t>(2, std::size_t((hi - lo) / step) + 1);
    const double dx = (hi - lo) / double(n - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = lo + dx * double(i);
        const double a = data(rho, omega);
        const double denom = a * s + 2.0;
        if (denom < 1e-12) throw BlowupReached(s, rho);
        const double g = 2.0 * a / denom;
        sum += (i == 0 || i + 1 == n) ? 0.5 * g : g;
    }
    return sum * dx;
}

/// Same integral by a fixed-panel Gauss-Legendre rule. Smooth in (s, q), which
/// matters when the caller differentiates through it.
inline double integrate_U_smooth(const AsymptoticData& data, double s, double q,
                                 const Vec3& omega = {0, 0, 1}, std::size_t points = 32,
                                 std::size_t panels = 1) {
    const double lo = data.lower_limit();
    double hi = q;
    if (data.compact()) hi = std::min(q, data.support_radius);
    if (hi <= lo) return 0.0;
    auto f = [&](double rho) {
        const double a = data(rho, omega);
        const double denom = a * s + 2.0;
        if (denom < 1e-12) throw BlowupReached(s, rho);
        return 2.0 * a / denom;
    };
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + (hi - lo) * double(p) / double(panels);
        const double b = lo + (hi - lo) * double(p + 1) / double(panels);
        sum += gl_integrate(f, a, b, points);
    }
    return sum;
}

/// Sampled profile U, U_q over an (s, q) grid with lifespan metadata.
struct AsymptoticProfile {
    std::vector<double> s_grid;
    std::vector<double> q_grid;
    std::vector<std::vector<double>> U;    // U[i][j] at (s_i, q_j)
    std::vector<std::vector<double>> U_q;
    double lifespan = inf;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "s,q,U,U_q\n";
        out.precision(17);
        for (std::size_t i = 0; i < s_grid.size(); ++i)
            for (std::size_t j = 0; j < q_grid.size(); ++j)
                out << s_grid[i] << "," << q_grid[j] << "," << U[i][j] << "," << U_q[i][j]
                    << "\n";
    }
};

inline AsymptoticProfile tabulate_profile(const AsymptoticData& data,
                                          const std::vector<double>& s_grid,
                                          const std::vector<double>& q_grid,
                                          const Vec3& omega = {0, 0, 1}) {
    AsymptoticProfile p;
    p.s_grid = s_grid;
    p.q_grid = q_grid;
    p.lifespan = asymptotic_lifespan(data, q_grid, omega);
    for (double s : s_grid) {
        if (s >= p.lifespan) throw BlowupReached(s, 0.0);
        std::vector<double> urow, uqrow;
        for (double q : q_grid) {
            urow.push_back(integrate_U_smooth(data, s, q, omega));
            uqrow.push_back(solve_Uq(data, s, q, omega));
        }
        p.U.push_back(std::move(urow));
        p.U_q.push_back(std::move(uqrow));
    }
    return p;
}

/// Fitted slope of log U(s, q_fixed) against log(1+s) over [s_lo, s_hi]; the
/// range must span at least a decade. Rejects data that vanish at q_fixed.
inline LineFit decay_rate_U(const AsymptoticData& data, double q_fixed, double s_lo, double s_hi,
                            std::size_t n_samples = 24, const Vec3& omega = {0, 0, 1}) {
    if (!(s_hi >= 10.0 * s_lo) || !(s_lo > 0.0))
        throw std::invalid_argument("decay_rate_U: need at least a decade of s");
    std::vector<double> xs, ys;
    const std::size_t panels = data.compact() ? 1 : 256;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double s =
            s_lo * std::pow(s_hi / s_lo, double(i) / double(n_samples - 1));
        const double u = integrate_U_smooth(data, s, q_fixed, omega, 32, panels);
        if (!(u > 0.0)) throw std::invalid_argument("decay_rate_U: profile vanishes at q_fixed");
        xs.push_back(1.0 + s);
        ys.push_back(u);
    }
    return fit_loglog(xs, ys);
}

}  // namespace bw
