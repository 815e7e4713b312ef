#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blowave/grid.hpp"
#include "blowave/quadrature.hpp"

namespace bw {

enum class BlowupFunctional { JohnBeta, BernhardtN };

struct BlowupCertificate {
    BlowupFunctional functional = BlowupFunctional::BernhardtN;
    Vec3 x0;
    double q = 0.0;
    double r0 = 0.0;
    double value_at_r0 = 0.0;
    double r_star = inf_certificate();
    double ode_inequality_margin = 0.0;
    bool truncated = false;  // the sampled characteristic left the field domain

    static constexpr double inf_certificate() { return std::numeric_limits<double>::infinity(); }
};

/// Cumulative trapezoid of samples (x_i, f_i) starting at zero.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                                const std::vector<double>& f) {
    std::vector<double> F(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        F[i] = F[i - 1] + 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
    return F;
}

/// John's beta along an outgoing characteristic of a radial field:
///   beta(rho) = ∫_{-q}^rho sigma |M_{sigma - q, sigma}[u]|^2 dsigma,   q < 0,
/// where the spherical mean about the origin of a radial field is the field
/// itself, interpolated bilinearly in (t, r). Samples past the stored time
/// range are dropped and the result flagged truncated.
struct BetaTrace {
    std::vector<double> rho;
    std::vector<double> beta;
    std::vector<double> integrand;  // sigma |M|^2 at the samples
    bool truncated = false;
};

inline BetaTrace beta_functional(const SpacetimeField& field, double q,
                                 const std::vector<double>& rho_grid) {
    if (!(q < 0.0)) throw std::invalid_argument("beta_functional: q must be negative");
    BetaTrace tr;
    const double t_lo = std::min(field.t_start, field.t_end());
    const double t_hi = std::max(field.t_start, field.t_end());
    for (double rho : rho_grid) {
        if (rho < -q) continue;
        const double t = rho - q;
        if (t < t_lo || t > t_hi || rho > field.grid.r_max) {
            tr.truncated = true;
            break;
        }
        const double m = field.at(t, rho);
        tr.rho.push_back(rho);
        tr.integrand.push_back(rho * m * m);
    }
    tr.beta = cumulative_trapezoid(tr.rho, tr.integrand);
    return tr;
}

/// Bernhardt's N along the characteristic t = rho - q (q >= 0):
///   N(r) = ∫_q^r rho (M[dt u(rho - q)](rho))^2 drho
/// with dt u from centered time differences of the stored radial field.
struct NTrace {
    std::vector<double> r;
    std::vector<double> N;
    std::vector<double> integrand;
    bool truncated = false;
};

inline NTrace n_functional(const SpacetimeField& field, double q,
                           const std::vector<double>& r_grid) {
    if (!(q >= 0.0)) throw std::invalid_argument("n_functional: q must be >= 0");
    NTrace tr;
    const double t_lo = std::min(field.t_start, field.t_end());
    const double t_hi = std::max(field.t_start, field.t_end());
    for (double r : r_grid) {
        if (r < q) continue;
        const double t = r - q;
        if (t < t_lo || t > t_hi || r > field.grid.r_max) {
            tr.truncated = true;
            break;
        }
        const double m = field.dt_at(t, r);
        tr.r.push_back(r);
        tr.integrand.push_back(r * m * m);
    }
    tr.N = cumulative_trapezoid(tr.r, tr.integrand);
    return tr;
}

/// Explicit blow-up radius bound r* = r0 exp(4 / N(r0)).
inline double blowup_radius_bound(double N_r0, double r0) {
    if (!(N_r0 > 0.0))
        throw std::invalid_argument("blowup_radius_bound: N(r0) must be positive");
    if (!(r0 > 0.0)) throw std::invalid_argument("blowup_radius_bound: r0 must be positive");
    return r0 * std::exp(4.0 / N_r0);
}

/// Margins of the ODE inequality N'(r) >= N^2/(4r) at interior samples.
struct OdeMarginReport {
    std::vector<double> r;
    std::vector<double> margin;  // N'(r) - N^2/(4r)
    double min_margin = 0.0;
};

inline OdeMarginReport ode_inequality_check(const std::vector<double>& r,
                                            const std::vector<double>& N) {
    if (r.size() != N.size() || r.size() < 5)
        throw std::invalid_argument("ode_inequality_check: need >= 5 matching samples");
    OdeMarginReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double dN = (N[i + 1] - N[i - 1]) / (r[i + 1] - r[i - 1]);
        const double m = dN - N[i] * N[i] / (4.0 * r[i]);
        rep.r.push_back(r[i]);
        rep.margin.push_back(m);
        rep.min_margin = std::min(rep.min_margin, m);
    }
    return rep;
}

inline void write_trace_csv(const std::string& path, const std::string& xname,
                            const std::string& yname, const std::vector<double>& x,
                            const std::vector<double>& y) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << xname << "," << yname << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << "," << y[i] << "\n";
}

}  // namespace bw
