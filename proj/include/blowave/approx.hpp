#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "blowave/asymptotic.hpp"
#include "blowave/fit.hpp"

namespace bw {

/// Quintic smoothstep 6x^5 - 15x^4 + 10x^3, clamped to [0, 1]. C^2 switch.
inline double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

/// Cutoff data for the approximate solution
///   u_app(t, x) = eps r^-1 eta(t) psi(r/t) U(eps ln t - delta, r - t, omega).
/// eta switches on over [t0, 2 t0] with t0 = exp(delta/eps), so the slow time
/// eps ln t - delta is nonnegative wherever eta is nonzero. psi is 1 on
/// [3/4, 5/4] and 0 outside [1/2, 3/2].
struct CutoffSpec {
    double epsilon = 0.1;
    double delta = 0.1;

    double t0() const { return std::exp(delta / epsilon); }
    double eta(double t) const { return smoothstep(t / t0() - 1.0); }
    double psi(double sigma) const {
        return smoothstep((sigma - 0.5) * 4.0) * (1.0 - smoothstep((sigma - 1.25) * 4.0));
    }
    /// Slow time; negative arguments are frozen at s = 0 (out-of-model, only
    /// reachable if a caller bypasses the eta support).
    double slow_time(double t) const { return std::max(0.0, epsilon * std::log(t) - delta); }
};

/// Pointwise u_app. Zero outside {t > t0} ∩ {1/2 <= r/t <= 3/2} ∩ {r - t > -R}.
inline double eval_uapp(const AsymptoticData& data, const CutoffSpec& spec, double t, double r,
                        const Vec3& omega = {0, 0, 1}) {
    if (t <= spec.t0() || r <= 0.0) return 0.0;
    const double sigma = r / t;
    if (sigma <= 0.5 || sigma >= 1.5) return 0.0;
    const double q = r - t;
    if (data.compact() && q <= -data.support_radius) return 0.0;
    const double u = integrate_U_smooth(data, spec.slow_time(t), q, omega);
    return spec.epsilon / r * spec.eta(t) * spec.psi(sigma) * u;
}

namespace detail {
// 4th-order central differences.
template <class F>
double d1(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}
template <class F>
double d2(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) /
           (12.0 * h * h);
}
}  // namespace detail

/// dt u_app by finite differences.
inline double dt_uapp(const AsymptoticData& data, const CutoffSpec& spec, double t, double r,
                      const Vec3& omega = {0, 0, 1}, double step = 5e-3) {
    return detail::d1([&](double tt) { return eval_uapp(data, spec, tt, r, omega); }, t, step);
}

/// Residual  Box u_app + (dt u_app)^2  =  Delta u_app - dtt u_app + (dt u_app)^2,
/// evaluated through w = r u_app so the radial Laplacian is w_rr / r.
inline double uapp_residual(const AsymptoticData& data, const CutoffSpec& spec, double t, double r,
                            const Vec3& omega = {0, 0, 1}, double step = 5e-3) {
    auto w_of_t = [&](double tt) { return r * eval_uapp(data, spec, tt, r, omega); };
    auto w_of_r = [&](double rr) { return rr * eval_uapp(data, spec, t, rr, omega); };
    const double w_tt = detail::d2(w_of_t, t, step);
    const double w_rr = detail::d2(w_of_r, r, step);
    const double w_t = detail::d1(w_of_t, t, step);
    return (w_rr - w_tt) / r + (w_t / r) * (w_t / r);
}

/// Memoizing u_app evaluator for compact radial data. Off the strip |r - t| < R
/// the profile U(s, q) is constant in q (q >= R) or zero (q <= -R), so those
/// evaluations reduce to one cached quadrature per slow time s. Values agree
/// with eval_uapp exactly.
class CachedUapp {
  public:
    CachedUapp(const AsymptoticData& data, const CutoffSpec& spec)
        : data_(&data), spec_(spec) {
        if (!data.compact())
            throw std::invalid_argument("CachedUapp: datum must be compactly supported");
    }

    double operator()(double t, double r) const {
        if (t <= spec_.t0() || r <= 0.0) return 0.0;
        const double sigma = r / t;
        if (sigma <= 0.5 || sigma >= 1.5) return 0.0;
        const double q = r - t;
        const double R = data_->support_radius;
        if (q <= -R) return 0.0;
        const double s = spec_.slow_time(t);
        const double u = q >= R ? full_value(s) : integrate_U_smooth(*data_, s, q);
        return spec_.epsilon / r * spec_.eta(t) * spec_.psi(sigma) * u;
    }

    double dt(double t, double r, double step = 5e-3) const {
        return detail::d1([&](double tt) { return (*this)(tt, r); }, t, step);
    }

    double residual(double t, double r, double step = 5e-3) const {
        auto w_of_t = [&](double tt) { return r * (*this)(tt, r); };
        auto w_of_r = [&](double rr) { return rr * (*this)(t, rr); };
        const double w_tt = detail::d2(w_of_t, t, step);
        const double w_rr = detail::d2(w_of_r, r, step);
        const double w_t = detail::d1(w_of_t, t, step);
        return (w_rr - w_tt) / r + (w_t / r) * (w_t / r);
    }

  private:
    double full_value(double s) const {
        for (const auto& [ss, u] : full_)
            if (ss == s) return u;
        const double u = integrate_U_smooth(*data_, s, data_->support_radius);
        if (full_.size() > 64) full_.erase(full_.begin());
        full_.emplace_back(s, u);
        return u;
    }

    const AsymptoticData* data_;
    CutoffSpec spec_;
    mutable std::vector<std::pair<double, double>> full_;
};

struct VectorFieldDecay {
    LineFit dt_fit;      // |dt u_app| against (1+t)
    LineFit dr_fit;      // |dr u_app|
    LineFit scaling_fit; // |S u_app|, S = t dt + r dr
    bool all_zero = false;
};

/// Decay exponents of the |I| = 1 vector fields dt, dr, S = t dt + r dr applied
/// to u_app along a fixed-q probe ray, fitted in log-log against (1+t).
inline VectorFieldDecay first_order_vectorfield_check(const AsymptoticData& data,
                                                      const CutoffSpec& spec, double q_probe,
                                                      const std::vector<double>& t_probes,
                                                      double step = 5e-3) {
    std::vector<double> ts, dts, drs, ss;
    double maxabs = 0.0;
    for (double t : t_probes) {
        const double r = t + q_probe;
        const double ut =
            detail::d1([&](double tt) { return eval_uapp(data, spec, tt, r); }, t, step);
        const double ur =
            detail::d1([&](double rr) { return eval_uapp(data, spec, t, rr); }, r, step);
        ts.push_back(1.0 + t);
        dts.push_back(ut);
        drs.push_back(ur);
        ss.push_back(t * ut + r * ur);
        maxabs = std::max({maxabs, std::abs(ut), std::abs(ur)});
    }
    VectorFieldDecay rep;
    if (maxabs == 0.0) {
        rep.all_zero = true;
        return rep;
    }
    rep.dt_fit = fit_loglog(ts, dts);
    rep.dr_fit = fit_loglog(ts, drs);
    rep.scaling_fit = fit_loglog(ts, ss);
    return rep;
}

/// Fitted exponent of the residual magnitude along a fixed-q ray.
inline LineFit residual_decay_fit(const AsymptoticData& data, const CutoffSpec& spec,
                                  double q_probe, const std::vector<double>& t_probes,
                                  double step = 5e-3) {
    std::vector<double> ts, rs;
    for (double t : t_probes) {
        ts.push_back(1.0 + t);
        rs.push_back(uapp_residual(data, spec, t, t + q_probe, {0, 0, 1}, step));
    }
    return fit_loglog(ts, rs);
}

/// Fitted exponent of sup_r |u_app(t, .)| (scanned over the data support band).
inline LineFit amplitude_decay_fit(const AsymptoticData& data, const CutoffSpec& spec,
                                   const std::vector<double>& t_probes, std::size_t n_scan = 64) {
    const double R = data.compact() ? data.support_radius : -data.q_min;
    std::vector<double> ts, as;
    for (double t : t_probes) {
        double m = 0.0;
        for (std::size_t j = 0; j < n_scan; ++j) {
            const double q = -R + 2.0 * R * double(j) / double(n_scan - 1);
            m = std::max(m, std::abs(eval_uapp(data, spec, t, t + q)));
        }
        ts.push_back(1.0 + t);
        as.push_back(m);
    }
    return fit_loglog(ts, as);
}

}  // namespace bw
