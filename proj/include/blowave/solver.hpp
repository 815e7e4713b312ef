#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blowave/approx.hpp"
#include "blowave/asymptotic.hpp"
#include "blowave/grid.hpp"

namespace bw {

enum class SolveStatus { Completed, BlewUp, Diverged };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Completed: return "Completed";
        case SolveStatus::BlewUp: return "BlewUp";
        default: return "Diverged";
    }
}

struct SolveOutcome {
    SpacetimeField field;   // u for forward runs, v for backward runs
    SolveStatus status = SolveStatus::Completed;
    double t_blow = 0.0;
    double r_blow = 0.0;
    std::vector<std::pair<double, double>> energy_trace;
    std::vector<std::pair<double, double>> max_dtu_trace;
    RadialProfile final_u;   // slice at the last computed time
    RadialProfile final_ut;  // its time derivative
};

struct SchemeParams {
    double cfl = 0.9;
    double blowup_threshold = 1e6;
    bool lagged_source = false;   // skip the corrector pass
    std::size_t store_stride = 0; // 0: choose so that <= ~2048 slices are kept
    std::size_t trace_stride = 8;
};

enum class OuterBc { Dirichlet, Absorbing };

namespace detail {

/// Explicit second-order evolution of w(t, r), w(0-th node) = 0, with
///   w_tt - w_rr = S(t, j, w_t)
/// stepped from t_start by n_steps increments of dt (dt may be negative).
/// The source is evaluated from the half-step-lagged w_t and, unless lagged
/// mode is requested, corrected once with the time-centered w_t.
struct Evolver {
    RadialGrid grid;
    double t_start, dt;
    std::size_t n_steps;
    std::function<double(double, std::size_t, double)> source;  // (t, j, w_t) -> S
    OuterBc bc = OuterBc::Dirichlet;
    SchemeParams params;

    SolveOutcome run(std::vector<double> w0, const std::vector<double>& wt0) const {
        const std::size_t J = grid.n_points;
        const double h = grid.spacing();
        if (std::abs(dt) / h > 1.0 + 1e-12)
            throw std::invalid_argument("CFL violation: |dt|/h must be <= 1");
        const double lam2 = (dt / h) * (dt / h);

        SolveOutcome out;
        out.field.t_start = t_start;
        out.field.grid = grid;
        out.field.represents = FieldKind::u;
        std::size_t stride = params.store_stride;
        if (stride == 0) stride = std::max<std::size_t>(1, n_steps / 2048);
        out.field.dt = dt * double(stride);

        std::vector<double> w_prev = std::move(w0), w_curr(J), w_next(J);
        // First step: Taylor start from (w, w_t).
        w_curr = w_prev;
        for (std::size_t j = 1; j + 1 < J; ++j) {
            const double lap = (w_prev[j + 1] - 2.0 * w_prev[j] + w_prev[j - 1]) / (h * h);
            const double s = source(t_start, j, wt0[j]);
            w_curr[j] = w_prev[j] + dt * wt0[j] + 0.5 * dt * dt * (lap + s);
        }
        w_curr[0] = 0.0;
        apply_bc(w_curr, w_prev, h);

        auto store = [&](const std::vector<double>& w) {
            out.field.values.push_back(u_slice(w, h));
        };
        store(w_prev);

        for (std::size_t n = 1; n <= n_steps; ++n) {
            const double t = t_start + dt * double(n);  // time of w_curr
            if (n % stride == 0) store(w_curr);
            record_max_dtu(out, w_curr, w_prev, t);
            if (check_stop(out, w_curr, w_prev, t)) break;
            if (n == n_steps) {
                if (n % params.trace_stride == 0)
                    out.energy_trace.emplace_back(t, slice_energy(w_curr, w_prev, w_curr, h,
                                                                  dt));
                break;
            }
            step(w_prev, w_curr, w_next, t, lam2, h);
            // energy with a time-centered u_t, one step behind
            if (n % params.trace_stride == 0)
                out.energy_trace.emplace_back(t, slice_energy(w_curr, w_prev, w_next, h,
                                                              2.0 * dt));
            std::swap(w_prev, w_curr);
            std::swap(w_curr, w_next);
        }
        out.final_u = RadialProfile(grid, u_slice(w_curr, h));
        std::vector<double> wt_final(J);
        for (std::size_t j = 0; j < J; ++j) wt_final[j] = (w_curr[j] - w_prev[j]) / dt;
        out.final_ut = RadialProfile(grid, u_slice(wt_final, h));
        return out;
    }

  private:
    void step(const std::vector<double>& w_prev, const std::vector<double>& w_curr,
              std::vector<double>& w_next, double tn, double lam2, double h) const {
        const std::size_t J = grid.n_points;
        w_next[0] = 0.0;
        // predictor with lagged w_t
        for (std::size_t j = 1; j + 1 < J; ++j) {
            const double lap = w_curr[j + 1] - 2.0 * w_curr[j] + w_curr[j - 1];
            const double wt_lag = (w_curr[j] - w_prev[j]) / dt;
            w_next[j] = 2.0 * w_curr[j] - w_prev[j] + lam2 * lap +
                        dt * dt * source(tn, j, wt_lag);
        }
        if (!params.lagged_source) {
            for (std::size_t j = 1; j + 1 < J; ++j) {
                const double lap = w_curr[j + 1] - 2.0 * w_curr[j] + w_curr[j - 1];
                const double wt_c = (w_next[j] - w_prev[j]) / (2.0 * dt);
                w_next[j] = 2.0 * w_curr[j] - w_prev[j] + lam2 * lap +
                            dt * dt * source(tn, j, wt_c);
            }
        }
        apply_bc(w_next, w_curr, h);
    }

    void apply_bc(std::vector<double>& w_new, const std::vector<double>& w_old, double h) const {
        const std::size_t J = grid.n_points;
        if (bc == OuterBc::Dirichlet) {
            w_new[J - 1] = 0.0;
        } else {
            // Characteristic (absorbing) condition: waves leaving through r_max
            // satisfy w_t = -sign(dt) w_r.
            const double c = dt > 0 ? -1.0 : 1.0;
            w_new[J - 1] = w_old[J - 1] + dt * c * (w_old[J - 1] - w_old[J - 2]) / h;
        }
    }

    /// u = w / r with the origin value extrapolated from w_r(0).
    std::vector<double> u_slice(const std::vector<double>& w, double h) const {
        const std::size_t J = grid.n_points;
        std::vector<double> u(J);
        for (std::size_t j = 1; j < J; ++j) u[j] = w[j] / grid.r(j);
        u[0] = (4.0 * w[1] - w[2]) / (2.0 * h);
        return u;
    }

    void record_max_dtu(SolveOutcome& out, const std::vector<double>& w_curr,
                        const std::vector<double>& w_prev, double t) const {
        const std::size_t J = grid.n_points;
        double m = 0.0;
        for (std::size_t j = 1; j < J; ++j) {
            const double ut = (w_curr[j] - w_prev[j]) / (dt * grid.r(j));
            m = std::max(m, std::abs(ut));
        }
        out.max_dtu_trace.emplace_back(t, m);
    }

    double slice_energy(const std::vector<double>& w_curr, const std::vector<double>& w_lo,
                        const std::vector<double>& w_hi, double h, double span) const {
        const std::size_t J = grid.n_points;
        std::vector<double> u(J), ut(J);
        for (std::size_t j = 1; j < J; ++j) {
            u[j] = w_curr[j] / grid.r(j);
            ut[j] = (w_hi[j] - w_lo[j]) / (span * grid.r(j));
        }
        u[0] = (4.0 * w_curr[1] - w_curr[2]) / (2.0 * h);
        ut[0] = (4.0 * (w_hi[1] - w_lo[1]) - (w_hi[2] - w_lo[2])) / (2.0 * h * span);
        RadialProfile up(grid, std::move(u));
        RadialProfile utp(grid, std::move(ut));
        RadialProfile ur = radial_derivative(up, 1);
        return weighted_l2(utp) + weighted_l2(ur);
    }

    bool check_stop(SolveOutcome& out, const std::vector<double>& w_curr,
                    const std::vector<double>& w_prev, double t) const {
        const std::size_t J = grid.n_points;
        double m = 0.0;
        std::size_t jmax = 1;
        bool finite = true;
        for (std::size_t j = 1; j < J; ++j) {
            if (!std::isfinite(w_curr[j])) finite = false;
            const double ut = std::abs((w_curr[j] - w_prev[j]) / (dt * grid.r(j)));
            if (ut > m) {
                m = ut;
                jmax = j;
            }
        }
        if (!finite) {
            out.status = SolveStatus::Diverged;
            out.t_blow = t;
            return true;
        }
        if (m > params.blowup_threshold) {
            out.status = SolveStatus::BlewUp;
            out.t_blow = t - 0.5 * dt;  // bracketed by the last two steps
            out.r_blow = grid.r(jmax);
            return true;
        }
        return false;
    }
};

}  // namespace detail

/// Forward evolution of -Box u = (dt u)^2 for radial data, via w = r u with
///   w_tt - w_rr = (w_t)^2 / r.
/// Stops at t_max or when max |dt u| crosses the blow-up threshold.
inline SolveOutcome solve_forward(const RadialProfile& u0, const RadialProfile& u1, double t_max,
                                  const SchemeParams& params = {}) {
    if (!(u0.grid == u1.grid))
        throw std::invalid_argument("solve_forward: u0 and u1 must share a grid");
    const RadialGrid& g = u0.grid;
    const double h = g.spacing();
    const double dt = params.cfl * h;
    const auto n_steps = std::size_t(std::ceil(t_max / dt));

    detail::Evolver ev;
    ev.grid = g;
    ev.t_start = 0.0;
    ev.dt = dt;
    ev.n_steps = n_steps;
    ev.params = params;
    ev.bc = OuterBc::Dirichlet;
    ev.source = [g](double, std::size_t j, double wt) { return wt * wt / g.r(j); };

    std::vector<double> w0(g.n_points), wt0(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        w0[j] = g.r(j) * u0[j];
        wt0[j] = g.r(j) * u1[j];
    }
    return ev.run(std::move(w0), wt0);
}

/// Backward Cauchy problem of the scattering construction: v == 0 at t = 2T,
///   v_tt - Delta v = (v_t + 2 dt u_app) v_t + chi(t/T) (Box u_app + (dt u_app)^2),
/// stepped from t = 2T down to t = 0. Returns v (u = v + u_app).
struct BackwardProblemSpec {
    AsymptoticData data;
    CutoffSpec cutoffs;
    double T = 50.0;
    double grid_h = 0.1;
    double margin = 5.0;
    double r_max = 0.0;  // 0: derive 2T + R + margin; set explicitly to share a
                         // grid across different T for Cauchy-gap comparisons
    SchemeParams scheme;
};

inline double chi_switch(double x) {
    const double a = std::abs(x);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return 1.0 - smoothstep(a - 1.0);
}

inline SolveOutcome solve_backward(const BackwardProblemSpec& spec) {
    if (!(spec.T > 1.0)) throw std::invalid_argument("solve_backward: T must exceed 1");
    if (!spec.data.compact())
        throw std::invalid_argument("solve_backward: asymptotic datum must be compactly supported");
    const double R = spec.data.support_radius;
    const double r_max = spec.r_max > 0.0 ? spec.r_max : 2.0 * spec.T + R + spec.margin;
    if (r_max < 2.0 * spec.T + R)
        throw std::invalid_argument("solve_backward: r_max too small for the data cone");
    const auto n_points = std::size_t(std::ceil(r_max / spec.grid_h)) + 1;
    RadialGrid g(r_max, n_points);
    const double h = g.spacing();
    const double dt = -spec.scheme.cfl * h;
    const auto n_steps = std::size_t(std::ceil(2.0 * spec.T / (-dt)));

    // Per-row cache of dt u_app and chi * residual on the grid.
    struct RowCache {
        double t = -1.0;
        std::vector<double> a, b;
    };
    auto cache = std::make_shared<RowCache>();
    cache->a.assign(g.n_points, 0.0);
    cache->b.assign(g.n_points, 0.0);

    auto uapp = std::make_shared<CachedUapp>(spec.data, spec.cutoffs);
    const CutoffSpec& cut = spec.cutoffs;
    const double T = spec.T;

    auto fill_row = [&, cache, uapp](double t) {
        cache->t = t;
        std::fill(cache->a.begin(), cache->a.end(), 0.0);
        std::fill(cache->b.begin(), cache->b.end(), 0.0);
        if (t <= cut.t0()) return;
        const double ch = chi_switch(t / T);
        const double pad = 0.1;
        for (std::size_t j = 1; j < g.n_points; ++j) {
            const double r = g.r(j);
            if (r <= 0.5 * t - pad || r >= 1.5 * t + pad) continue;
            if (r - t <= -R - pad) continue;
            cache->a[j] = uapp->dt(t, r);
            if (ch != 0.0) cache->b[j] = ch * uapp->residual(t, r);
        }
    };

    detail::Evolver ev;
    ev.grid = g;
    ev.t_start = 2.0 * spec.T;
    ev.dt = dt;
    ev.n_steps = n_steps;
    ev.params = spec.scheme;
    ev.bc = OuterBc::Absorbing;
    ev.source = [g, cache, fill_row](double t, std::size_t j, double wt) {
        if (cache->t != t) fill_row(t);
        const double r = g.r(j);
        return wt * wt / r + 2.0 * cache->a[j] * wt + r * cache->b[j];
    };

    std::vector<double> w0(g.n_points, 0.0), wt0(g.n_points, 0.0);
    return ev.run(std::move(w0), wt0);
}

/// Unweighted energy E = ||du(t)||^2_{L^2(R^3)} = 4 pi ∫ (u_t^2 + u_r^2) r^2 dr
/// of a stored field slice.
inline double energy(const SpacetimeField& field, double t) {
    const RadialGrid& g = field.grid;
    std::vector<double> u(g.n_points), ut(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        u[j] = field.at(t, g.r(j));
        ut[j] = field.dt_at(t, g.r(j));
    }
    RadialProfile up(g, std::move(u));
    RadialProfile utp(g, std::move(ut));
    RadialProfile ur = radial_derivative(up, 1);
    return weighted_l2(utp) + weighted_l2(ur);
}

/// sup over t in [0, t_upper] of ||d(v1 - v2)(t)||_{L^2}, for two backward
/// solves stored on the same radial grid.
inline double cauchy_gap(const SolveOutcome& run1, const SolveOutcome& run2, double t_upper,
                         std::size_t n_times = 64) {
    if (!(run1.field.grid == run2.field.grid))
        throw std::invalid_argument("cauchy_gap: grid mismatch (resample first)");
    const RadialGrid& g = run1.field.grid;
    double gap = 0.0;
    for (std::size_t k = 0; k < n_times; ++k) {
        const double t = t_upper * double(k) / double(n_times - 1);
        std::vector<double> dv(g.n_points), dvt(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double r = g.r(j);
            dv[j] = run1.field.at(t, r) - run2.field.at(t, r);
            dvt[j] = run1.field.dt_at(t, r) - run2.field.dt_at(t, r);
        }
        RadialProfile dvp(g, std::move(dv));
        RadialProfile dvtp(g, std::move(dvt));
        RadialProfile dvr = radial_derivative(dvp, 1);
        gap = std::max(gap, std::sqrt(weighted_l2(dvtp) + weighted_l2(dvr)));
    }
    return gap;
}

/// Defect of the (corrected) discrete scheme on an exact solution u(t, r),
/// used for convergence-order studies.
inline double scheme_residual(const std::function<double(double, double)>& u, double t, double r,
                              double h, double dt, bool lagged = false) {
    auto w = [&](double tt, double rr) { return rr * u(tt, rr); };
    const double lap = (w(t, r + h) - 2.0 * w(t, r) + w(t, r - h)) / (h * h);
    const double wt_lag = (w(t, r) - w(t - dt, r)) / dt;
    double wt_src = wt_lag;
    if (!lagged) {
        const double w_pred = 2.0 * w(t, r) - w(t - dt, r) + dt * dt * (lap + wt_lag * wt_lag / r);
        wt_src = (w_pred - w(t - dt, r)) / (2.0 * dt);
    }
    const double wtt = (w(t + dt, r) - 2.0 * w(t, r) + w(t - dt, r)) / (dt * dt);
    return wtt - lap - wt_src * wt_src / r;
}

}  // namespace bw
