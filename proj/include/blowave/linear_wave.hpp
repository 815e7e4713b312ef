#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "blowave/grid.hpp"
#include "blowave/quadrature.hpp"

namespace bw {

namespace detail {
/// Even extension of the spherical mean to negative radii.
inline double mean_even(const ScalarField3& f, const Vec3& x0, double rho,
                        const SphereQuadrature& quad) {
    return spherical_mean(f, x0, std::abs(rho), quad);
}
}  // namespace detail

/// Pointwise value of the solution to the homogeneous wave equation,
///   u_lin(t, x0) = d/dr(r M_{x0}[u0])(t) + t M_{x0}[u1](t)   for t >= 0,
/// extended to t < 0 by time reversal (u1 -> -u1). The radial derivative is a
/// 4th-order central difference of r M_{x0}[u0](r) at r = |t|.
inline double kirchhoff_eval(const ScalarField3& u0, const ScalarField3& u1, double t,
                             const Vec3& x0, const SphereQuadrature& quad,
                             double fd_step = 5e-3) {
    const double tau = std::abs(t);
    const double h = fd_step;
    auto g = [&](double rho) { return rho * detail::mean_even(u0, x0, rho, quad); };
    const double dg = (-g(tau + 2 * h) + 8.0 * g(tau + h) - 8.0 * g(tau - h) + g(tau - 2 * h)) /
                      (12.0 * h);
    const double p1 = tau * spherical_mean(u1, x0, tau, quad);
    return dg + (t < 0.0 ? -p1 : p1);
}

/// d'Alembert formula for the spherical means of u_lin about x0:
///   M[u_lin(t)](r) = (1/2r)((r+t)M[u0](r+t) + (r-t)M[u0](r-t))
///                  + (1/2r) ∫_{r-t}^{r+t} rho M[u1](rho) drho
/// with means extended evenly to negative radii. The integral is a trapezoid
/// rule on n_sub subintervals.
inline double dalembert_mean(const ScalarField3& u0, const ScalarField3& u1, const Vec3& x0,
                             double t, double r, const SphereQuadrature& quad,
                             std::size_t n_sub = 128) {
    if (!(r > 0.0))
        throw std::invalid_argument("dalembert_mean: r must be positive (use kirchhoff_eval at r=0)");
    const double bnd = (r + t) * detail::mean_even(u0, x0, r + t, quad) +
                       (r - t) * detail::mean_even(u0, x0, r - t, quad);
    const double a = r - t, b = r + t;
    const double dx = (b - a) / double(n_sub);
    double integral = 0.0;
    for (std::size_t i = 0; i <= n_sub; ++i) {
        const double rho = a + dx * double(i);
        const double g = rho * detail::mean_even(u1, x0, rho, quad);
        integral += (i == 0 || i == n_sub) ? 0.5 * g : g;
    }
    integral *= dx;
    return (bnd + integral) / (2.0 * r);
}

/// The classifier primitive: M_{x0}[dt u_lin(t)](r) expressed through boundary
/// values of the linear solution,
///   M[dt u_lin(t)](r) = (1/2r)(u_lin(r+t, x0) - u_lin(-(r-t), x0)).
inline double dt_mean_boundary_identity(const ScalarField3& u0, const ScalarField3& u1,
                                        const Vec3& x0, double t, double r,
                                        const SphereQuadrature& quad) {
    if (!(r > 0.0)) throw std::invalid_argument("dt_mean_boundary_identity: r must be positive");
    return (kirchhoff_eval(u0, u1, r + t, x0, quad) -
            kirchhoff_eval(u0, u1, -(r - t), x0, quad)) /
           (2.0 * r);
}

/// Tabulated linear solution at a fixed center: u_lin(t, x0) = P0(|t|) +- P1(|t|)
/// where P0 = d/dr(r M[u0]) and P1(r) = r M[u1](r). Cheap to evaluate many times.
class LinearSolutionTable {
  public:
    LinearSolutionTable(const ScalarField3& u0, const ScalarField3& u1, const Vec3& x0,
                        double tau_max, std::size_t n_points, const SphereQuadrature& quad)
        : x0_(x0) {
        RadialGrid g(tau_max, n_points);
        RadialProfile m0 = mean_profile(u0, x0, g, quad);
        RadialProfile rm0 = m0;
        for (std::size_t i = 0; i < g.n_points; ++i) rm0[i] *= g.r(i);
        p0_ = radial_derivative(rm0, 1);
        p1_ = mean_profile(u1, x0, g, quad);
        for (std::size_t i = 0; i < g.n_points; ++i) p1_[i] *= g.r(i);
    }

    double ulin(double t) const {
        const double tau = std::abs(t);
        const double p1 = p1_.interp(tau);
        return p0_.interp(tau) + (t < 0.0 ? -p1 : p1);
    }

    /// Decay of the data premise at the far end of the table.
    double tail_magnitude() const {
        return std::max(std::abs(p0_.values.back()), std::abs(p1_.values.back()));
    }

    const Vec3& center() const { return x0_; }

  private:
    Vec3 x0_;
    RadialProfile p0_, p1_;
};

enum class SignCondition { ForwardPositive, BackwardNegative, NonnegativeEverywhere, Inconclusive };

inline const char* to_string(SignCondition c) {
    switch (c) {
        case SignCondition::ForwardPositive: return "ForwardPositive";
        case SignCondition::BackwardNegative: return "BackwardNegative";
        case SignCondition::NonnegativeEverywhere: return "NonnegativeEverywhere";
        default: return "Inconclusive";
    }
}

struct SignWitness {
    Vec3 x0;
    double q = 0.0;
    double r0 = 0.0;
    double margin = 0.0;
};

struct SignConditionReport {
    SignCondition condition = SignCondition::Inconclusive;
    std::optional<SignWitness> witness;
    bool decay_premise_ok = true;
    double decay_tail = 0.0;   // max tail magnitude seen over the candidate centers
    double min_sampled_ulin = 0.0;
};

struct SignSearchSpec {
    std::vector<Vec3> x0_candidates;
    double q_max = 8.0;
    std::size_t n_q = 64;
    double r_max = 16.0;
    std::size_t n_r = 128;
    double margin_tol = 1e-6;
    double decay_tol = 1e-2;
    std::size_t table_points = 4096;

    static SignSearchSpec defaults() {
        SignSearchSpec s;
        s.x0_candidates = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                           {2, 0, 0}, {0, 2, 0}, {0, 0, 2}};
        return s;
    }
};

/// Search the three sign conditions of the linear evolution over a finite
/// lattice of centers, offsets q and radii r. A negative value of u_lin(-q, x0)
/// witnesses the first condition, a negative u_lin(q, x0) the second; r0 is the
/// smallest sampled radius past which |u_lin(2r - q, x0)| stays below half the
/// witness value.
inline SignConditionReport classify_sign_condition(const ScalarField3& u0, const ScalarField3& u1,
                                                   const SignSearchSpec& spec,
                                                   const SphereQuadrature& quad) {
    if (spec.x0_candidates.empty() || spec.n_q == 0)
        throw std::invalid_argument("classify_sign_condition: empty search set");

    const double tau_max = 2.0 * spec.r_max + spec.q_max;

    struct Candidate {
        double margin;
        bool forward;  // true: condition 1, false: condition 2
        std::size_t center;
        double q;
    };
    std::vector<Candidate> hits;

    SignConditionReport report;
    report.min_sampled_ulin = std::numeric_limits<double>::infinity();

    std::vector<LinearSolutionTable> tables;
    tables.reserve(spec.x0_candidates.size());
    for (const auto& x0 : spec.x0_candidates)
        tables.emplace_back(u0, u1, x0, tau_max, spec.table_points, quad);

    for (auto& tb : tables) {
        report.decay_tail = std::max(report.decay_tail, tb.tail_magnitude());
        for (std::size_t k = 0; k < spec.n_q; ++k) {
            const double q = spec.q_max * double(k) / double(spec.n_q - 1);
            const double um = tb.ulin(-q);
            const double up = tb.ulin(q);
            report.min_sampled_ulin = std::min({report.min_sampled_ulin, um, up});
            const auto ci = std::size_t(&tb - tables.data());
            if (-um > spec.margin_tol) hits.push_back({-um, true, ci, q});
            if (-up > spec.margin_tol) hits.push_back({-up, false, ci, q});
        }
    }
    report.decay_premise_ok = report.decay_tail < spec.decay_tol;

    std::sort(hits.begin(), hits.end(),
              [](const Candidate& a, const Candidate& b) { return a.margin > b.margin; });

    for (const auto& c : hits) {
        const auto& tb = tables[c.center];
        // Boundary term to dominate: u_lin(+-(2r - q), x0) along the sampled radii.
        const double half = 0.5 * c.margin;
        std::vector<bool> small(spec.n_r);
        for (std::size_t j = 0; j < spec.n_r; ++j) {
            const double r = c.q + (spec.r_max - c.q) * double(j) / double(spec.n_r - 1);
            const double bnd = c.forward ? tb.ulin(2.0 * r - c.q) : tb.ulin(-(2.0 * r - c.q));
            small[j] = std::abs(bnd) < half;
        }
        std::optional<std::size_t> first;
        for (std::size_t j = spec.n_r; j-- > 0;) {
            if (!small[j]) break;
            first = j;
        }
        if (first) {
            const double r0 =
                c.q + (spec.r_max - c.q) * double(*first) / double(spec.n_r - 1);
            report.condition =
                c.forward ? SignCondition::ForwardPositive : SignCondition::BackwardNegative;
            report.witness = SignWitness{tables[c.center].center(), c.q, r0, half};
            return report;
        }
    }

    if (hits.empty() && report.min_sampled_ulin >= -spec.margin_tol)
        report.condition = SignCondition::NonnegativeEverywhere;
    else
        report.condition = SignCondition::Inconclusive;
    return report;
}

}  // namespace bw
