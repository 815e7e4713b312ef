#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "blowave/config.hpp"
#include "blowave/diagnostics.hpp"
#include "blowave/fit.hpp"
#include "blowave/linear_wave.hpp"
#include "blowave/solver.hpp"

namespace bw {

using json = nlohmann::ordered_json;

// Exit-code taxonomy: blow-up is a scientific result, not a failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIoError = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitBlewUp = 10;
inline constexpr int kExitDiverged = 20;

struct RunReport {
    int exit_code = kExitOk;
    std::string summary_line;
    json summary;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
}

inline json json_number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline void write_energy_csv(const std::filesystem::path& path, const SolveOutcome& out) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << "t,E\n";
    os.precision(17);
    for (const auto& [t, e] : out.energy_trace) os << t << "," << e << "\n";
}

inline RadialProfile sample_radial(const GeneratorSpec& g, const RadialGrid& grid) {
    auto f = make_scalar_field(g);
    return sample_function([&](double r) { return f({r, 0, 0}); }, grid);
}

/// Fitted exponent of sqrt(E(t)) against (1+t) over [t_lo, t_hi].
inline std::optional<LineFit> energy_decay_fit(const SolveOutcome& out, double t_lo,
                                               double t_hi) {
    std::vector<double> ts, es;
    for (const auto& [t, e] : out.energy_trace)
        if (t >= t_lo && t <= t_hi && e > 0.0) {
            ts.push_back(1.0 + t);
            es.push_back(std::sqrt(e));
        }
    if (ts.size() < 4) return std::nullopt;
    return fit_loglog(ts, es);
}

}  // namespace detail

inline json to_json(const SignConditionReport& rep) {
    json j;
    j["condition"] = to_string(rep.condition);
    if (rep.witness) {
        json w;
        w["x0"] = {rep.witness->x0.x, rep.witness->x0.y, rep.witness->x0.z};
        w["q"] = rep.witness->q;
        w["r0"] = rep.witness->r0;
        w["margin"] = rep.witness->margin;
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    j["decay_premise_ok"] = rep.decay_premise_ok;
    j["decay_tail"] = rep.decay_tail;
    j["min_sampled_ulin"] = rep.min_sampled_ulin;
    return j;
}

inline json to_json(const BlowupCertificate& c) {
    json j;
    j["functional"] = c.functional == BlowupFunctional::JohnBeta ? "JohnBeta" : "BernhardtN";
    j["x0"] = {c.x0.x, c.x0.y, c.x0.z};
    j["q"] = c.q;
    j["r0"] = c.r0;
    j["value_at_r0"] = c.value_at_r0;
    j["r_star"] = detail::json_number_or_inf(c.r_star);
    j["ode_inequality_margin"] = c.ode_inequality_margin;
    j["truncated"] = c.truncated;
    return j;
}

/// Bernhardt certificate extracted from a stored forward field along the
/// characteristic t = r - q.
inline std::optional<BlowupCertificate> certify_from_field(const SpacetimeField& field, double q,
                                                           std::size_t n_samples = 256) {
    const double t_hi = std::max(field.t_start, field.t_end());
    const double r_hi = std::min(field.grid.r_max, t_hi + q);
    if (r_hi <= q) return std::nullopt;
    auto tr = n_functional(field, q, uniform_lattice(q, r_hi, n_samples));
    if (tr.r.size() < 5) return std::nullopt;
    // r0: first sample where N has risen above a sliver of its final value.
    const double nf = tr.N.back();
    if (!(nf > 0.0)) return std::nullopt;
    std::size_t i0 = 0;
    while (i0 + 1 < tr.N.size() && tr.N[i0] < 1e-3 * nf) ++i0;
    BlowupCertificate cert;
    cert.functional = BlowupFunctional::BernhardtN;
    cert.q = q;
    cert.r0 = tr.r[i0];
    cert.value_at_r0 = tr.N[i0];
    if (cert.value_at_r0 > 0.0 && cert.r0 > 0.0)
        cert.r_star = blowup_radius_bound(cert.value_at_r0, cert.r0);
    cert.ode_inequality_margin = ode_inequality_check(tr.r, tr.N).min_margin;
    cert.truncated = tr.truncated;
    return cert;
}

inline RunReport run(const RunConfig& cfg);

namespace detail {

inline RunReport run_asymptotic(const RunConfig& cfg, const std::filesystem::path& dir) {
    RunReport rep;
    const AsymptoticData data = make_asymptotic_data(cfg.A);
    const double lo = data.lower_limit();
    const double hi = data.compact() ? data.support_radius : cfg.q_max;
    const auto lattice = uniform_lattice(lo, hi, std::max<std::size_t>(cfg.n_q, 2));
    const double lifespan = asymptotic_lifespan(data, lattice);

    std::string status = "Completed";
    try {
        const double s_hi = std::isfinite(lifespan) ? std::min(cfg.s_max, 0.9 * lifespan)
                                                    : cfg.s_max;
        auto prof = tabulate_profile(data, uniform_lattice(0.0, s_hi, std::max<std::size_t>(cfg.n_s, 2)),
                                     lattice);
        prof.write_csv((dir / "profile.csv").string());
    } catch (const BlowupReached&) {
        status = "BlewUp";
    }

    rep.summary["command"] = "asymptotic";
    rep.summary["status"] = status;
    rep.summary["lifespan"] = json_number_or_inf(lifespan);
    std::ostringstream line;
    line << "asymptotic: lifespan=";
    if (std::isinf(lifespan)) line << "inf";
    else line << lifespan;
    rep.summary_line = line.str();
    rep.exit_code = kExitOk;
    return rep;
}

inline RunReport run_forward(const RunConfig& cfg, const std::filesystem::path& dir) {
    RunReport rep;
    const auto n_points = std::size_t(std::ceil(cfg.r_max / cfg.h)) + 1;
    RadialGrid grid(cfg.r_max, n_points);
    RadialProfile u0 = sample_radial(cfg.u0, grid);
    RadialProfile u1 = sample_radial(cfg.u1, grid);
    SchemeParams params;
    params.cfl = cfg.cfl;
    params.blowup_threshold = cfg.blowup_threshold;
    params.lagged_source = cfg.lagged;
    SolveOutcome out = solve_forward(u0, u1, cfg.t_max, params);

    write_energy_csv(dir / "energy.csv", out);
    if (cfg.write_field)
        out.field.write_csv((dir / "field.csv").string(), std::max(1u, cfg.decimate),
                            std::max(1u, cfg.decimate));

    rep.summary["command"] = "forward";
    rep.summary["status"] = to_string(out.status);
    if (out.status == SolveStatus::BlewUp) {
        rep.summary["t_blow"] = out.t_blow;
        rep.summary["r_blow"] = out.r_blow;
        const double q = std::max(0.0, cfg.q_char);
        if (auto cert = certify_from_field(out.field, q)) {
            write_text(dir / "certificate.json", to_json(*cert).dump(2) + "\n");
            rep.summary["certificate"] = (dir / "certificate.json").string();
        }
    }
    std::ostringstream line;
    line << "forward: " << to_string(out.status);
    if (out.status == SolveStatus::BlewUp)
        line << " (blow-up detected, t=" << out.t_blow << ", r=" << out.r_blow << ")";
    rep.summary_line = line.str();
    rep.exit_code = out.status == SolveStatus::Completed ? kExitOk
                    : out.status == SolveStatus::BlewUp  ? kExitBlewUp
                                                         : kExitDiverged;
    return rep;
}

inline RunReport run_backward(const RunConfig& cfg, const std::filesystem::path& dir) {
    RunReport rep;
    BackwardProblemSpec spec;
    spec.data = make_asymptotic_data(cfg.A);
    spec.cutoffs.epsilon = cfg.epsilon;
    spec.cutoffs.delta = cfg.delta;
    spec.T = cfg.T;
    spec.grid_h = cfg.h;
    spec.margin = cfg.margin;
    spec.scheme.cfl = cfg.cfl;
    spec.scheme.blowup_threshold = cfg.blowup_threshold;
    spec.scheme.lagged_source = cfg.lagged;
    SolveOutcome out = solve_backward(spec);

    write_energy_csv(dir / "energy.csv", out);
    {
        std::ofstream os(dir / "data_slice.csv");
        os << "r,u0,u1\n";
        os.precision(17);
        for (std::size_t j = 0; j < out.final_u.size(); ++j)
            os << out.final_u.grid.r(j) << "," << out.final_u[j] << "," << out.final_ut[j]
               << "\n";
    }
    if (cfg.write_field)
        out.field.write_csv((dir / "field.csv").string(), std::max(1u, cfg.decimate),
                            std::max(1u, cfg.decimate));

    rep.summary["command"] = "backward";
    rep.summary["status"] = to_string(out.status);
    rep.summary["T"] = cfg.T;
    rep.summary["epsilon"] = cfg.epsilon;
    if (auto fit = energy_decay_fit(out, 5.0, cfg.T))
        rep.summary["energy_sqrt_exponent"] = fit->slope;
    std::ostringstream line;
    line << "backward: " << to_string(out.status) << " T=" << cfg.T << " eps=" << cfg.epsilon;
    rep.summary_line = line.str();
    rep.exit_code = out.status == SolveStatus::Completed ? kExitOk
                    : out.status == SolveStatus::BlewUp  ? kExitBlewUp
                                                         : kExitDiverged;
    return rep;
}

inline RunReport run_signcheck(const RunConfig& cfg, const std::filesystem::path& dir) {
    RunReport rep;
    auto u0 = make_scalar_field(cfg.u0);
    auto u1 = make_scalar_field(cfg.u1);
    SphereQuadrature quad;
    SignSearchSpec spec = SignSearchSpec::defaults();
    spec.q_max = cfg.q_max;
    spec.r_max = cfg.r_max;
    auto report = classify_sign_condition(u0, u1, spec, quad);
    write_text(dir / "sign_report.json", to_json(report).dump(2) + "\n");
    rep.summary["command"] = "signcheck";
    rep.summary["report"] = to_json(report);
    rep.summary_line = std::string("signcheck: ") + to_string(report.condition);
    rep.exit_code = kExitOk;
    return rep;
}

inline RunReport run_diagnose(const RunConfig& cfg, const std::filesystem::path& dir) {
    RunReport rep;
    const auto n_points = std::size_t(std::ceil(cfg.r_max / cfg.h)) + 1;
    RadialGrid grid(cfg.r_max, n_points);
    RadialProfile u0 = sample_radial(cfg.u0, grid);
    RadialProfile u1 = sample_radial(cfg.u1, grid);
    SchemeParams params;
    params.cfl = cfg.cfl;
    params.blowup_threshold = cfg.blowup_threshold;
    params.lagged_source = cfg.lagged;
    SolveOutcome out = solve_forward(u0, u1, cfg.t_max, params);

    const double R = std::max(generator_support(cfg.u0), generator_support(cfg.u1));
    const double qb = cfg.q_char < 0.0 ? cfg.q_char
                                       : -(std::isfinite(R) ? R + 1.0 : 1.0);
    const double t_hi = std::max(out.field.t_start, out.field.t_end());
    auto beta = beta_functional(out.field, qb,
                                uniform_lattice(-qb, std::max(-qb + 1.0, t_hi + qb), 256));
    write_trace_csv((dir / "beta.csv").string(), "rho", "beta", beta.rho, beta.beta);
    const double qn = std::max(0.0, cfg.q_char);
    auto ntr = n_functional(out.field, qn,
                            uniform_lattice(qn, std::min(out.field.grid.r_max, t_hi + qn), 256));
    write_trace_csv((dir / "n_functional.csv").string(), "r", "N", ntr.r, ntr.N);
    if (auto cert = certify_from_field(out.field, qn))
        write_text(dir / "certificate.json", to_json(*cert).dump(2) + "\n");

    rep.summary["command"] = "diagnose";
    rep.summary["status"] = to_string(out.status);
    if (out.status == SolveStatus::BlewUp) {
        rep.summary["t_blow"] = out.t_blow;
        rep.summary["r_blow"] = out.r_blow;
    }
    rep.summary_line = std::string("diagnose: ") + to_string(out.status);
    rep.exit_code = out.status == SolveStatus::Completed ? kExitOk
                    : out.status == SolveStatus::BlewUp  ? kExitBlewUp
                                                         : kExitDiverged;
    return rep;
}

inline bool apply_sweep_param(RunConfig& cfg, const std::string& param, double value) {
    if (param == "solver.epsilon") cfg.epsilon = value;
    else if (param == "solver.delta") cfg.delta = value;
    else if (param == "solver.T") cfg.T = value;
    else if (param == "solver.t_max") cfg.t_max = value;
    else if (param == "solver.cfl") cfg.cfl = value;
    else if (param == "grid.h") cfg.h = value;
    else if (param == "grid.r_max") cfg.r_max = value;
    else if (param == "data.A.a") cfg.A.args["a"] = value;
    else if (param == "data.A.w") cfg.A.args["w"] = value;
    else if (param == "data.u1.a") cfg.u1.args["a"] = value;
    else return false;
    return true;
}

inline RunReport run_sweep(const RunConfig& cfg, const std::filesystem::path& dir) {
    RunReport rep;
    std::vector<RunConfig> jobs;
    for (double v : cfg.sweep_values) {
        RunConfig job = cfg;
        job.command = cfg.sweep_command;
        if (!apply_sweep_param(job, cfg.sweep_param, v)) {
            rep.exit_code = kExitConfigError;
            rep.summary_line = "sweep: unknown parameter '" + cfg.sweep_param + "'";
            return rep;
        }
        job.out_dir = (dir / ("job_" + std::to_string(jobs.size()))).string();
        jobs.push_back(std::move(job));
    }

    std::vector<RunReport> reports(jobs.size());
    const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < std::min(workers, jobs.size()); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                reports[i] = run(jobs[i]);
        });
    }
    for (auto& th : pool) th.join();

    std::ofstream agg(dir / "sweep.csv");
    agg << "value,status,exit_code\n";
    agg.precision(17);
    json items = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        agg << cfg.sweep_values[i] << ","
            << (reports[i].summary.contains("status")
                    ? reports[i].summary["status"].get<std::string>()
                    : "unknown")
            << "," << reports[i].exit_code << "\n";
        json item = reports[i].summary;
        item["sweep_value"] = cfg.sweep_values[i];
        items.push_back(item);
    }
    rep.summary["command"] = "sweep";
    rep.summary["param"] = cfg.sweep_param;
    rep.summary["jobs"] = items;
    std::ostringstream line;
    line << "sweep: " << jobs.size() << " jobs over " << cfg.sweep_param;
    rep.summary_line = line.str();
    for (const auto& r : reports) rep.summary_line += "\n  " + r.summary_line;
    rep.exit_code = kExitOk;
    return rep;
}

}  // namespace detail

/// Dispatch a validated config: write declared outputs under out_dir, return
/// the summary and the exit code.
inline RunReport run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    RunReport rep;
    try {
        fs::path dir(cfg.out_dir);
        fs::create_directories(dir);
        switch (cfg.command) {
            case Command::Asymptotic: rep = detail::run_asymptotic(cfg, dir); break;
            case Command::Forward: rep = detail::run_forward(cfg, dir); break;
            case Command::Backward: rep = detail::run_backward(cfg, dir); break;
            case Command::SignCheck: rep = detail::run_signcheck(cfg, dir); break;
            case Command::Diagnose: rep = detail::run_diagnose(cfg, dir); break;
            case Command::Sweep: rep = detail::run_sweep(cfg, dir); break;
        }
        detail::write_text(dir / "effective_config.txt", emit_config(cfg));
        detail::write_text(dir / "summary.json", rep.summary.dump(2) + "\n");
    } catch (const std::runtime_error& e) {
        rep.exit_code = kExitIoError;
        rep.summary_line = std::string("error: ") + e.what();
    }
    return rep;
}

}  // namespace bw
