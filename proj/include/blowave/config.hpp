#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "blowave/asymptotic.hpp"
#include "blowave/quadrature.hpp"

namespace bw {

enum class Command { Asymptotic, Forward, Backward, SignCheck, Diagnose, Sweep };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::Asymptotic: return "asymptotic";
        case Command::Forward: return "forward";
        case Command::Backward: return "backward";
        case Command::SignCheck: return "signcheck";
        case Command::Diagnose: return "diagnose";
        default: return "sweep";
    }
}

/// A named data generator with keyword arguments, e.g. bump(a=1,w=1,center=0).
struct GeneratorSpec {
    std::string name = "zero";
    std::map<std::string, double> args;

    bool operator==(const GeneratorSpec&) const = default;

    double arg(const std::string& key, double fallback) const {
        auto it = args.find(key);
        return it == args.end() ? fallback : it->second;
    }
};

struct RunConfig {
    Command command = Command::Asymptotic;

    // [data]
    GeneratorSpec A;   // asymptotic datum
    GeneratorSpec u0;  // Cauchy data
    GeneratorSpec u1;

    // [grid]
    double r_max = 20.0;
    double h = 0.05;
    double q_max = 8.0;

    // [solver]
    double t_max = 20.0;
    double cfl = 0.9;
    double blowup_threshold = 1e6;
    double epsilon = 0.1;
    double delta = 0.1;
    double T = 50.0;
    double margin = 5.0;
    double q_char = 0.0;   // characteristic offset for diagnose
    double s_max = 2.0;    // asymptotic tabulation range
    std::uint32_t n_s = 16;
    std::uint32_t n_q = 64;
    bool lagged = false;

    // [output]
    std::string out_dir = "out";
    bool write_field = false;
    std::uint32_t decimate = 8;
    std::uint64_t seed = 0;

    // [sweep]
    Command sweep_command = Command::Backward;
    std::string sweep_param;
    std::vector<double> sweep_values;
    std::uint32_t threads = 1;

    bool operator==(const RunConfig&) const = default;
};

struct ConfigError {
    int line = 0;
    std::string message;
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<ConfigError> errors;

    bool ok() const { return config.has_value(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double& out) {
    std::istringstream in(s);
    in >> out;
    return bool(in) && in.eof();
}

inline std::optional<Command> parse_command(const std::string& s) {
    for (Command c : {Command::Asymptotic, Command::Forward, Command::Backward,
                      Command::SignCheck, Command::Diagnose, Command::Sweep})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

inline bool parse_generator(const std::string& s, GeneratorSpec& g, std::string& err) {
    static const std::map<std::string, std::vector<std::string>> known = {
        {"zero", {}},
        {"bump", {"a", "w", "center"}},
        {"gaussian", {"a", "s"}},
        {"inverse_sqrt", {}},
        {"powerlaw", {"gamma", "q_min"}},
        {"constant", {"a"}},
    };
    std::string body = trim(s);
    std::string name = body;
    std::string argstr;
    const auto paren = body.find('(');
    if (paren != std::string::npos) {
        if (body.back() != ')') {
            err = "malformed generator call '" + s + "'";
            return false;
        }
        name = trim(body.substr(0, paren));
        argstr = body.substr(paren + 1, body.size() - paren - 2);
    }
    auto it = known.find(name);
    if (it == known.end()) {
        err = "unknown generator '" + name + "'";
        return false;
    }
    g.name = name;
    g.args.clear();
    std::istringstream in(argstr);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            err = "generator argument '" + tok + "' is not key=value";
            return false;
        }
        const std::string key = trim(tok.substr(0, eq));
        double val;
        if (!parse_double(trim(tok.substr(eq + 1)), val)) {
            err = "generator argument '" + key + "' is not numeric";
            return false;
        }
        bool allowed = false;
        for (const auto& k : it->second) allowed |= (k == key);
        if (!allowed) {
            err = "generator '" + name + "' has no argument '" + key + "'";
            return false;
        }
        g.args[key] = val;
    }
    return true;
}

}  // namespace detail

/// Parse the sectioned key=value config format. Collects every error with its
/// line number instead of stopping at the first.
inline ParseResult parse_config(const std::string& text) {
    ParseResult result;
    RunConfig cfg;
    bool have_command = false;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;

    auto fail = [&](const std::string& msg) { result.errors.push_back({lineno, msg}); };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail("malformed section header '" + line + "'");
                continue;
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "data" && section != "grid" && section != "solver" &&
                section != "output" && section != "sweep")
                fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail("expected key = value, got '" + line + "'");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));

        auto num = [&](double& target, double lo, double hi, const std::string& bound) {
            double v;
            if (!detail::parse_double(value, v)) {
                fail("value of '" + key + "' is not numeric: '" + value + "'");
                return;
            }
            if (v < lo || v > hi) {
                fail("'" + key + "' = " + value + " violates " + bound);
                return;
            }
            target = v;
        };
        auto uintval = [&](auto& target) {
            double v;
            if (!detail::parse_double(value, v) || v < 0 || v != std::floor(v))
                fail("value of '" + key + "' is not a nonnegative integer: '" + value + "'");
            else
                target = static_cast<std::decay_t<decltype(target)>>(v);
        };
        auto gen = [&](GeneratorSpec& target) {
            std::string err;
            if (!detail::parse_generator(value, target, err)) fail(err);
        };

        if (section.empty()) {
            if (key == "command") {
                have_command = true;
                auto c = detail::parse_command(value);
                if (!c)
                    fail("unknown command '" + value + "'");
                else
                    cfg.command = *c;
            } else {
                fail("unknown top-level key '" + key + "'");
            }
        } else if (section == "data") {
            if (key == "A") gen(cfg.A);
            else if (key == "u0") gen(cfg.u0);
            else if (key == "u1") gen(cfg.u1);
            else fail("unknown key '" + key + "' in [data]");
        } else if (section == "grid") {
            if (key == "r_max") num(cfg.r_max, 1e-12, 1e12, "r_max > 0");
            else if (key == "h") num(cfg.h, 1e-12, 1e12, "h > 0");
            else if (key == "q_max") num(cfg.q_max, 0.0, 1e12, "q_max >= 0");
            else fail("unknown key '" + key + "' in [grid]");
        } else if (section == "solver") {
            if (key == "t_max") num(cfg.t_max, 0.0, 1e12, "t_max >= 0");
            else if (key == "cfl") num(cfg.cfl, 1e-6, 1.0, "the CFL bound dt/h <= 1");
            else if (key == "blowup_threshold") num(cfg.blowup_threshold, 1.0, 1e300, "threshold >= 1");
            else if (key == "epsilon") num(cfg.epsilon, 1e-6, 0.5, "epsilon in (0, 0.5]");
            else if (key == "delta") num(cfg.delta, 1e-6, 1.0, "delta in (0, 1)");
            else if (key == "T") num(cfg.T, 1.0, 1e12, "T > 1");
            else if (key == "margin") num(cfg.margin, 0.0, 1e12, "margin >= 0");
            else if (key == "q") num(cfg.q_char, -1e12, 1e12, "q finite");
            else if (key == "s_max") num(cfg.s_max, 0.0, 1e12, "s_max >= 0");
            else if (key == "n_s") uintval(cfg.n_s);
            else if (key == "n_q") uintval(cfg.n_q);
            else if (key == "scheme") {
                if (value == "lagged") cfg.lagged = true;
                else if (value == "corrected") cfg.lagged = false;
                else fail("scheme must be 'corrected' or 'lagged'");
            } else fail("unknown key '" + key + "' in [solver]");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = value;
            else if (key == "field") {
                if (value == "0" || value == "false") cfg.write_field = false;
                else if (value == "1" || value == "true") cfg.write_field = true;
                else fail("'field' must be 0/1");
            } else if (key == "decimate") uintval(cfg.decimate);
            else if (key == "seed") uintval(cfg.seed);
            else fail("unknown key '" + key + "' in [output]");
        } else if (section == "sweep") {
            if (key == "param") cfg.sweep_param = value;
            else if (key == "command") {
                auto c = detail::parse_command(value);
                if (!c || *c == Command::Sweep) fail("invalid sweep command '" + value + "'");
                else cfg.sweep_command = *c;
            } else if (key == "values") {
                cfg.sweep_values.clear();
                std::istringstream vs(value);
                std::string tok;
                while (std::getline(vs, tok, ',')) {
                    double v;
                    if (!detail::parse_double(detail::trim(tok), v)) {
                        fail("sweep value '" + tok + "' is not numeric");
                        break;
                    }
                    cfg.sweep_values.push_back(v);
                }
            } else if (key == "threads") uintval(cfg.threads);
            else fail("unknown key '" + key + "' in [sweep]");
        }
    }

    if (!have_command) fail("missing command");
    if (have_command && cfg.command == Command::Sweep) {
        if (cfg.sweep_param.empty()) fail("sweep requires [sweep] param");
        if (cfg.sweep_values.empty()) fail("sweep requires [sweep] values");
    }
    if (result.errors.empty()) result.config = cfg;
    return result;
}

/// Emit the effective config (defaults resolved); re-parsing yields an equal config.
inline std::string emit_config(const RunConfig& c) {
    std::ostringstream out;
    out.precision(17);
    auto gen = [](const GeneratorSpec& g) {
        std::ostringstream s;
        s.precision(17);
        s << g.name;
        if (!g.args.empty()) {
            s << "(";
            bool first = true;
            for (const auto& [k, v] : g.args) {
                if (!first) s << ",";
                s << k << "=" << v;
                first = false;
            }
            s << ")";
        }
        return s.str();
    };
    out << "command = " << to_string(c.command) << "\n\n";
    out << "[data]\n";
    out << "A = " << gen(c.A) << "\n";
    out << "u0 = " << gen(c.u0) << "\n";
    out << "u1 = " << gen(c.u1) << "\n\n";
    out << "[grid]\n";
    out << "r_max = " << c.r_max << "\n";
    out << "h = " << c.h << "\n";
    out << "q_max = " << c.q_max << "\n\n";
    out << "[solver]\n";
    out << "t_max = " << c.t_max << "\n";
    out << "cfl = " << c.cfl << "\n";
    out << "blowup_threshold = " << c.blowup_threshold << "\n";
    out << "epsilon = " << c.epsilon << "\n";
    out << "delta = " << c.delta << "\n";
    out << "T = " << c.T << "\n";
    out << "margin = " << c.margin << "\n";
    out << "q = " << c.q_char << "\n";
    out << "s_max = " << c.s_max << "\n";
    out << "n_s = " << c.n_s << "\n";
    out << "n_q = " << c.n_q << "\n";
    out << "scheme = " << (c.lagged ? "lagged" : "corrected") << "\n\n";
    out << "[output]\n";
    out << "dir = " << c.out_dir << "\n";
    out << "field = " << (c.write_field ? 1 : 0) << "\n";
    out << "decimate = " << c.decimate << "\n";
    out << "seed = " << c.seed << "\n\n";
    out << "[sweep]\n";
    if (!c.sweep_param.empty()) out << "param = " << c.sweep_param << "\n";
    out << "command = " << to_string(c.sweep_command) << "\n";
    if (!c.sweep_values.empty()) {
        out << "values = ";
        for (std::size_t i = 0; i < c.sweep_values.size(); ++i)
            out << (i ? "," : "") << c.sweep_values[i];
        out << "\n";
    }
    out << "threads = " << c.threads << "\n";
    return out.str();
}

/// Instantiate the 1D generator for asymptotic data A(q).
inline AsymptoticData make_asymptotic_data(const GeneratorSpec& g) {
    if (g.name == "zero") return bump_data(0.0, 1.0);
    if (g.name == "bump")
        return bump_data(g.arg("a", 1.0), g.arg("w", 1.0), g.arg("center", 0.0));
    if (g.name == "powerlaw") return powerlaw_data(g.arg("gamma", 2.0), g.arg("q_min", -300.0));
    throw std::invalid_argument("generator '" + g.name + "' is not usable as asymptotic data");
}

/// Instantiate the generator as a radial scalar field on R^3.
inline ScalarField3 make_scalar_field(const GeneratorSpec& g) {
    if (g.name == "zero") return [](const Vec3&) { return 0.0; };
    if (g.name == "constant") {
        const double a = g.arg("a", 1.0);
        return [a](const Vec3&) { return a; };
    }
    if (g.name == "bump") {
        const double a = g.arg("a", 1.0), w = g.arg("w", 1.0), c = g.arg("center", 0.0);
        return [a, w, c](const Vec3& x) {
            const double xi = (x.norm() - c) / w;
            if (std::abs(xi) >= 1.0) return 0.0;
            return a * std::exp(1.0 - 1.0 / (1.0 - xi * xi));
        };
    }
    if (g.name == "gaussian") {
        const double a = g.arg("a", 1.0), s = g.arg("s", 1.0);
        return [a, s](const Vec3& x) {
            const double r = x.norm() / s;
            return a * std::exp(-r * r);
        };
    }
    if (g.name == "inverse_sqrt")
        return [](const Vec3& x) { return 1.0 / std::sqrt(1.0 + x.norm() * x.norm()); };
    throw std::invalid_argument("generator '" + g.name + "' is not usable as a scalar field");
}

/// Support radius of a compactly supported generator (inf otherwise).
inline double generator_support(const GeneratorSpec& g) {
    if (g.name == "zero") return 0.0;
    if (g.name == "bump") return std::abs(g.arg("center", 0.0)) + g.arg("w", 1.0);
    return inf;
}

}  // namespace bw
