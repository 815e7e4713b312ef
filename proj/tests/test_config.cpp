#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "blowave/run.hpp"

using namespace bw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_error_containing(const ParseResult& r, const std::string& needle) {
    for (const auto& e : r.errors)
        if (e.message.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("empty config") {
    auto r = parse_config("");
    CHECK_FALSE(r.ok());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].message == "missing command");
}

TEST_CASE("minimal config fills defaults") {
    auto r = parse_config("command = asymptotic\n[data]\nA = bump(a=1,w=1)\n");
    REQUIRE(r.ok());
    const RunConfig& c = *r.config;
    CHECK(c.command == Command::Asymptotic);
    CHECK(c.A.name == "bump");
    CHECK(c.A.arg("a", 0) == 1.0);
    CHECK(c.h == 0.05);
    CHECK(c.cfl == 0.9);
    CHECK(c.epsilon == 0.1);
    CHECK(c.out_dir == "out");
    CHECK_FALSE(c.lagged);
}

TEST_CASE("range violations name the bound") {
    auto r = parse_config("command = forward\n[solver]\ncfl = 1.5\n");
    CHECK_FALSE(r.ok());
    CHECK(has_error_containing(r, "CFL bound dt/h <= 1"));
}

TEST_CASE("all errors are collected with line numbers") {
    const std::string text =
        "command = warp\n"        // line 1: unknown command
        "[data]\n"
        "A = vortex(a=1)\n"       // line 3: unknown generator
        "[grid]\n"
        "h = -0.1\n"              // line 5: range
        "spacing = 3\n"           // line 6: unknown key
        "[wrong]\n";              // line 7: unknown section
    auto r = parse_config(text);
    CHECK_FALSE(r.ok());
    CHECK(r.errors.size() == 5);
    CHECK(r.errors[0].line == 1);
    CHECK(has_error_containing(r, "unknown command 'warp'"));
    CHECK(has_error_containing(r, "unknown generator 'vortex'"));
    CHECK(has_error_containing(r, "unknown key 'spacing'"));
    CHECK(has_error_containing(r, "unknown section [wrong]"));
    bool line5 = false;
    for (const auto& e : r.errors) line5 |= (e.line == 5);
    CHECK(line5);
}

TEST_CASE("generator argument validation") {
    auto r = parse_config("command = forward\n[data]\nu1 = bump(a=1,q=2)\n");
    CHECK_FALSE(r.ok());
    CHECK(has_error_containing(r, "no argument 'q'"));

    auto r2 = parse_config("command = forward\n[data]\nu1 = bump(a=oops)\n");
    CHECK_FALSE(r2.ok());
    CHECK(has_error_containing(r2, "not numeric"));
}

TEST_CASE("comments and sweep section") {
    const std::string text =
        "command = sweep  # the run mode\n"
        "[sweep]\n"
        "command = forward\n"
        "param = solver.t_max\n"
        "values = 1, 2, 4\n"
        "threads = 2\n";
    auto r = parse_config(text);
    REQUIRE(r.ok());
    CHECK(r.config->sweep_command == Command::Forward);
    CHECK(r.config->sweep_values == std::vector<double>{1.0, 2.0, 4.0});
    CHECK(r.config->threads == 2);

    auto bad = parse_config("command = sweep\n");
    CHECK_FALSE(bad.ok());
    CHECK(has_error_containing(bad, "sweep requires"));
}

TEST_CASE("config round trip") {
    auto r = parse_config(
        "command = backward\n"
        "[data]\nA = bump(a=2,w=0.5,center=0.25)\nu1 = gaussian(a=0.1,s=2)\n"
        "[grid]\nr_max = 42\nh = 0.025\n"
        "[solver]\nT = 12.5\nepsilon = 0.05\nscheme = lagged\n"
        "[output]\ndir = somewhere\nfield = 1\nseed = 7\n");
    REQUIRE(r.ok());
    auto emitted = emit_config(*r.config);
    auto r2 = parse_config(emitted);
    REQUIRE(r2.ok());
    CHECK(*r.config == *r2.config);
}

TEST_CASE("generator instantiation") {
    GeneratorSpec g;
    g.name = "bump";
    g.args = {{"a", 2.0}, {"w", 1.5}};
    auto d = make_asymptotic_data(g);
    CHECK(d.support_radius == 1.5);
    CHECK(d(0.0) == Catch::Approx(2.0));
    auto f = make_scalar_field(g);
    CHECK(f({0, 0, 0}) == Catch::Approx(2.0));
    CHECK(f({2.0, 0, 0}) == 0.0);
    CHECK(generator_support(g) == 1.5);

    GeneratorSpec inv;
    inv.name = "inverse_sqrt";
    CHECK(make_scalar_field(inv)({0, 0, 2}) == Catch::Approx(1.0 / std::sqrt(5.0)));
    CHECK(generator_support(inv) == inf);
    CHECK_THROWS_AS(make_asymptotic_data(inv), std::invalid_argument);

    GeneratorSpec pl;
    pl.name = "powerlaw";
    pl.args = {{"gamma", 2.0}};
    CHECK(make_asymptotic_data(pl).decay_gamma == 2.0);
    CHECK_THROWS_AS(make_scalar_field(pl), std::invalid_argument);
}

TEST_CASE("asymptotic run end to end") {
    RunConfig cfg;
    cfg.command = Command::Asymptotic;
    cfg.A = {"bump", {{"a", 1.0}, {"w", 1.0}}};
    cfg.out_dir = "cfgtest_asym";
    auto rep = run(cfg);
    CHECK(rep.exit_code == kExitOk);
    CHECK(rep.summary_line == "asymptotic: lifespan=inf");
    CHECK(fs::exists("cfgtest_asym/profile.csv"));
    CHECK(fs::exists("cfgtest_asym/summary.json"));
    CHECK(fs::exists("cfgtest_asym/effective_config.txt"));

    // mixed-sign datum reports the finite lifespan
    cfg.A = {"bump", {{"a", -0.5}, {"w", 1.0}}};
    cfg.out_dir = "cfgtest_asym2";
    auto rep2 = run(cfg);
    CHECK(rep2.exit_code == kExitOk);
    CHECK(rep2.summary["lifespan"].get<double>() == Catch::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("forward blow-up run exits with the blow-up code") {
    RunConfig cfg;
    cfg.command = Command::Forward;
    cfg.u0 = {"zero", {}};
    cfg.u1 = {"bump", {{"a", 3.0}, {"w", 1.0}}};
    cfg.r_max = 10.0;
    cfg.h = 0.05;
    cfg.t_max = 10.0;
    cfg.out_dir = "cfgtest_fwd";
    auto rep = run(cfg);
    CHECK(rep.exit_code == kExitBlewUp);
    CHECK(rep.summary["status"] == "BlewUp");
    CHECK(rep.summary.contains("certificate"));
    CHECK(fs::exists("cfgtest_fwd/certificate.json"));
    CHECK(fs::exists("cfgtest_fwd/energy.csv"));
    CHECK(rep.summary_line.find("blow-up detected") != std::string::npos);
}

TEST_CASE("sweep orchestration") {
    RunConfig cfg;
    cfg.command = Command::Sweep;
    cfg.sweep_command = Command::Forward;
    cfg.sweep_param = "solver.t_max";
    cfg.sweep_values = {0.5, 1.0, 1.5};
    cfg.threads = 2;
    cfg.u0 = {"bump", {{"a", 0.01}, {"w", 1.0}}};
    cfg.u1 = {"zero", {}};
    cfg.r_max = 6.0;
    cfg.h = 0.1;
    cfg.out_dir = "cfgtest_sweep";
    auto rep = run(cfg);
    CHECK(rep.exit_code == kExitOk);
    CHECK(fs::exists("cfgtest_sweep/sweep.csv"));
    for (int i = 0; i < 3; ++i)
        CHECK(fs::exists("cfgtest_sweep/job_" + std::to_string(i) + "/summary.json"));
    const auto agg = slurp("cfgtest_sweep/sweep.csv");
    CHECK(agg.find("0.5,Completed,0") != std::string::npos);
    CHECK(rep.summary["jobs"].size() == 3);

    cfg.sweep_param = "nope.nope";
    auto bad = run(cfg);
    CHECK(bad.exit_code == kExitConfigError);
}

TEST_CASE("determinism of outputs") {
    RunConfig cfg;
    cfg.command = Command::Asymptotic;
    cfg.A = {"bump", {{"a", 1.0}, {"w", 1.0}}};
    cfg.out_dir = "cfgtest_det1";
    run(cfg);
    cfg.out_dir = "cfgtest_det2";
    run(cfg);
    CHECK(slurp("cfgtest_det1/profile.csv") == slurp("cfgtest_det2/profile.csv"));
    CHECK(slurp("cfgtest_det1/summary.json") == slurp("cfgtest_det2/summary.json"));
}

TEST_CASE("signcheck run writes a report") {
    RunConfig cfg;
    cfg.command = Command::SignCheck;
    cfg.u0 = {"zero", {}};
    cfg.u1 = {"bump", {{"a", 1.0}, {"w", 1.0}}};
    cfg.out_dir = "cfgtest_sign";
    auto rep = run(cfg);
    CHECK(rep.exit_code == kExitOk);
    CHECK(rep.summary_line == "signcheck: ForwardPositive");
    CHECK(fs::exists("cfgtest_sign/sign_report.json"));
    auto j = json::parse(slurp("cfgtest_sign/sign_report.json"));
    CHECK(j["condition"] == "ForwardPositive");
    CHECK(j["witness"]["margin"].get<double>() > 0.0);
}
