#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "blowave/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"blowave: numerical laboratory for the semilinear wave equation "
                 "-Box u = (dt u)^2"};
    std::string command, config_path, out_dir;
    unsigned threads = 0;
    app.add_option("command", command,
                   "one of: asymptotic, forward, backward, signcheck, diagnose, sweep")
        ->required();
    app.add_option("--config", config_path, "path to the run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_option("--threads", threads, "worker pool size for sweeps");
    CLI11_PARSE(app, argc, argv);

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot read config file: " << config_path << "\n";
        return bw::kExitIoError;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    auto parsed = bw::parse_config(buf.str());
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors)
            std::cerr << config_path << ":" << e.line << ": " << e.message << "\n";
        return bw::kExitConfigError;
    }
    bw::RunConfig cfg = *parsed.config;

    auto cli_command = bw::detail::parse_command(command);
    if (!cli_command) {
        std::cerr << "unknown command '" << command << "'\n";
        return bw::kExitConfigError;
    }
    cfg.command = *cli_command;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;

    bw::RunReport rep = bw::run(cfg);
    std::cout << rep.summary_line << "\n";
    return rep.exit_code;
}
