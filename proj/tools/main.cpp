#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "sdelab/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sdelab: stochastic differential equation experiment runner"};

    std::string config_path, preset, out_prefix;
    std::uint64_t seed = 0;
    std::size_t paths = 0, workers = 0;

    app.add_option("--config", config_path, "JSON config (or manifest) file");
    app.add_option("--preset", preset, "experiment preset: fig1, fig2, fig3, fig4");
    app.add_option("--paths", paths, "Monte-Carlo path count");
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--workers", workers, "worker thread count");
    app.add_option("--out", out_prefix, "output file prefix");

    CLI11_PARSE(app, argc, argv);

    sdelab::RunConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) {
                std::cerr << "error: cannot read config file: " << config_path << '\n';
                return 1;
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            cfg = sdelab::parse_config_json(buf.str());
        }
        if (!preset.empty()) sdelab::apply_preset(cfg, preset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    if (config_path.empty() && preset.empty()) {
        std::cerr << "error: provide --config or --preset\n";
        return 1;
    }

    if (app.count("--paths")) cfg.paths = paths;
    if (app.count("--seed")) cfg.master_seed = seed;
    if (app.count("--workers")) cfg.workers = workers;
    if (app.count("--out")) cfg.out_prefix = out_prefix;

    return sdelab::run_config(cfg);
}
