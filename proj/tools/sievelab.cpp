#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "sievelab/scenario.hpp"

namespace {

unsigned resolve_workers(int cli_workers) {
    if (cli_workers > 0) return static_cast<unsigned>(cli_workers);
    if (const char* env = std::getenv("SIEVELAB_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for occupancy under random multiplicative sieves"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int cli_workers = 0;
    long long seed_override = -1;

    auto* run = app.add_subcommand("run", "run one scenario from a config file");
    run->add_option("--config", config_path, "JSON config path")->required();
    run->add_option("--seed", seed_override, "override master_seed from the config");
    run->add_option("--workers", cli_workers, "worker threads (default: SIEVELAB_WORKERS or hardware)");
    run->add_option("--out", out_dir, "output directory");

    auto* list = app.add_subcommand("scenarios", "list known scenario names");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& name : sievelab::scenario_names()) std::cout << name << "\n";
        return 0;
    }

    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return 1;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        sievelab::ScenarioConfig cfg = sievelab::parse_config(buf.str());
        if (seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed_override);
        const unsigned workers = resolve_workers(cli_workers);

        const auto report = sievelab::run_scenario(cfg, workers);
        sievelab::write_report(report, out_dir);

        for (const auto& t : report.tests) {
            std::cout << (t.pass ? "PASS " : "FAIL ") << t.test
                      << "  statistic=" << t.statistic << " p=" << t.p_value << "\n";
        }
        std::cout << (report.all_passed() ? "ALL CHECKS PASSED" : "STATISTICAL CHECK FAILED")
                  << " (" << report.wall_seconds << "s, reports in " << out_dir << ")\n";
        return report.all_passed() ? 0 : 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
