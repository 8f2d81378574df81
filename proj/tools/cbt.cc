// SPDX-License-Identifier: Apache-2.0
// Scenario runner and verification driver.
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbt/error.hh"
#include "cbt/parallel.hh"
#include "cbt/scenario.hh"

int main(int argc, char** argv)
{
    CLI::App app{"Characteristic transport solver and verification harness"};
    app.require_subcommand(1);

    std::string out_dir;
    std::uint64_t seed = 20240607;
    int threads = 0;
    app.add_option("--out", out_dir, "Output directory for report.json, report.txt and slice.csv")
        ->envname("CBT_OUT");
    app.add_option("--seed", seed, "Seed for random property sweeps")->envname("CBT_SEED");
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")
        ->envname("CBT_THREADS")
        ->check(CLI::NonNegativeNumber);

    auto* run = app.add_subcommand("run", "Run a scenario described by a JSON file");
    std::string config_path;
    run->add_option("config", config_path, "Scenario configuration")->required()->check(CLI::ExistingFile);

    auto* verify = app.add_subcommand("verify", "Run a module verification suite");
    std::string suite;
    verify->add_option("suite", suite, "geometry, attenuation, scattering, csda, norms or all")->required();

    CLI11_PARSE(app, argc, argv);
    cbt::set_thread_count(threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

    try
    {
        cbt::RunReport report;
        if (*run)
        {
            nlohmann::json config;
            try
            {
                std::ifstream in(config_path);
                config = nlohmann::json::parse(in);
            }
            catch (nlohmann::json::exception const& e)
            {
                throw cbt::Error(cbt::ErrorCode::ConfigError, "cli", std::string("parse: ") + e.what());
            }
            if (!app.get_option("--seed")->count() && std::getenv("CBT_SEED") == nullptr
                && config.contains("seed"))
                seed = config["seed"].get<std::uint64_t>();
            report = cbt::run_scenario(config, seed, out_dir);
        }
        else
        {
            report = cbt::run_verification_suite(suite, seed);
            if (!out_dir.empty())
                cbt::write_report(report, out_dir);
        }
        std::cout << report.to_text();
        return report.passed() ? 0 : 1;
    }
    catch (cbt::Error const& e)
    {
        std::cerr << "error: " << cbt::to_string(e.code()) << " [" << e.module() << "]: " << e.what() << '\n';
        return e.code() == cbt::ErrorCode::ConfigError ? 2 : 1;
    }
}
