// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "cbt/error.hh"
#include "cbt/scenario.hh"

using namespace cbt;
using nlohmann::json;

namespace
{
ErrorCode code_of(auto&& fn)
{
    try
    {
        fn();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

json small_grid()
{
    return {{"nodes_per_axis", 9}, {"n_theta", 2}, {"n_phi", 4}, {"n_energy", 2}, {"energy", {0.0, 1.0}}};
}

Property const* find(RunReport const& r, std::string const& name)
{
    for (auto const& p : r.properties)
    {
        if (p.name == name)
            return &p;
    }
    return nullptr;
}
}  // namespace

TEST_CASE("attenuation scenario")
{
    json const config{{"problem", "attenuation"},
                      {"grid", small_grid()},
                      {"coefficients", {{"sigma", {{"type", "constant"}, {"value", 0.5}}}}},
                      {"source", {{"type", "constant"}, {"value", 2.0}}}};
    auto const r = run_scenario(config, 7);
    CHECK(r.error.empty());
    CHECK(r.passed());
    auto const* p = find(r, "closed-form agreement");
    REQUIRE(p);
    CHECK(p->value < 1e-8);
    CHECK(r.kind == "attenuation");
    CHECK(r.seed == 7);
    CHECK(r.grid["nodes_per_axis"] == 9);
}

TEST_CASE("scenario reports are deterministic and written to disk")
{
    json const config{{"problem", "scattering"},
                      {"grid", small_grid()},
                      {"coefficients", {{"sigma", {{"type", "constant"}, {"value", 0.2}}},
                                        {"scatter", {{"type", "isotropic"}, {"strength", 0.3}}}}},
                      {"source", {{"type", "radial_bump"}, {"radius", 0.6}}}};
    auto const a = run_scenario(config, 3);
    auto const b = run_scenario(config, 3);
    CHECK(a.passed());
    CHECK(a.to_json(false).dump() == b.to_json(false).dump());
    CHECK(a.to_json(false)["schema_version"] == report_schema_version);

    auto const dir = std::filesystem::temp_directory_path() / "cbt_scenario_test";
    std::filesystem::remove_all(dir);
    run_scenario(config, 3, dir);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "report.txt"));
    std::ifstream csv(dir / "slice.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "x,y,z,omega_index,E,value");
    std::filesystem::remove_all(dir);
}

TEST_CASE("solver failures are reported, not thrown")
{
    json const config{{"problem", "scattering"},
                      {"grid", small_grid()},
                      {"coefficients", {{"scatter", {{"type", "isotropic"}, {"strength", 1.0}}}, {"shift", 0.1}}}};
    auto const r = run_scenario(config, 1);
    CHECK_FALSE(r.passed());
    CHECK(r.error.find("ShiftTooSmall") != std::string::npos);
    CHECK(r.error.find("scattering") != std::string::npos);
}

TEST_CASE("csda halving sweep")
{
    json const config{{"problem", "csda"},
                      {"grid", {{"nodes_per_axis", 9}, {"n_theta", 2}, {"n_phi", 4}, {"n_energy", 5}, {"energy", {0.0, 1.0}}}},
                      {"coefficients", {{"sigma", {{"type", "constant"}, {"value", 0.5}}},
                                        {"stopping", {{"type", "constant"}, {"value", -1.0}}}}},
                      {"source", {{"type", "radial_bump"}, {"radius", 0.7}, {"energy", {1.0, -1.0}}}},
                      {"csda", {{"energy_step", 0.125}, {"halving_sweep", true}}}};
    auto const r = run_scenario(config, 1);
    CHECK(r.error.empty());
    for (auto const& p : r.properties)
    {
        INFO(p.name << " = " << p.value);
        CHECK(p.pass);
    }
    CHECK(r.residuals["error_rows"].size() == 2);
}

TEST_CASE("configuration errors")
{
    CHECK(code_of([] { run_scenario({{"problem", "diffusion"}}, 0); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_scenario({{"grid", small_grid()}}, 0); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_scenario({{"problem", "attenuation"}, {"gird", small_grid()}}, 0); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_scenario({{"problem", "csda"}, {"grid", small_grid()}}, 0); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_scenario({{"problem", "scattering_with_inflow"}, {"grid", small_grid()}}, 0); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_scenario({{"problem", "attenuation"}, {"grid", {{"nodes_per_axis", 3}}}}, 0); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_verification_suite("nonsense", 0); }) == ErrorCode::ConfigError);
    CHECK(verification_suites().size() == 5);
}
