// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scattering.hh"

namespace cbt
{
inline constexpr int report_schema_version = 1;

//! One checked property: measured value against a tolerance.
struct Property
{
    std::string name;
    bool pass = false;
    double value = 0;
    double tolerance = 0;
};

struct RunReport
{
    std::string kind;
    nlohmann::json scenario = nlohmann::json::object();
    std::uint64_t seed = 0;
    nlohmann::json grid = nlohmann::json::object();
    nlohmann::json norms = nlohmann::json::object();
    nlohmann::json residuals = nlohmann::json::object();
    nlohmann::json iterations = nlohmann::json::array();
    std::vector<Property> properties;
    //! Wall-clock seconds per stage; excluded from the deterministic part.
    std::vector<std::pair<std::string, double>> timings;
    std::string error;

    void add(std::string name, bool pass, double value, double tolerance);
    bool passed() const;

    nlohmann::json to_json(bool with_timings = true) const;
    std::string to_text() const;
};

nlohmann::json to_json(IterationReport const& r);
nlohmann::json grid_metadata(GridSpec const& grid);

}  // namespace cbt
