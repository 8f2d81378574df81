// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "attenuation.hh"
#include "grid.hh"
#include "report.hh"

namespace cbt
{
/*!
 * Run one scenario described by a JSON document.
 *
 * Configuration problems raise ConfigError; solver failures are recorded
 * in the report (with their module) and make it fail. When out_dir is not
 * empty the report (JSON and text) and a mid-plane CSV slice are written.
 */
RunReport run_scenario(nlohmann::json const& config,
                       std::uint64_t seed,
                       std::filesystem::path const& out_dir = {});

//! Lattice and quadrature options from the "grid" block; raises ConfigError.
GridOptions grid_options(nlohmann::json const& spec);

//! Ray rule from the "quadrature" block; raises ConfigError.
RayQuadrature ray_quadrature(nlohmann::json const& spec);

//! Suites: geometry, attenuation, scattering, csda, norms, all.
std::vector<std::string> const& verification_suites();

//! Module property checks at pinned grids; raises ConfigError for unknown suites.
RunReport run_verification_suite(std::string const& suite, std::uint64_t seed);

void write_report(RunReport const& report, std::filesystem::path const& out_dir);

//! Nodes within h/2 of the central z plane: x,y,z,omega_index,E,value.
void write_slice_csv(DiscreteField const& field, std::filesystem::path const& file);

}  // namespace cbt
