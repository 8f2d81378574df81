// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cbt/attenuation.hh"
#include "cbt/scattering.hh"

namespace cbt::detail
{
//! Kernel sigma^2(x, omega', omega) at energy slot e.
using SlotKernel = std::function<double(Vec3 const&, Vec3 const&, Vec3 const&, std::size_t)>;

//! K_r on lattice data; the weighted kernel matrix is cached when small.
class LatticeScatter
{
  public:
    LatticeScatter(GridSpec const& grid, SlotKernel kernel);

    //! out = K psi at every node, energy and direction.
    void apply(std::span<double const> psi, std::span<double> out) const;

  private:
    GridSpec const& grid_;
    SlotKernel kernel_;
    std::vector<double> cache_;
};

struct FixedPointProblem
{
    GridPtr grid;
    RayQuadrature quad;
    //! Total attenuation including any shift.
    std::function<double(Vec3 const&, Vec3 const&, std::size_t)> sigma;
    std::optional<double> sigma_constant;
    std::function<double(Vec3 const&, Vec3 const&, std::size_t)> source;
    //! Fixed lattice source added to K psi before interpolation.
    std::vector<double> const* lattice_source = nullptr;
    SlotKernel kernel;
    double tol = 1e-10;
    int max_iter = 200;
    int interpolation_order = 4;
    char const* module = "scattering_solver";
};

struct FixedPointResult
{
    DiscreteField psi;
    IterationReport report;
};

FixedPointResult source_iteration(FixedPointProblem const& problem);

}  // namespace cbt::detail
