// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "fields.hh"
#include "geometry.hh"
#include "grid.hh"

namespace cbt
{
/*!
 * Panel Gauss-Legendre rule along a backward characteristic.
 *
 * Panels have length at most 1 / panels_per_unit_length and, where the
 * attenuation is strong, at most max_panel_optical_depth / Sigma. With
 * fixed_panels > 0 every ray gets exactly that many equal panels. Rays stop
 * once the accumulated optical depth exceeds optical_cutoff.
 */
struct RayQuadrature
{
    int panels_per_unit_length = 16;
    int nodes_per_panel = 4;
    int fixed_panels = 0;
    double max_panel_optical_depth = 1.0;
    double optical_cutoff = 60.0;
};

//! psi(x, omega, E) for omega . grad psi + (Sigma + C) psi = f, psi = 0 on the inflow boundary.
double solve_attenuation(PhaseFn const& f,
                         CoefficientSet const& coeffs,
                         ConvexDomain const& domain,
                         PhasePoint const& p,
                         RayQuadrature const& quad = {});

/*!
 * Spatial gradient of the attenuation solution.
 *
 * Sums the two ray integrals and, unless the source vanishes on the inflow
 * boundary, the boundary term exp(-tau) f(y) dt/dx.
 */
Vec3 solve_attenuation_gradient(PhaseFn const& f,
                                PhaseGradFn const& grad_f,
                                CoefficientSet const& coeffs,
                                PhaseGradFn const& grad_sigma,
                                ConvexDomain const& domain,
                                PhasePoint const& p,
                                RayQuadrature const& quad,
                                bool inflow_vanishing);

//! Terms of a grid-wide characteristic solve at every node and trace point.
struct SweepTerms
{
    //! Total attenuation (Sigma + shift) at energy slot e.
    std::function<double(Vec3 const&, Vec3 const&, std::size_t)> sigma;
    std::optional<double> sigma_constant;
    //! Analytic source at energy slot e (may be empty).
    std::function<double(Vec3 const&, Vec3 const&, std::size_t)> source;
    //! Lattice data [node][energy][direction] interpolated along rays.
    std::vector<double> const* lattice_source = nullptr;
    //! Multiplier of the interpolated term (empty means 1).
    std::function<double(Vec3 const&, std::size_t)> lattice_weight;
    int interpolation_order = 4;
    bool with_nodes = true;
    bool with_trace = true;
};

DiscreteField
transport_sweep(GridPtr const& grid, RayQuadrature const& quad, SweepTerms const& terms);

//! solve_attenuation at every lattice node and boundary trace point.
DiscreteField solve_attenuation_field(PhaseFn const& f,
                                      CoefficientSet const& coeffs,
                                      GridPtr const& grid,
                                      RayQuadrature const& quad = {},
                                      bool with_trace = true);

//! Spatial derivatives of a field keyed by multi-index.
using DerivativeTable = std::map<MultiIndex, PhaseFn>;

/*!
 * Source for the equation satisfied by d^alpha psi:
 * d^alpha f - sum_{beta < alpha} binom(alpha, beta) d^{alpha-beta} Sigma d^beta psi.
 */
PhaseFn derivative_source(DerivativeTable const& f_derivs,
                          DerivativeTable const& sigma_derivs,
                          DerivativeTable const& psi_derivs,
                          MultiIndex const& alpha);

struct AccretivityResult
{
    double lhs = 0;
    double rhs_bound = 0;
    double boundary_term = 0;
    double norm_squared = 0;
    double c_prime = 0;
};

/*!
 * Discrete <(P + C) psi, psi>_{H^m} with P = omega . grad + Sigma, the lower
 * bound (C - C') |psi|^2 with C' = c(m) |Sigma|_{W^{inf,m}}, and the outflow
 * term 1/2 sum_alpha int (d^alpha psi)^2 omega . nu.
 */
AccretivityResult
accretivity_functional(DiscreteField const& psi, CoefficientSet const& coeffs, int m);

}  // namespace cbt
