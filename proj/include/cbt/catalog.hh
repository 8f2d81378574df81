// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "fields.hh"
#include "geometry.hh"

namespace cbt
{
/*!
 * Built-in coefficient catalog, selected by a "type" key.
 *
 * Fields (x, omega, E):
 *   constant     {value}
 *   polynomial   {x, y, z, energy: coefficient lists c0 + c1 t + ...; scale}
 *   radial_bump  {amplitude, radius, center, energy?, direction?}
 *   plateau      {amplitude, inner, outer, center, energy?}
 * Kernels: none, isotropic, linear_anisotropic {strength, anisotropy, profile}
 * Stopping: constant {value}, linear {value, slope}
 */
PhaseFn make_field(nlohmann::json const& spec);
KernelFn make_kernel(nlohmann::json const& spec);
StoppingFn make_stopping(nlohmann::json const& spec);
ConvexDomain make_domain(nlohmann::json const& spec);

//! Coefficients from the "coefficients" block (sigma, scatter, stopping, kappa, shift).
CoefficientSet make_coefficients(nlohmann::json const& spec);

//! exp(1 - 1 / (1 - s^2)) for |s| < 1, else 0.
double smooth_bump(double s);

//! 1 for s <= inner, 0 for s >= outer, smooth in between.
double smooth_plateau(double s, double inner, double outer);

}  // namespace cbt
