// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "attenuation.hh"
#include "fields.hh"
#include "grid.hh"
#include "scattering.hh"

namespace cbt
{
/*!
 * Marching state in the flipped energy E' = Em - E for the weighted
 * unknown phi = exp(C E') psi(Em - E').
 */
struct MarchState
{
    double e_current = 0;
    double step = 0;
    int index = 0;
    //! phi on G x S at e_current (single energy slot).
    DiscreteField phi;
};

struct CsdaOptions
{
    RayQuadrature quad;
    //! Target energy step; zero means (Em - E0) / 64. Steps are aligned to grid energies.
    double energy_step = 0;
    double tol = 1e-10;
    int max_iter = 200;
    int m = 0;
    int interpolation_order = 4;
    //! Require C above the dissipativity threshold.
    bool check_shift = true;
    std::function<void(MarchState const&)> on_step;
};

//! |grad a| / (2 kappa^2) + c(m) |Sigma / a|_{W^{inf,m}} + scatter_norm_bound / kappa.
double csda_shift_threshold(CoefficientSet const& coeffs, int m, GridSpec const& grid);

/*!
 * Flip and weight: slot k of the result holds exp(C E') psi(Em - E') with
 * E' = Em - E_{N-1-k}. Traces are transformed alike.
 */
DiscreteField energy_transform(DiscreteField const& psi, double c);

//! Inverse of energy_transform.
DiscreteField inverse_energy_transform(DiscreteField const& phi, double c);

/*!
 * Backward-Euler march of the transformed equation from phi(0) = 0.
 *
 * Each step solves
 *   omega . grad phi + (Sigma^ + b / dE - b C) phi - K^ phi
 *     = exp(C E') f^ + (b / dE) phi_prev,   b = -a^,
 * with coefficients frozen at the new energy, by source iteration.
 * The result is laid out like energy_transform.
 */
DiscreteField march_energy(PhaseFn const& f,
                           CoefficientSet const& coeffs,
                           GridPtr const& grid,
                           CsdaOptions const& options = {});

//! psi on G x S x I from march_energy and the inverse transform.
DiscreteField solve_csda(PhaseFn const& f,
                         CoefficientSet const& coeffs,
                         GridPtr const& grid,
                         CsdaOptions const& options = {});

/*!
 * int_0^{min(Em - E, t)} exp(-Sigma s) f(x - s omega, omega, E + s) ds for
 * a = -1, constant Sigma and no scattering.
 */
double explicit_csda(PhaseFn const& f,
                     double sigma,
                     ConvexDomain const& domain,
                     EnergyInterval const& interval,
                     PhasePoint const& p,
                     RayQuadrature const& quad = {});

struct CompatibilityReport
{
    int order = 0;
    double residual = 0;
    bool pass = true;
};

/*!
 * Residual of the order-0, 1 or 2 compatibility identity at E = Em over the
 * inflow boundary samples of the grid. Energy derivatives use one-sided
 * differences with the grid energy spacing; F = f / a.
 */
CompatibilityReport compatibility_check(PhaseFn const& g,
                                        PhaseFn const& F,
                                        int order,
                                        CoefficientSet const& coeffs,
                                        GridSpec const& grid,
                                        double tol = 1e-8);

}  // namespace cbt
