// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "grid.hh"
#include "vec3.hh"

namespace cbt
{
//! Scalar field on phase space: (x, omega, E) -> value.
using PhaseFn = std::function<double(Vec3 const&, Vec3 const&, double)>;
//! Spatial gradient of a phase-space field.
using PhaseGradFn = std::function<Vec3(Vec3 const&, Vec3 const&, double)>;
//! Scattering kernel sigma^2(x, omega', omega, E).
using KernelFn
    = std::function<double(Vec3 const&, Vec3 const&, Vec3 const&, double)>;
//! Stopping coefficient a(x, E).
using StoppingFn = std::function<double(Vec3 const&, double)>;

/*!
 * Attenuation Sigma, optional scattering kernel and stopping coefficient,
 * and the solver shift C.
 */
struct CoefficientSet
{
    PhaseFn sigma_t;
    //! Set when Sigma is a known constant (enables the exact optical depth).
    std::optional<double> sigma_constant;
    KernelFn scatter;
    StoppingFn stopping;
    //! Lower bound for -a.
    double kappa = 0;
    double shift = 0;

    static CoefficientSet constant(double sigma, double shift = 0);

    double sigma(Vec3 const& x, Vec3 const& omega, double e) const
    {
        return sigma_constant ? *sigma_constant : sigma_t(x, omega, e);
    }
    bool has_scatter() const { return static_cast<bool>(scatter); }
    bool has_stopping() const { return static_cast<bool>(stopping); }
    //! Sigma as a callable regardless of representation.
    PhaseFn sigma_fn() const;
};

//! values[node, E, omega] = field(x, omega, E), trace included.
DiscreteField sample_field(PhaseFn const& field, GridPtr const& grid);

/*!
 * Estimate of the W^{inf,(m,0,0)} norm: max over |alpha| <= m of the grid
 * sup of finite-difference derivatives, restricted to nodes farther than
 * m h from the boundary.
 */
double sup_norm_estimate(PhaseFn const& field, int m, GridSpec const& grid);

//! Same estimate for data already sampled on the lattice.
double sup_norm_estimate(std::span<double const> values, int m, GridSpec const& grid);

struct KernelSupportReport
{
    bool pass = true;
    double worst_value = 0;
    Vec3 worst_position;
    MultiIndex worst_alpha{0, 0, 0};
};

/*!
 * Check that d^alpha_x sigma^2 vanishes (below 1e-10) for |alpha| <= m - 1
 * at every node closer than eta to the boundary.
 */
KernelSupportReport kernel_support_check(KernelFn const& scatter,
                                         int m,
                                         double eta,
                                         GridSpec const& grid);

/*!
 * Product-rule constant c(m) with
 * |Sigma psi|_{H^m} <= c(m) |Sigma|_{W^{inf,m}} |psi|_{H^m}.
 *
 * c(m)^2 = max_alpha sum_{beta<=alpha} binom(alpha,beta)^2
 *          * max_beta #{alpha >= beta : |alpha| <= m}.
 */
double leibniz_constant(int m);

//! Per-row factor max_alpha (sum_{beta<=alpha} binom(alpha,beta)^2)^{1/2}.
double leibniz_row_constant(int m);

//! Number of beta <= alpha.
int lower_set_size(MultiIndex const& alpha);

}  // namespace cbt
