// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fields.hh"
#include "grid.hh"

namespace cbt
{
//! Differentiation orders in space, direction and energy.
struct NormOrder
{
    int m1 = 0;
    int m2 = 0;
    int m3 = 0;
};

//! Lattice L^2 inner product with measure h^3 x sphere weights x energy weights.
double lattice_inner(GridSpec const& grid,
                     std::span<double const> a,
                     std::span<double const> b);

//! (sum_{|alpha| <= m1} |d^alpha psi|^2_{L^2})^{1/2}.
double h_norm(DiscreteField const& psi, NormOrder order);

enum class TraceSide
{
    Inflow,
    Outflow,
    Full,
};

//! Boundary samples with omega . nu, surface x angle x energy weights, and tau.
struct TraceField
{
    TraceSide side = TraceSide::Full;
    std::vector<double> values;
    std::vector<double> dot;
    std::vector<double> weights;
    std::vector<double> tau;

    std::size_t size() const { return values.size(); }
};

//! Restrict the stored boundary trace of psi to one side.
TraceField extract_trace(DiscreteField const& psi, TraceSide side);

//! Sample g on the boundary quadrature of the grid.
TraceField sample_trace(PhaseFn const& g, GridSpec const& grid, TraceSide side);

enum class TraceWeighting
{
    Plain,
    Tau,
};

//! (int g^2 |omega . nu| [tau] d sigma d omega dE)^{1/2}.
double trace_norm(TraceField const& trace, TraceWeighting weighting = TraceWeighting::Plain);

/*!
 * d^alpha psi at the boundary quadrature points for |alpha| <= m, laid out
 * like the trace. alpha = 0 uses the stored trace when present; higher
 * orders differentiate the inward-shifted lattice interpolant.
 */
std::vector<std::vector<double>>
boundary_derivatives(DiscreteField const& psi, int m, int interpolation_order = 4);

//! (sum_{|alpha| <= m} |d^alpha psi|^2_{T^2(side)})^{1/2}.
double boundary_h_norm(DiscreteField const& psi, int m, TraceSide side = TraceSide::Outflow);

struct GreenOptions
{
    int interpolation_order = 6;
    //! Volume quadrature resolution (radial, polar, azimuthal).
    int n_radial = 16;
    int n_mu = 16;
    int n_phi = 32;
};

/*!
 * int (omega . grad psi) v + int (omega . grad v) psi - int_boundary (omega . nu) v psi.
 *
 * Volume integrals use a domain-fitted quadrature with values and gradients
 * from the lattice interpolant; the boundary term uses the stored traces.
 */
double green_residual(DiscreteField const& psi,
                      DiscreteField const& v,
                      GreenOptions const& options = {});

struct H0Margin
{
    double eta = 0;
    bool pass = false;
};

/*!
 * Largest eta with |psi| < 1e-10 wherever the escape time is below eta;
 * passes when eta > 2h.
 */
H0Margin h0_margin(DiscreteField const& psi);

}  // namespace cbt
