// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "attenuation.hh"
#include "error.hh"
#include "fields.hh"
#include "grid.hh"

namespace cbt
{
//! Progress of a source iteration.
struct IterationReport
{
    int iterations = 0;
    //! sup |psi_{k+1} - psi_k| over lattice nodes, one entry per sweep.
    std::vector<double> residual_history;
    bool converged = false;
    double estimated_rate = 0;
};

//! Raised when the iteration budget runs out; carries the partial report.
class IterationLimitError : public Error
{
  public:
    IterationLimitError(std::string module, IterationReport report);

    IterationReport const& report() const noexcept { return report_; }

  private:
    IterationReport report_;
};

//! Quadrature of int sigma^2(x, omega', omega, E) psi(x, omega', E) d omega'.
double apply_scatter(KernelFn const& scatter,
                     PhaseFn const& psi,
                     SphereQuadrature const& sphere,
                     Vec3 const& x,
                     Vec3 const& omega,
                     double energy);

//! Same quadrature using stored node values of psi at lattice node `node`.
double apply_scatter(KernelFn const& scatter,
                     DiscreteField const& psi,
                     SphereQuadrature const& sphere,
                     std::size_t node,
                     std::size_t energy_slot,
                     Vec3 const& omega);

//! K_r psi at every lattice node, direction and energy.
std::vector<double> apply_scatter_field(KernelFn const& scatter, DiscreteField const& psi);

/*!
 * sqrt(C_m N1 N2) with N1 = sup_{x,omega,E} int |d^alpha sigma^2| d omega',
 * N2 = sup_{x,omega',E} int |d^alpha sigma^2| d omega (max over |alpha| <= m)
 * and C_m = max_alpha #{beta <= alpha} * max_beta sum_{alpha >= beta} binom^2.
 */
double scatter_norm_bound(KernelFn const& scatter, int m, GridSpec const& grid);

//! Power-iteration estimate of the L^2 operator norm of the discrete K_r.
double scatter_operator_norm_estimate(KernelFn const& scatter,
                                      GridSpec const& grid,
                                      std::uint64_t seed,
                                      int iterations = 60);

//! C'' = c(m) |Sigma|_{W^{inf,m}} + scatter_norm_bound.
double shift_threshold(CoefficientSet const& coeffs, int m, GridSpec const& grid);

struct ScatteringOptions
{
    RayQuadrature quad;
    double tol = 1e-10;
    int max_iter = 200;
    int m = 0;
    int interpolation_order = 4;
};

struct ScatteringResult
{
    DiscreteField psi;
    IterationReport report;
    double threshold = 0;
};

/*!
 * Source iteration psi_{k+1} = A^{-1}(f + K_r psi_k) with
 * A = omega . grad + Sigma + C inverted along characteristics. K_r psi_k is
 * formed at lattice nodes and interpolated along each ray.
 */
ScatteringResult solve_scattering(PhaseFn const& f,
                                  CoefficientSet const& coeffs,
                                  GridPtr const& grid,
                                  ScatteringOptions const& options = {});

struct LiftValue
{
    double value = 0;
    bool tangential = false;
};

//! exp(-lambda t) g(x - t omega, omega, E) with t the escape time.
LiftValue lift_inflow(PhaseFn const& g, double lambda, ConvexDomain const& domain, PhasePoint const& p);

/*!
 * psi = u + L g where u solves the homogeneous-inflow problem with source
 * f - (omega . grad + Sigma + C - K_r) L g.
 */
ScatteringResult solve_with_inflow(PhaseFn const& f,
                                   PhaseFn const& g,
                                   CoefficientSet const& coeffs,
                                   GridPtr const& grid,
                                   ScatteringOptions const& options = {},
                                   double lambda = 0);

}  // namespace cbt
