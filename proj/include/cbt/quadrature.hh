// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "geometry.hh"
#include "vec3.hh"

namespace cbt
{
//! Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/*!
 * Product rule on the unit sphere: Gauss-Legendre in the polar cosine and a
 * uniform (midpoint) rule in azimuth. Weights sum to 4 pi.
 */
struct SphereQuadrature
{
    int n_theta = 0;
    int n_phi = 0;
    std::vector<Vec3> directions;
    std::vector<double> weights;

    static SphereQuadrature product(int n_theta, int n_phi);
    std::size_t size() const { return directions.size(); }
    bool same_nodes(SphereQuadrature const& other) const;
};

struct EnergyInterval
{
    double e0 = 0;
    double em = 1;

    double width() const { return em - e0; }
};

//! Uniform energy nodes including both endpoints, trapezoid weights.
struct EnergyGrid
{
    EnergyInterval interval;
    std::vector<double> nodes;
    std::vector<double> weights;

    static EnergyGrid uniform(EnergyInterval interval, int n);
    std::size_t size() const { return nodes.size(); }
    double spacing() const;
};

//! Quadrature on the boundary surface.
struct SurfaceQuadrature
{
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

//! Quadrature on the domain volume.
struct VolumeQuadrature
{
    std::vector<Vec3> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

/*!
 * Boundary quadrature from the radial parametrization y(u) = c + rho(u) u
 * about the domain center, with the product sphere rule in u.
 *
 * The surface element is rho^2 / (u . nu) d omega_u.
 */
SurfaceQuadrature
surface_quadrature(ConvexDomain const& domain, int n_mu, int n_phi);

//! Volume quadrature x = c + r rho(u) u with Gauss-Legendre in r.
VolumeQuadrature volume_quadrature(ConvexDomain const& domain,
                                   int n_radial,
                                   int n_mu,
                                   int n_phi);

}  // namespace cbt
