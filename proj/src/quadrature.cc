// SPDX-License-Identifier: Apache-2.0
#include "cbt/quadrature.hh"

#include <cmath>
#include <numbers>

#include "cbt/error.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "quadrature";

// Radius of the boundary along u seen from the domain center.
double boundary_radius(ConvexDomain const& domain, Vec3 const& u)
{
    return extended_escape_time(domain, domain.center(), -u);
}
}  // namespace

GaussLegendre gauss_legendre(int n)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, module_name, "need at least one node");
    GaussLegendre result;
    if (n == 1)
    {
        result.nodes = {0.0};
        result.weights = {2.0};
        return result;
    }
    result.nodes.resize(n);
    result.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        // Tricomi initial guess, then Newton on P_n
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1;
            double p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                double const p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double const dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double const w = 2 / ((1 - x * x) * dp * dp);
        result.nodes[i] = -x;
        result.nodes[n - 1 - i] = x;
        result.weights[i] = w;
        result.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        result.nodes[n / 2] = 0;
    return result;
}

SphereQuadrature SphereQuadrature::product(int n_theta, int n_phi)
{
    if (n_theta < 1 || n_phi < 1)
        throw Error(ErrorCode::InvalidArgument, module_name,
                    "sphere quadrature needs positive counts");
    auto const gl = gauss_legendre(n_theta);
    SphereQuadrature q;
    q.n_theta = n_theta;
    q.n_phi = n_phi;
    q.directions.reserve(n_theta * n_phi);
    q.weights.reserve(n_theta * n_phi);
    double const dphi = 2 * std::numbers::pi / n_phi;
    for (int i = 0; i < n_theta; ++i)
    {
        for (int k = 0; k < n_phi; ++k)
        {
            q.directions.push_back(
                direction_from_angles(gl.nodes[i], (k + 0.5) * dphi));
            q.weights.push_back(gl.weights[i] * dphi);
        }
    }
    return q;
}

bool SphereQuadrature::same_nodes(SphereQuadrature const& other) const
{
    return n_theta == other.n_theta && n_phi == other.n_phi
           && directions == other.directions;
}

EnergyGrid EnergyGrid::uniform(EnergyInterval interval, int n)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, module_name, "need at least one energy node");
    if (!(interval.em > interval.e0) || interval.e0 < 0)
        throw Error(ErrorCode::InvalidArgument, module_name,
                    "energy interval needs 0 <= E0 < Em");
    EnergyGrid g;
    g.interval = interval;
    if (n == 1)
    {
        g.nodes = {interval.em};
        g.weights = {interval.width()};
        return g;
    }
    double const de = interval.width() / (n - 1);
    for (int k = 0; k < n; ++k)
    {
        g.nodes.push_back(k + 1 == n ? interval.em : interval.e0 + k * de);
        g.weights.push_back((k == 0 || k + 1 == n) ? 0.5 * de : de);
    }
    return g;
}

double EnergyGrid::spacing() const
{
    return nodes.size() > 1 ? interval.width() / (nodes.size() - 1) : interval.width();
}

SurfaceQuadrature
surface_quadrature(ConvexDomain const& domain, int n_mu, int n_phi)
{
    auto const sphere = SphereQuadrature::product(n_mu, n_phi);
    SurfaceQuadrature s;
    s.points.reserve(sphere.size());
    s.normals.reserve(sphere.size());
    s.weights.reserve(sphere.size());
    for (std::size_t i = 0; i < sphere.size(); ++i)
    {
        Vec3 const& u = sphere.directions[i];
        double const rho = boundary_radius(domain, u);
        Vec3 const y = domain.center() + rho * u;
        Vec3 const nu = outward_normal(domain, y);
        s.points.push_back(y);
        s.normals.push_back(nu);
        s.weights.push_back(sphere.weights[i] * rho * rho / dot(u, nu));
    }
    return s;
}

VolumeQuadrature volume_quadrature(ConvexDomain const& domain,
                                   int n_radial,
                                   int n_mu,
                                   int n_phi)
{
    auto const sphere = SphereQuadrature::product(n_mu, n_phi);
    auto const gl = gauss_legendre(n_radial);
    VolumeQuadrature v;
    v.points.reserve(sphere.size() * n_radial);
    v.weights.reserve(sphere.size() * n_radial);
    for (std::size_t i = 0; i < sphere.size(); ++i)
    {
        Vec3 const& u = sphere.directions[i];
        double const rho = boundary_radius(domain, u);
        for (int k = 0; k < n_radial; ++k)
        {
            double const r = 0.5 * (gl.nodes[k] + 1);
            v.points.push_back(domain.center() + (r * rho) * u);
            v.weights.push_back(sphere.weights[i] * 0.5 * gl.weights[k] * r * r
                                * rho * rho * rho);
        }
    }
    return v;
}

}  // namespace cbt
