// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "geometry.hh"
#include "quadrature.hh"

namespace cbt
{
//! Spatial multi-index alpha = (a1, a2, a3).
using MultiIndex = std::array<int, 3>;

inline int order_of(MultiIndex const& a)
{
    return a[0] + a[1] + a[2];
}

//! All multi-indices with |alpha| <= m, ordered by total order.
std::vector<MultiIndex> multi_indices(int m);

//! Product of componentwise binomial coefficients.
double binomial(MultiIndex const& alpha, MultiIndex const& beta);

//! beta <= alpha componentwise.
bool dominated(MultiIndex const& beta, MultiIndex const& alpha);

struct GridOptions
{
    //! Lattice nodes along the longest bounding-box extent.
    int nodes_per_axis = 33;
    int n_theta = 4;
    int n_phi = 8;
    EnergyInterval energy;
    int n_energy = 2;
    //! Boundary quadrature resolution; zero picks one matched to the lattice.
    int surface_n_mu = 0;
    int surface_n_phi = 0;
};

/*!
 * Discretization of G x S x I: a uniform lattice over the bounding box with
 * an interior mask, a product sphere rule, uniform energy nodes, and a
 * boundary quadrature carrying trace samples.
 */
class GridSpec
{
  public:
    static std::shared_ptr<GridSpec const>
    build(ConvexDomain const& domain, GridOptions const& options);

    //! Same lattice, sphere rule and surface rule with another energy grid.
    std::shared_ptr<GridSpec const> with_energy(EnergyGrid energy) const;

    ConvexDomain const& domain() const { return domain_; }
    GridOptions const& options() const { return options_; }
    double h() const { return h_; }
    std::array<int, 3> const& dims() const { return dims_; }
    Vec3 const& origin() const { return origin_; }

    std::size_t node_count() const { return positions_.size(); }
    Vec3 const& position(std::size_t n) const { return positions_[n]; }
    std::array<int, 3> const& cell(std::size_t n) const { return cells_[n]; }
    double depth(std::size_t n) const { return depth_[n]; }

    //! Compact node index at lattice (i, j, k), or -1 outside the mask.
    int lattice_index(int i, int j, int k) const
    {
        if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1]
            || k >= dims_[2])
            return -1;
        return index_[(static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i];
    }
    //! Interior neighbor of node n shifted by offset along axis, or -1.
    int neighbor(std::size_t n, int axis, int offset) const
    {
        auto c = cells_[n];
        c[axis] += offset;
        return this->lattice_index(c[0], c[1], c[2]);
    }

    SphereQuadrature const& sphere() const { return sphere_; }
    EnergyGrid const& energy() const { return energy_; }
    SurfaceQuadrature const& surface() const { return surface_; }

    std::size_t direction_count() const { return sphere_.size(); }
    std::size_t energy_count() const { return energy_.size(); }
    std::size_t surface_count() const { return surface_.size(); }
    //! Values stored per spatial point: energies x directions.
    std::size_t block_size() const
    {
        return sphere_.size() * energy_.size();
    }

  private:
    GridSpec(ConvexDomain domain) : domain_(std::move(domain)) {}

    ConvexDomain domain_;
    GridOptions options_;
    double h_ = 0;
    std::array<int, 3> dims_{0, 0, 0};
    Vec3 origin_;
    std::vector<int> index_;
    std::vector<Vec3> positions_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<double> depth_;
    SphereQuadrature sphere_;
    EnergyGrid energy_;
    SurfaceQuadrature surface_;
};

using GridPtr = std::shared_ptr<GridSpec const>;

/*!
 * Values on lattice nodes laid out [node][energy][direction], plus an
 * optional boundary trace laid out [surface point][energy][direction].
 */
class DiscreteField
{
  public:
    explicit DiscreteField(GridPtr grid, bool with_trace = true);

    GridPtr const& grid_ptr() const { return grid_; }
    GridSpec const& grid() const { return *grid_; }

    std::vector<double>& values() { return values_; }
    std::vector<double> const& values() const { return values_; }
    std::vector<double>& trace() { return trace_; }
    std::vector<double> const& trace() const { return trace_; }
    bool has_trace() const { return !trace_.empty(); }
    void drop_trace() { trace_.clear(); }

    std::size_t offset(std::size_t point, std::size_t e, std::size_t d) const
    {
        return (point * grid_->energy_count() + e) * grid_->direction_count() + d;
    }
    double& at(std::size_t node, std::size_t e, std::size_t d)
    {
        return values_[this->offset(node, e, d)];
    }
    double at(std::size_t node, std::size_t e, std::size_t d) const
    {
        return values_[this->offset(node, e, d)];
    }
    double& trace_at(std::size_t s, std::size_t e, std::size_t d)
    {
        return trace_[this->offset(s, e, d)];
    }
    double trace_at(std::size_t s, std::size_t e, std::size_t d) const
    {
        return trace_[this->offset(s, e, d)];
    }

  private:
    GridPtr grid_;
    std::vector<double> values_;
    std::vector<double> trace_;
};

//---------------------------------------------------------------------------//
// Finite differences
//---------------------------------------------------------------------------//
/*!
 * First difference along one axis of lattice data with `block` values per
 * node: central where both neighbors are interior, otherwise one-sided
 * (second order when two inward neighbors exist).
 */
std::vector<double> lattice_difference(GridSpec const& grid,
                                       std::span<double const> values,
                                       std::size_t block,
                                       int axis);

//! D^alpha of lattice data for all |alpha| <= m (ordered as multi_indices).
std::vector<std::vector<double>> lattice_derivatives(GridSpec const& grid,
                                                     std::span<double const> values,
                                                     std::size_t block,
                                                     int m);

//---------------------------------------------------------------------------//
// Interpolation
//---------------------------------------------------------------------------//
//! Up to 6^3 lattice nodes with Lagrange weights (and optional gradients).
struct LatticeStencil
{
    static constexpr int capacity = 216;
    int count = 0;
    std::array<std::uint32_t, capacity> node;
    std::array<double, capacity> weight;
    std::array<std::array<double, capacity>, 3> gradient;
};

/*!
 * Tensor-product Lagrange interpolation from interior lattice nodes.
 *
 * Orders 2, 4 and 6 use blocks of that many nodes per axis; near the
 * boundary the block is shifted inward until all its nodes are interior
 * (values become extrapolated). When no block fits the order drops.
 */
class LatticeInterpolator
{
  public:
    LatticeInterpolator(GridSpec const& grid, int order);

    int order() const { return order_; }

    //! Fill the stencil at x; gradient weights only when requested.
    void stencil(Vec3 const& x, LatticeStencil& out, bool with_gradient = false) const;

    //! Weights of d^alpha of the interpolant at x (|alpha| < order).
    void derivative_stencil(Vec3 const& x, MultiIndex const& alpha, LatticeStencil& out) const;

    //! Interpolate lattice data (block values per node) at slot b.
    double interpolate(std::span<double const> values,
                       std::size_t block,
                       std::size_t b,
                       Vec3 const& x) const;

  private:
    struct Level
    {
        int order;
        std::vector<std::uint8_t> valid;
        std::vector<std::array<int, 3>> shifts;
        // Block start per lattice cell, filled on first use (-2 unknown, -1 none)
        std::unique_ptr<std::atomic<int>[]> cache;
    };

    // Start of the interior block used for the cell containing u (lattice units).
    bool find_block(Level const& level, Vec3 const& u, std::array<int, 3>& start) const;
    bool search_block(Level const& level, Vec3 const& u, std::array<int, 3>& start) const;
    void fill(int p, std::array<int, 3> const& start, Vec3 const& u, LatticeStencil& out, bool grad) const;

    GridSpec const& grid_;
    int order_;
    std::vector<Level> levels_;
};

}  // namespace cbt
