// SPDX-License-Identifier: Apache-2.0
#include "cbt/norms.hh"

#include <algorithm>
#include <cmath>
#include <memory>

#include "cbt/error.hh"
#include "cbt/parallel.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "norms";
constexpr double vanishing_tolerance = 1e-10;

void check_order(int m1, int m2, int m3)
{
    if (m1 < 0 || m1 > 3)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "spatial order " + std::to_string(m1) + " outside [0, 3]");
    }
    if (m2 != 0 || m3 != 0)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "angular and energy derivative orders are not supported");
    }
}

void check_resolution(GridSpec const& grid, int m)
{
    auto const& d = grid.dims();
    if (grid.node_count() == 0 || std::min({d[0], d[1], d[2]}) < 2 * m + 3)
    {
        throw Error(ErrorCode::GridTooCoarse, module_name,
                    "lattice too coarse for order " + std::to_string(m));
    }
}

bool on_side(double dot, TraceSide side)
{
    switch (side)
    {
        case TraceSide::Inflow: return dot < -tangential_tolerance;
        case TraceSide::Outflow: return dot > tangential_tolerance;
        case TraceSide::Full: return true;
    }
    return false;
}

template<class ValueFn>
TraceField build_trace(GridSpec const& grid, TraceSide side, ValueFn&& value)
{
    TraceField tr;
    tr.side = side;
    auto const& surf = grid.surface();
    auto const& dirs = grid.sphere().directions;
    auto const& dw = grid.sphere().weights;
    auto const& ew = grid.energy().weights;
    for (std::size_t s = 0; s < surf.size(); ++s)
    {
        for (std::size_t d = 0; d < dirs.size(); ++d)
        {
            double const dot = cbt::dot(dirs[d], surf.normals[s]);
            if (!on_side(dot, side))
                continue;
            double tau = 0;
            if (dot > tangential_tolerance)
                tau = extended_escape_time(grid.domain(), surf.points[s], dirs[d]);
            else if (dot < -tangential_tolerance)
                tau = inflow_chord_length(grid.domain(), surf.points[s], dirs[d]);
            for (std::size_t e = 0; e < ew.size(); ++e)
            {
                tr.values.push_back(value(s, e, d));
                tr.dot.push_back(dot);
                tr.weights.push_back(surf.weights[s] * dw[d] * ew[e]);
                tr.tau.push_back(tau);
            }
        }
    }
    return tr;
}
}  // namespace

//---------------------------------------------------------------------------//
double lattice_inner(GridSpec const& grid,
                     std::span<double const> a,
                     std::span<double const> b)
{
    std::size_t const nd = grid.direction_count();
    std::size_t const ne = grid.energy_count();
    auto const& dw = grid.sphere().weights;
    auto const& ew = grid.energy().weights;
    double const sum = parallel_sum(grid.node_count(), [&](std::size_t n) {
        double acc = 0;
        for (std::size_t e = 0; e < ne; ++e)
        {
            double inner = 0;
            std::size_t const base = (n * ne + e) * nd;
            for (std::size_t d = 0; d < nd; ++d)
                inner += dw[d] * a[base + d] * b[base + d];
            acc += ew[e] * inner;
        }
        return acc;
    });
    double const h = grid.h();
    return sum * h * h * h;
}

double h_norm(DiscreteField const& psi, NormOrder order)
{
    check_order(order.m1, order.m2, order.m3);
    auto const& g = psi.grid();
    check_resolution(g, order.m1);
    auto const derivs = lattice_derivatives(g, psi.values(), g.block_size(), order.m1);
    double total = 0;
    for (auto const& d : derivs)
        total += lattice_inner(g, d, d);
    return std::sqrt(total);
}

//---------------------------------------------------------------------------//
TraceField extract_trace(DiscreteField const& psi, TraceSide side)
{
    if (!psi.has_trace())
        throw Error(ErrorCode::EmptyTrace, module_name, "field carries no boundary trace");
    return build_trace(psi.grid(), side, [&](std::size_t s, std::size_t e, std::size_t d) {
        return psi.trace_at(s, e, d);
    });
}

TraceField sample_trace(PhaseFn const& g, GridSpec const& grid, TraceSide side)
{
    auto const& surf = grid.surface();
    auto const& dirs = grid.sphere().directions;
    auto const& energies = grid.energy().nodes;
    return build_trace(grid, side, [&](std::size_t s, std::size_t e, std::size_t d) {
        return g(surf.points[s], dirs[d], energies[e]);
    });
}

double trace_norm(TraceField const& trace, TraceWeighting weighting)
{
    if (trace.size() == 0)
        throw Error(ErrorCode::EmptyTrace, module_name, "trace has no samples");
    CompensatedSum sum;
    for (std::size_t i = 0; i < trace.size(); ++i)
    {
        double w = trace.weights[i] * std::abs(trace.dot[i]);
        if (weighting == TraceWeighting::Tau)
            w *= trace.tau[i];
        sum += w * trace.values[i] * trace.values[i];
    }
    return std::sqrt(sum.value());
}

//---------------------------------------------------------------------------//
std::vector<std::vector<double>>
boundary_derivatives(DiscreteField const& psi, int m, int interpolation_order)
{
    check_order(m, 0, 0);
    auto const& g = psi.grid();
    check_resolution(g, m);
    auto const alphas = multi_indices(m);
    std::size_t const block = g.block_size();
    auto const& surf = g.surface();
    LatticeInterpolator const interp(g, interpolation_order);
    std::vector<std::vector<double>> out(alphas.size(),
                                         std::vector<double>(surf.size() * block, 0.0));
    auto const& u = psi.values();
    for (std::size_t k = 0; k < alphas.size(); ++k)
    {
        if (k == 0 && psi.has_trace())
        {
            out[0] = psi.trace();
            continue;
        }
        parallel_for(surf.size(), [&](std::size_t s0, std::size_t s1) {
            auto st = std::make_unique<LatticeStencil>();
            for (std::size_t s = s0; s < s1; ++s)
            {
                interp.derivative_stencil(surf.points[s], alphas[k], *st);
                double* dest = out[k].data() + s * block;
                for (int i = 0; i < st->count; ++i)
                {
                    double const w = st->weight[i];
                    double const* src = u.data() + st->node[i] * block;
                    for (std::size_t b = 0; b < block; ++b)
                        dest[b] += w * src[b];
                }
            }
        });
    }
    return out;
}

double boundary_h_norm(DiscreteField const& psi, int m, TraceSide side)
{
    auto const derivs = boundary_derivatives(psi, m);
    auto const& g = psi.grid();
    auto const& surf = g.surface();
    auto const& dirs = g.sphere().directions;
    auto const& dw = g.sphere().weights;
    auto const& ew = g.energy().weights;
    std::size_t const nd = dirs.size();
    std::size_t const ne = ew.size();
    double total = 0;
    for (auto const& d : derivs)
    {
        total += parallel_sum(surf.size(), [&](std::size_t s) {
            double acc = 0;
            for (std::size_t j = 0; j < nd; ++j)
            {
                double const dot = cbt::dot(dirs[j], surf.normals[s]);
                if (!on_side(dot, side))
                    continue;
                for (std::size_t e = 0; e < ne; ++e)
                {
                    double const v = d[(s * ne + e) * nd + j];
                    acc += surf.weights[s] * dw[j] * ew[e] * std::abs(dot) * v * v;
                }
            }
            return acc;
        });
    }
    return std::sqrt(total);
}

//---------------------------------------------------------------------------//
double green_residual(DiscreteField const& psi, DiscreteField const& v, GreenOptions const& options)
{
    if (psi.grid_ptr() != v.grid_ptr())
        throw Error(ErrorCode::InvalidArgument, module_name, "fields live on different grids");
    auto const& g = psi.grid();
    check_resolution(g, 1);
    std::size_t const nd = g.direction_count();
    std::size_t const ne = g.energy_count();
    std::size_t const block = g.block_size();
    auto const& dirs = g.sphere().directions;
    auto const& dw = g.sphere().weights;
    auto const& ew = g.energy().weights;
    auto const vol = volume_quadrature(g.domain(), options.n_radial, options.n_mu, options.n_phi);
    LatticeInterpolator const interp(g, options.interpolation_order);
    auto const& a = psi.values();
    auto const& b = v.values();

    double const volume_term = parallel_sum(vol.size(), [&](std::size_t q) {
        thread_local std::unique_ptr<LatticeStencil> st;
        if (!st)
            st = std::make_unique<LatticeStencil>();
        interp.stencil(vol.points[q], *st, true);
        double acc = 0;
        for (std::size_t e = 0; e < ne; ++e)
        {
            for (std::size_t d = 0; d < nd; ++d)
            {
                std::size_t const slot = e * nd + d;
                double pa = 0;
                double pb = 0;
                Vec3 ga{0, 0, 0};
                Vec3 gb{0, 0, 0};
                for (int i = 0; i < st->count; ++i)
                {
                    double const va = a[st->node[i] * block + slot];
                    double const vb = b[st->node[i] * block + slot];
                    pa += st->weight[i] * va;
                    pb += st->weight[i] * vb;
                    for (int c = 0; c < 3; ++c)
                    {
                        ga[c] += st->gradient[c][i] * va;
                        gb[c] += st->gradient[c][i] * vb;
                    }
                }
                acc += ew[e] * dw[d] * (dot(dirs[d], ga) * pb + dot(dirs[d], gb) * pa);
            }
        }
        return vol.weights[q] * acc;
    });

    auto const ta = boundary_derivatives(psi, 0, options.interpolation_order);
    auto const tb = boundary_derivatives(v, 0, options.interpolation_order);
    auto const& surf = g.surface();
    double const boundary_term = parallel_sum(surf.size(), [&](std::size_t s) {
        double acc = 0;
        for (std::size_t e = 0; e < ne; ++e)
        {
            for (std::size_t d = 0; d < nd; ++d)
            {
                std::size_t const i = (s * ne + e) * nd + d;
                acc += ew[e] * dw[d] * dot(dirs[d], surf.normals[s]) * ta[0][i] * tb[0][i];
            }
        }
        return surf.weights[s] * acc;
    });
    return volume_term - boundary_term;
}

//---------------------------------------------------------------------------//
H0Margin h0_margin(DiscreteField const& psi)
{
    auto const& g = psi.grid();
    auto const& domain = g.domain();
    auto const& dirs = g.sphere().directions;
    std::size_t const nd = dirs.size();
    std::size_t const ne = g.energy_count();
    double const diameter = domain.diameter();

    auto smallest = [&](Vec3 const& x, double const* vals) {
        double best = diameter;
        for (std::size_t d = 0; d < nd; ++d)
        {
            bool nonzero = false;
            for (std::size_t e = 0; e < ne && !nonzero; ++e)
                nonzero = std::abs(vals[e * nd + d]) >= vanishing_tolerance;
            if (nonzero)
                best = std::min(best, extended_escape_time(domain, x, dirs[d]));
        }
        return best;
    };

    std::size_t const block = g.block_size();
    double eta = -parallel_max(g.node_count(), [&](std::size_t n) {
        return -smallest(g.position(n), psi.values().data() + n * block);
    });
    if (g.node_count() == 0)
        eta = diameter;
    if (psi.has_trace())
    {
        auto const& surf = g.surface();
        double const t = -parallel_max(surf.size(), [&](std::size_t s) {
            return -smallest(surf.points[s], psi.trace().data() + s * block);
        });
        eta = std::min(eta, t);
    }
    H0Margin r;
    r.eta = std::max(0.0, eta);
    r.pass = r.eta > 2 * g.h();
    return r;
}

}  // namespace cbt
