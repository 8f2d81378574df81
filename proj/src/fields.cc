// SPDX-License-Identifier: Apache-2.0
#include "cbt/fields.hh"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cbt/error.hh"
#include "cbt/parallel.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "fields";

constexpr double support_tolerance = 1e-10;

void check_finite(double v, char const* where, std::size_t point, std::size_t e, std::size_t d)
{
    if (!std::isfinite(v))
    {
        std::ostringstream os;
        os << "non-finite value at " << where << " point " << point << ", energy "
           << e << ", direction " << d;
        throw Error(ErrorCode::NonFiniteValue, module_name, os.str());
    }
}
}  // namespace

CoefficientSet CoefficientSet::constant(double sigma, double shift)
{
    CoefficientSet c;
    c.sigma_constant = sigma;
    c.sigma_t = [sigma](Vec3 const&, Vec3 const&, double) { return sigma; };
    c.shift = shift;
    return c;
}

PhaseFn CoefficientSet::sigma_fn() const
{
    if (sigma_constant)
    {
        double const s = *sigma_constant;
        return [s](Vec3 const&, Vec3 const&, double) { return s; };
    }
    return sigma_t;
}

//---------------------------------------------------------------------------//
DiscreteField sample_field(PhaseFn const& field, GridPtr const& grid)
{
    DiscreteField out(grid, true);
    auto const& g = *grid;
    auto const& dirs = g.sphere().directions;
    auto const& energies = g.energy().nodes;
    parallel_for(g.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
        {
            for (std::size_t e = 0; e < energies.size(); ++e)
            {
                for (std::size_t d = 0; d < dirs.size(); ++d)
                {
                    double const v = field(g.position(n), dirs[d], energies[e]);
                    check_finite(v, "node", n, e, d);
                    out.at(n, e, d) = v;
                }
            }
        }
    });
    auto const& surf = g.surface();
    parallel_for(surf.size(), [&](std::size_t s0, std::size_t s1) {
        for (std::size_t s = s0; s < s1; ++s)
        {
            for (std::size_t e = 0; e < energies.size(); ++e)
            {
                for (std::size_t d = 0; d < dirs.size(); ++d)
                {
                    double const v = field(surf.points[s], dirs[d], energies[e]);
                    check_finite(v, "surface", s, e, d);
                    out.trace_at(s, e, d) = v;
                }
            }
        }
    });
    return out;
}

//---------------------------------------------------------------------------//
double sup_norm_estimate(std::span<double const> values, int m, GridSpec const& grid)
{
    if (m < 0 || m > 4)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "sup-norm order " + std::to_string(m) + " outside [0, 4]");
    }
    std::size_t const block = grid.block_size();
    auto const derivs = lattice_derivatives(grid, values, block, m);
    double const reach = m * grid.h();
    bool any = false;
    for (std::size_t n = 0; n < grid.node_count() && !any; ++n)
        any = grid.depth(n) > reach;
    if (!any)
    {
        throw Error(ErrorCode::GridTooCoarse, module_name,
                    "no lattice node farther than m h from the boundary");
    }
    double result = 0;
    for (auto const& d : derivs)
    {
        double const s = parallel_max(grid.node_count(), [&](std::size_t n) {
            if (!(grid.depth(n) > reach))
                return 0.0;
            double v = 0;
            for (std::size_t b = 0; b < block; ++b)
                v = std::max(v, std::abs(d[n * block + b]));
            return v;
        });
        result = std::max(result, s);
    }
    return result;
}

double sup_norm_estimate(PhaseFn const& field, int m, GridSpec const& grid)
{
    if (m < 0 || m > 4)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "sup-norm order " + std::to_string(m) + " outside [0, 4]");
    }
    std::size_t const block = grid.block_size();
    std::vector<double> values(grid.node_count() * block);
    auto const& dirs = grid.sphere().directions;
    auto const& energies = grid.energy().nodes;
    parallel_for(grid.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
        {
            for (std::size_t e = 0; e < energies.size(); ++e)
            {
                for (std::size_t d = 0; d < dirs.size(); ++d)
                {
                    double const v = field(grid.position(n), dirs[d], energies[e]);
                    check_finite(v, "node", n, e, d);
                    values[(n * energies.size() + e) * dirs.size() + d] = v;
                }
            }
        }
    });
    return sup_norm_estimate(values, m, grid);
}

//---------------------------------------------------------------------------//
KernelSupportReport kernel_support_check(KernelFn const& scatter,
                                         int m,
                                         double eta,
                                         GridSpec const& grid)
{
    KernelSupportReport report;
    if (!scatter || m <= 0)
        return report;

    auto const& dirs = grid.sphere().directions;
    auto const& energies = grid.energy().nodes;
    int const order = m - 1;
    auto const alphas = multi_indices(order);

    std::vector<std::size_t> band;
    for (std::size_t n = 0; n < grid.node_count(); ++n)
    {
        if (grid.depth(n) < eta)
            band.push_back(n);
    }
    if (band.empty())
        return report;

    auto record = [&](double v, std::size_t n, MultiIndex const& a) {
        if (std::abs(v) > report.worst_value)
        {
            report.worst_value = std::abs(v);
            report.worst_position = grid.position(n);
            report.worst_alpha = a;
        }
    };

    if (order == 0)
    {
        for (std::size_t n : band)
        {
            for (double e : energies)
            {
                for (auto const& w : dirs)
                {
                    for (auto const& wp : dirs)
                        record(scatter(grid.position(n), wp, w, e), n, alphas[0]);
                }
            }
        }
    }
    else
    {
        std::vector<double> values(grid.node_count());
        for (double e : energies)
        {
            for (auto const& w : dirs)
            {
                for (auto const& wp : dirs)
                {
                    for (std::size_t n = 0; n < grid.node_count(); ++n)
                        values[n] = scatter(grid.position(n), wp, w, e);
                    auto const derivs = lattice_derivatives(grid, values, 1, order);
                    for (std::size_t k = 0; k < alphas.size(); ++k)
                    {
                        for (std::size_t n : band)
                            record(derivs[k][n], n, alphas[k]);
                    }
                }
            }
        }
    }
    report.pass = report.worst_value < support_tolerance;
    return report;
}

//---------------------------------------------------------------------------//
int lower_set_size(MultiIndex const& alpha)
{
    return (alpha[0] + 1) * (alpha[1] + 1) * (alpha[2] + 1);
}

double leibniz_row_constant(int m)
{
    double best = 0;
    for (auto const& alpha : multi_indices(std::max(0, m)))
    {
        double row = 0;
        for (auto const& beta : multi_indices(order_of(alpha)))
        {
            if (dominated(beta, alpha))
            {
                double const b = binomial(alpha, beta);
                row += b * b;
            }
        }
        best = std::max(best, row);
    }
    return std::sqrt(best);
}

double leibniz_constant(int m)
{
    auto const all = multi_indices(std::max(0, m));
    int column = 0;
    for (auto const& beta : all)
    {
        int count = 0;
        for (auto const& alpha : all)
            count += dominated(beta, alpha);
        column = std::max(column, count);
    }
    double const row = leibniz_row_constant(m);
    return row * std::sqrt(static_cast<double>(column));
}

}  // namespace cbt
