// SPDX-License-Identifier: Apache-2.0
#include "cbt/grid.hh"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbt/error.hh"
#include "cbt/parallel.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "fields";

// Lagrange basis on nodes 0..p-1 and its derivative at t.
void lagrange_1d(int p, double t, double* w, double* dw)
{
    for (int j = 0; j < p; ++j)
    {
        double num = 1;
        double den = 1;
        for (int k = 0; k < p; ++k)
        {
            if (k == j)
                continue;
            num *= t - k;
            den *= j - k;
        }
        w[j] = num / den;
        if (dw)
        {
            double d = 0;
            for (int l = 0; l < p; ++l)
            {
                if (l == j)
                    continue;
                double prod = 1;
                for (int k = 0; k < p; ++k)
                {
                    if (k != j && k != l)
                        prod *= t - k;
                }
                d += prod;
            }
            dw[j] = d / den;
        }
    }
}
}  // namespace

//---------------------------------------------------------------------------//
std::vector<MultiIndex> multi_indices(int m)
{
    std::vector<MultiIndex> result;
    for (int order = 0; order <= m; ++order)
    {
        for (int a = order; a >= 0; --a)
        {
            for (int b = order - a; b >= 0; --b)
                result.push_back({a, b, order - a - b});
        }
    }
    return result;
}

double binomial(MultiIndex const& alpha, MultiIndex const& beta)
{
    double result = 1;
    for (int i = 0; i < 3; ++i)
    {
        int const n = alpha[i];
        int const k = beta[i];
        if (k < 0 || k > n)
            return 0;
        double c = 1;
        for (int j = 1; j <= k; ++j)
            c = c * (n - k + j) / j;
        result *= c;
    }
    return result;
}

bool dominated(MultiIndex const& beta, MultiIndex const& alpha)
{
    return beta[0] <= alpha[0] && beta[1] <= alpha[1] && beta[2] <= alpha[2];
}

//---------------------------------------------------------------------------//
std::shared_ptr<GridSpec const> GridSpec::with_energy(EnergyGrid energy) const
{
    std::shared_ptr<GridSpec> g(new GridSpec(*this));
    g->options_.energy = energy.interval;
    g->options_.n_energy = static_cast<int>(energy.size());
    g->energy_ = std::move(energy);
    return g;
}

std::shared_ptr<GridSpec const>
GridSpec::build(ConvexDomain const& domain, GridOptions const& options)
{
    if (options.nodes_per_axis < 3)
        throw Error(ErrorCode::InvalidArgument, module_name,
                    "need at least 3 lattice nodes per axis");
    std::shared_ptr<GridSpec> g(new GridSpec(domain));
    g->options_ = options;

    Vec3 const lo = domain.bbox_lo();
    Vec3 const hi = domain.bbox_hi();
    Vec3 const extent = hi - lo;
    double const longest = std::max({extent[0], extent[1], extent[2]});
    g->h_ = longest / (options.nodes_per_axis - 1);
    for (int a = 0; a < 3; ++a)
    {
        g->dims_[a] = static_cast<int>(std::floor(extent[a] / g->h_ + 1e-9)) + 1;
        double const mid = 0.5 * (lo[a] + hi[a]);
        g->origin_[a] = mid - 0.5 * (g->dims_[a] - 1) * g->h_;
    }

    auto const& d = g->dims_;
    g->index_.assign(static_cast<std::size_t>(d[0]) * d[1] * d[2], -1);
    for (int k = 0; k < d[2]; ++k)
    {
        for (int j = 0; j < d[1]; ++j)
        {
            for (int i = 0; i < d[0]; ++i)
            {
                Vec3 const x = g->origin_ + g->h_ * Vec3(i, j, k);
                if (domain.level(x) < -boundary_tolerance)
                {
                    g->index_[(static_cast<std::size_t>(k) * d[1] + j) * d[0] + i]
                        = static_cast<int>(g->positions_.size());
                    g->positions_.push_back(x);
                    g->cells_.push_back({i, j, k});
                    g->depth_.push_back(domain.boundary_distance(x));
                }
            }
        }
    }

    g->sphere_ = SphereQuadrature::product(options.n_theta, options.n_phi);
    g->energy_ = EnergyGrid::uniform(options.energy, options.n_energy);
    int n_mu = options.surface_n_mu;
    if (n_mu <= 0)
        n_mu = std::max(8, static_cast<int>(std::ceil(2 / g->h_)));
    int n_phi = options.surface_n_phi > 0 ? options.surface_n_phi : 2 * n_mu;
    g->surface_ = surface_quadrature(domain, n_mu, n_phi);
    return g;
}

//---------------------------------------------------------------------------//
DiscreteField::DiscreteField(GridPtr grid, bool with_trace) : grid_(std::move(grid))
{
    values_.assign(grid_->node_count() * grid_->block_size(), 0.0);
    if (with_trace)
        trace_.assign(grid_->surface_count() * grid_->block_size(), 0.0);
}

//---------------------------------------------------------------------------//
std::vector<double> lattice_difference(GridSpec const& grid,
                                       std::span<double const> values,
                                       std::size_t block,
                                       int axis)
{
    std::vector<double> out(values.size(), 0.0);
    double const h = grid.h();
    parallel_for(grid.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
        {
            int const p1 = grid.neighbor(n, axis, 1);
            int const m1 = grid.neighbor(n, axis, -1);
            double const* u0 = values.data() + n * block;
            double* o = out.data() + n * block;
            if (p1 >= 0 && m1 >= 0)
            {
                double const* up = values.data() + p1 * block;
                double const* um = values.data() + m1 * block;
                for (std::size_t b = 0; b < block; ++b)
                    o[b] = (up[b] - um[b]) / (2 * h);
                continue;
            }
            if (p1 >= 0)
            {
                double const* up = values.data() + p1 * block;
                int const p2 = grid.neighbor(n, axis, 2);
                if (p2 >= 0)
                {
                    double const* upp = values.data() + p2 * block;
                    for (std::size_t b = 0; b < block; ++b)
                        o[b] = (-3 * u0[b] + 4 * up[b] - upp[b]) / (2 * h);
                }
                else
                {
                    for (std::size_t b = 0; b < block; ++b)
                        o[b] = (up[b] - u0[b]) / h;
                }
                continue;
            }
            if (m1 >= 0)
            {
                double const* um = values.data() + m1 * block;
                int const m2 = grid.neighbor(n, axis, -2);
                if (m2 >= 0)
                {
                    double const* umm = values.data() + m2 * block;
                    for (std::size_t b = 0; b < block; ++b)
                        o[b] = (3 * u0[b] - 4 * um[b] + umm[b]) / (2 * h);
                }
                else
                {
                    for (std::size_t b = 0; b < block; ++b)
                        o[b] = (u0[b] - um[b]) / h;
                }
            }
        }
    });
    return out;
}

std::vector<std::vector<double>> lattice_derivatives(GridSpec const& grid,
                                                     std::span<double const> values,
                                                     std::size_t block,
                                                     int m)
{
    auto const alphas = multi_indices(m);
    std::vector<std::vector<double>> result(alphas.size());
    result[0].assign(values.begin(), values.end());
    for (std::size_t k = 1; k < alphas.size(); ++k)
    {
        auto const& a = alphas[k];
        int axis = 2;
        while (a[axis] == 0)
            --axis;
        MultiIndex parent = a;
        --parent[axis];
        auto const it = std::find(alphas.begin(), alphas.end(), parent);
        result[k] = lattice_difference(
            grid, result[static_cast<std::size_t>(it - alphas.begin())], block, axis);
    }
    return result;
}

//---------------------------------------------------------------------------//
LatticeInterpolator::LatticeInterpolator(GridSpec const& grid, int order)
    : grid_(grid), order_(order)
{
    if (order != 1 && order != 2 && order != 4 && order != 6)
        throw Error(ErrorCode::InvalidArgument, module_name,
                    "interpolation order must be 1, 2, 4 or 6");
    std::vector<int> orders;
    for (int p : {6, 4, 2, 1})
    {
        if (p <= order)
            orders.push_back(p);
    }
    auto const& d = grid.dims();
    for (int p : orders)
    {
        Level level;
        level.order = p;
        level.valid.assign(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0);
        for (int k = 0; k + p <= d[2]; ++k)
        {
            for (int j = 0; j + p <= d[1]; ++j)
            {
                for (int i = 0; i + p <= d[0]; ++i)
                {
                    bool ok = true;
                    for (int c = 0; c < p && ok; ++c)
                    {
                        for (int b = 0; b < p && ok; ++b)
                        {
                            for (int a = 0; a < p && ok; ++a)
                                ok = grid.lattice_index(i + a, j + b, k + c) >= 0;
                        }
                    }
                    level.valid[(static_cast<std::size_t>(k) * d[1] + j) * d[0] + i]
                        = ok;
                }
            }
        }
        int const r = std::max(2, p);
        for (int c = -r; c <= r; ++c)
        {
            for (int b = -r; b <= r; ++b)
            {
                for (int a = -r; a <= r; ++a)
                    level.shifts.push_back({a, b, c});
            }
        }
        std::stable_sort(level.shifts.begin(), level.shifts.end(), [](auto const& x, auto const& y) {
            int const lx = std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]);
            int const ly = std::abs(y[0]) + std::abs(y[1]) + std::abs(y[2]);
            return lx < ly;
        });
        std::size_t const cells = static_cast<std::size_t>(d[0]) * d[1] * d[2];
        level.cache = std::make_unique<std::atomic<int>[]>(cells);
        for (std::size_t i = 0; i < cells; ++i)
            level.cache[i].store(-2, std::memory_order_relaxed);
        levels_.push_back(std::move(level));
    }
}

bool LatticeInterpolator::find_block(Level const& level,
                                     Vec3 const& u,
                                     std::array<int, 3>& start) const
{
    if (level.order == 1)
        return this->search_block(level, u, start);
    auto const& d = grid_.dims();
    std::array<int, 3> cell;
    Vec3 center;
    for (int a = 0; a < 3; ++a)
    {
        cell[a] = std::clamp(static_cast<int>(std::floor(u[a])), 0, d[a] - 1);
        center[a] = cell[a] + 0.5;
    }
    std::size_t const key = (static_cast<std::size_t>(cell[2]) * d[1] + cell[1]) * d[0] + cell[0];
    int code = level.cache[key].load(std::memory_order_relaxed);
    if (code == -2)
    {
        code = this->search_block(level, center, start)
                   ? static_cast<int>((static_cast<std::size_t>(start[2]) * d[1] + start[1]) * d[0] + start[0])
                   : -1;
        level.cache[key].store(code, std::memory_order_relaxed);
    }
    if (code < 0)
        return false;
    start = {code % d[0], (code / d[0]) % d[1], code / (d[0] * d[1])};
    return true;
}

bool LatticeInterpolator::search_block(Level const& level,
                                       Vec3 const& u,
                                       std::array<int, 3>& start) const
{
    auto const& d = grid_.dims();
    int const p = level.order;
    std::array<int, 3> base;
    for (int a = 0; a < 3; ++a)
    {
        base[a] = p == 1 ? static_cast<int>(std::lround(u[a]))
                         : static_cast<int>(std::floor(u[a])) - (p / 2 - 1);
        base[a] = std::clamp(base[a], 0, d[a] - p);
    }
    // Valid block closest to u; ties go to the smallest shift
    double best = std::numeric_limits<double>::infinity();
    for (auto const& s : level.shifts)
    {
        std::array<int, 3> const cand{base[0] + s[0], base[1] + s[1], base[2] + s[2]};
        bool inside = true;
        for (int a = 0; a < 3; ++a)
            inside = inside && cand[a] >= 0 && cand[a] + p <= d[a];
        if (!inside
            || !level.valid[(static_cast<std::size_t>(cand[2]) * d[1] + cand[1]) * d[0] + cand[0]])
            continue;
        double ext = 0;
        for (int a = 0; a < 3; ++a)
            ext += std::max({0.0, cand[a] - u[a], u[a] - (cand[a] + p - 1)});
        if (ext < best)
        {
            best = ext;
            start = cand;
            if (ext == 0)
                break;
        }
    }
    return best < std::numeric_limits<double>::infinity();
}

void LatticeInterpolator::fill(int p,
                               std::array<int, 3> const& start,
                               Vec3 const& u,
                               LatticeStencil& out,
                               bool grad) const
{
    std::array<std::array<double, 6>, 3> w;
    std::array<std::array<double, 6>, 3> dw;
    for (int a = 0; a < 3; ++a)
        lagrange_1d(p, u[a] - start[a], w[a].data(), grad ? dw[a].data() : nullptr);
    double const inv_h = 1 / grid_.h();
    out.count = 0;
    for (int c = 0; c < p; ++c)
    {
        for (int b = 0; b < p; ++b)
        {
            for (int a = 0; a < p; ++a)
            {
                int const n = grid_.lattice_index(start[0] + a, start[1] + b, start[2] + c);
                int const i = out.count++;
                out.node[i] = static_cast<std::uint32_t>(n);
                out.weight[i] = w[0][a] * w[1][b] * w[2][c];
                if (grad)
                {
                    out.gradient[0][i] = dw[0][a] * w[1][b] * w[2][c] * inv_h;
                    out.gradient[1][i] = w[0][a] * dw[1][b] * w[2][c] * inv_h;
                    out.gradient[2][i] = w[0][a] * w[1][b] * dw[2][c] * inv_h;
                }
            }
        }
    }
}

void LatticeInterpolator::stencil(Vec3 const& x, LatticeStencil& out, bool with_gradient) const
{
    Vec3 const u = (x - grid_.origin()) / grid_.h();
    std::array<int, 3> start;
    for (auto const& level : levels_)
    {
        if (this->find_block(level, u, start))
        {
            this->fill(level.order, start, u, out, with_gradient);
            return;
        }
    }
    throw Error(ErrorCode::GridTooCoarse, module_name,
                "no interior lattice node near the interpolation point");
}

void LatticeInterpolator::derivative_stencil(Vec3 const& x,
                                             MultiIndex const& alpha,
                                             LatticeStencil& out) const
{
    Vec3 const u = (x - grid_.origin()) / grid_.h();
    std::array<int, 3> start;
    for (auto const& level : levels_)
    {
        int const p = level.order;
        if (std::max({alpha[0], alpha[1], alpha[2]}) >= p)
            continue;
        if (!this->find_block(level, u, start))
            continue;
        std::array<std::array<double, 6>, 3> w;
        for (int a = 0; a < 3; ++a)
        {
            double const t = u[a] - start[a];
            for (int j = 0; j < p; ++j)
            {
                // Monomial coefficients of the j-th basis polynomial
                std::array<double, 7> c{};
                c[0] = 1;
                int deg = 0;
                for (int k = 0; k < p; ++k)
                {
                    if (k == j)
                        continue;
                    double const inv = 1.0 / (j - k);
                    for (int i = deg + 1; i > 0; --i)
                        c[i] = (c[i - 1] - k * c[i]) * inv;
                    c[0] = -k * c[0] * inv;
                    ++deg;
                }
                double v = 0;
                for (int i = deg; i >= alpha[a]; --i)
                {
                    double f = 1;
                    for (int q = 0; q < alpha[a]; ++q)
                        f *= i - q;
                    v = v * t + c[i] * f;
                }
                w[a][j] = v * std::pow(grid_.h(), -alpha[a]);
            }
        }
        out.count = 0;
        for (int c = 0; c < p; ++c)
        {
            for (int b = 0; b < p; ++b)
            {
                for (int a = 0; a < p; ++a)
                {
                    int const i = out.count++;
                    out.node[i] = static_cast<std::uint32_t>(
                        grid_.lattice_index(start[0] + a, start[1] + b, start[2] + c));
                    out.weight[i] = w[0][a] * w[1][b] * w[2][c];
                }
            }
        }
        return;
    }
    throw Error(ErrorCode::GridTooCoarse, module_name,
                "no interior block supports the requested derivative");
}

double LatticeInterpolator::interpolate(std::span<double const> values,
                                        std::size_t block,
                                        std::size_t b,
                                        Vec3 const& x) const
{
    LatticeStencil s;
    this->stencil(x, s);
    double result = 0;
    for (int i = 0; i < s.count; ++i)
        result += s.weight[i] * values[s.node[i] * block + b];
    return result;
}

}  // namespace cbt
