// SPDX-License-Identifier: Apache-2.0
#include "cbt/scattering.hh"

#include <algorithm>
#include <cmath>
#include <random>

#include "cbt/norms.hh"
#include "cbt/parallel.hh"
#include "source_iteration.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "scattering_solver";
// Kernel matrices up to this many entries are cached between sweeps
constexpr std::size_t cache_limit = std::size_t(1) << 22;

double rate_from(std::vector<double> const& history)
{
    // Ratios after the first sweep; the first residual is |u0| itself
    std::vector<double> ratios;
    for (std::size_t k = 2; k < history.size(); ++k)
    {
        if (history[k - 1] > 0)
            ratios.push_back(history[k] / history[k - 1]);
    }
    if (ratios.empty())
        return 0;
    std::size_t const take = std::min<std::size_t>(3, ratios.size());
    double log_sum = 0;
    for (std::size_t i = ratios.size() - take; i < ratios.size(); ++i)
        log_sum += std::log(std::max(ratios[i], 1e-300));
    return std::exp(log_sum / take);
}

double max_abs_difference(std::vector<double> const& a, std::vector<double> const& b, std::size_t block)
{
    return parallel_max(a.size() / block, [&](std::size_t n) {
        double m = 0;
        for (std::size_t i = n * block; i < (n + 1) * block; ++i)
            m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    });
}

detail::SlotKernel slot_kernel(KernelFn const& scatter, GridSpec const& grid)
{
    auto const& energies = grid.energy().nodes;
    return [&scatter, &energies](Vec3 const& x, Vec3 const& wp, Vec3 const& w, std::size_t e) {
        return scatter(x, wp, w, energies[e]);
    };
}
}  // namespace

IterationLimitError::IterationLimitError(std::string module, IterationReport report)
    : Error(ErrorCode::MaxIterationsExceeded, std::move(module),
            "no convergence after " + std::to_string(report.iterations) + " iterations (residual "
                + std::to_string(report.residual_history.empty() ? 0.0 : report.residual_history.back())
                + ")")
    , report_(std::move(report))
{
}

//---------------------------------------------------------------------------//
double apply_scatter(KernelFn const& scatter,
                     PhaseFn const& psi,
                     SphereQuadrature const& sphere,
                     Vec3 const& x,
                     Vec3 const& omega,
                     double energy)
{
    if (!scatter)
        return 0;
    double acc = 0;
    for (std::size_t j = 0; j < sphere.size(); ++j)
    {
        Vec3 const& wp = sphere.directions[j];
        acc += sphere.weights[j] * scatter(x, wp, omega, energy) * psi(x, wp, energy);
    }
    return acc;
}

double apply_scatter(KernelFn const& scatter,
                     DiscreteField const& psi,
                     SphereQuadrature const& sphere,
                     std::size_t node,
                     std::size_t energy_slot,
                     Vec3 const& omega)
{
    auto const& g = psi.grid();
    if (!sphere.same_nodes(g.sphere()))
    {
        throw Error(ErrorCode::QuadratureMismatch, module_name,
                    "field directions differ from the requested sphere rule");
    }
    if (!scatter)
        return 0;
    Vec3 const& x = g.position(node);
    double const e = g.energy().nodes[energy_slot];
    double acc = 0;
    for (std::size_t j = 0; j < sphere.size(); ++j)
        acc += sphere.weights[j] * scatter(x, sphere.directions[j], omega, e) * psi.at(node, energy_slot, j);
    return acc;
}

std::vector<double> apply_scatter_field(KernelFn const& scatter, DiscreteField const& psi)
{
    std::vector<double> out(psi.values().size(), 0.0);
    if (!scatter)
        return out;
    detail::LatticeScatter const k(psi.grid(), slot_kernel(scatter, psi.grid()));
    k.apply(psi.values(), out);
    return out;
}

//---------------------------------------------------------------------------//
namespace detail
{
LatticeScatter::LatticeScatter(GridSpec const& grid, SlotKernel kernel)
    : grid_(grid), kernel_(std::move(kernel))
{
    std::size_t const nd = grid.direction_count();
    std::size_t const ne = grid.energy_count();
    std::size_t const total = grid.node_count() * ne * nd * nd;
    if (total > cache_limit)
        return;
    cache_.resize(total);
    auto const& dirs = grid.sphere().directions;
    auto const& w = grid.sphere().weights;
    parallel_for(grid.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
        {
            Vec3 const& x = grid.position(n);
            double* row = cache_.data() + n * ne * nd * nd;
            for (std::size_t e = 0; e < ne; ++e)
                for (std::size_t d = 0; d < nd; ++d)
                    for (std::size_t j = 0; j < nd; ++j)
                        *row++ = w[j] * kernel_(x, dirs[j], dirs[d], e);
        }
    });
}

void LatticeScatter::apply(std::span<double const> psi, std::span<double> out) const
{
    std::size_t const nd = grid_.direction_count();
    std::size_t const ne = grid_.energy_count();
    auto const& dirs = grid_.sphere().directions;
    auto const& w = grid_.sphere().weights;
    parallel_for(grid_.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
        {
            Vec3 const& x = grid_.position(n);
            for (std::size_t e = 0; e < ne; ++e)
            {
                double const* in = psi.data() + (n * ne + e) * nd;
                double* dest = out.data() + (n * ne + e) * nd;
                for (std::size_t d = 0; d < nd; ++d)
                {
                    double acc = 0;
                    if (!cache_.empty())
                    {
                        double const* row = cache_.data() + ((n * ne + e) * nd + d) * nd;
                        for (std::size_t j = 0; j < nd; ++j)
                            acc += row[j] * in[j];
                    }
                    else
                    {
                        for (std::size_t j = 0; j < nd; ++j)
                            acc += w[j] * kernel_(x, dirs[j], dirs[d], e) * in[j];
                    }
                    dest[d] = acc;
                }
            }
        }
    });
}

FixedPointResult source_iteration(FixedPointProblem const& problem)
{
    auto const& grid = *problem.grid;
    std::size_t const block = grid.block_size();

    SweepTerms terms;
    terms.sigma = problem.sigma;
    terms.sigma_constant = problem.sigma_constant;
    terms.source = problem.source;
    terms.interpolation_order = problem.interpolation_order;
    terms.with_trace = false;

    std::optional<LatticeScatter> scatter;
    if (problem.kernel)
        scatter.emplace(grid, problem.kernel);

    std::vector<double> lattice;
    if (problem.lattice_source)
        lattice = *problem.lattice_source;
    terms.lattice_source = problem.lattice_source ? &lattice : nullptr;

    IterationReport report;
    DiscreteField psi = transport_sweep(problem.grid, problem.quad, terms);
    report.iterations = 1;
    if (!scatter)
    {
        report.residual_history.push_back(0.0);
        report.converged = true;
    }
    else
    {
        lattice.resize(psi.values().size(), 0.0);
        terms.lattice_source = &lattice;
        std::vector<double> const zero(psi.values().size(), 0.0);
        report.residual_history.push_back(max_abs_difference(psi.values(), zero, block));
        std::vector<double> ks(psi.values().size());
        while (report.residual_history.back() >= problem.tol)
        {
            if (report.iterations >= problem.max_iter)
            {
                report.estimated_rate = rate_from(report.residual_history);
                throw IterationLimitError(problem.module, report);
            }
            scatter->apply(psi.values(), ks);
            for (std::size_t i = 0; i < ks.size(); ++i)
                lattice[i] = ks[i] + (problem.lattice_source ? (*problem.lattice_source)[i] : 0.0);
            DiscreteField next = transport_sweep(problem.grid, problem.quad, terms);
            ++report.iterations;
            report.residual_history.push_back(max_abs_difference(next.values(), psi.values(), block));
            psi = std::move(next);
        }
        report.converged = true;
        report.estimated_rate = rate_from(report.residual_history);
    }

    // Trace from the lattice source that produced the final iterate
    terms.with_nodes = false;
    terms.with_trace = true;
    DiscreteField trace = transport_sweep(problem.grid, problem.quad, terms);
    psi.trace() = std::move(trace.trace());
    return {std::move(psi), std::move(report)};
}
}  // namespace detail

//---------------------------------------------------------------------------//
double scatter_norm_bound(KernelFn const& scatter, int m, GridSpec const& grid)
{
    if (!scatter)
        return 0;
    if (m < 0 || m > 4)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "kernel order " + std::to_string(m) + " outside [0, 4]");
    }
    auto const alphas = multi_indices(m);
    std::size_t const na = alphas.size();
    std::size_t const nn = grid.node_count();
    std::size_t const nd = grid.direction_count();
    std::size_t const ne = grid.energy_count();
    auto const& dirs = grid.sphere().directions;
    auto const& w = grid.sphere().weights;
    auto const& energies = grid.energy().nodes;

    // acc1[a][n][e][d] = sum_j w_j |d^a k(j -> d)|, acc2 with the roles swapped
    std::vector<double> acc1(na * nn * ne * nd, 0.0);
    std::vector<double> acc2(na * nn * ne * nd, 0.0);
    std::vector<double> sample(nn);
    for (std::size_t e = 0; e < ne; ++e)
    {
        for (std::size_t j = 0; j < nd; ++j)
        {
            for (std::size_t d = 0; d < nd; ++d)
            {
                parallel_for(nn, [&](std::size_t n0, std::size_t n1) {
                    for (std::size_t n = n0; n < n1; ++n)
                        sample[n] = scatter(grid.position(n), dirs[j], dirs[d], energies[e]);
                });
                auto const derivs = m == 0 ? std::vector<std::vector<double>>{sample}
                                           : lattice_derivatives(grid, sample, 1, m);
                for (std::size_t a = 0; a < na; ++a)
                {
                    double* a1 = acc1.data() + a * nn * ne * nd;
                    double* a2 = acc2.data() + a * nn * ne * nd;
                    for (std::size_t n = 0; n < nn; ++n)
                    {
                        double const v = std::abs(derivs[a][n]);
                        a1[(n * ne + e) * nd + d] += w[j] * v;
                        a2[(n * ne + e) * nd + j] += w[d] * v;
                    }
                }
            }
        }
    }
    double const reach = m * grid.h();
    double n1 = 0;
    double n2 = 0;
    for (std::size_t a = 0; a < na; ++a)
    {
        for (std::size_t n = 0; n < nn; ++n)
        {
            if (m > 0 && !(grid.depth(n) > reach))
                continue;
            for (std::size_t i = 0; i < ne * nd; ++i)
            {
                n1 = std::max(n1, acc1[(a * nn + n) * ne * nd + i]);
                n2 = std::max(n2, acc2[(a * nn + n) * ne * nd + i]);
            }
        }
    }

    // C_m from the Leibniz and Cauchy-Schwarz counting
    double max_count = 0;
    double max_column = 0;
    for (auto const& alpha : alphas)
        max_count = std::max(max_count, static_cast<double>(lower_set_size(alpha)));
    for (auto const& beta : alphas)
    {
        double col = 0;
        for (auto const& alpha : alphas)
        {
            if (dominated(beta, alpha))
                col += binomial(alpha, beta) * binomial(alpha, beta);
        }
        max_column = std::max(max_column, col);
    }
    return std::sqrt(max_count * max_column * n1 * n2);
}

double scatter_operator_norm_estimate(KernelFn const& scatter,
                                      GridSpec const& grid,
                                      std::uint64_t seed,
                                      int iterations)
{
    if (!scatter)
        return 0;
    auto const& energies = grid.energy().nodes;
    detail::LatticeScatter const k(grid, slot_kernel(scatter, grid));
    detail::LatticeScatter const k_adjoint(
        grid, [&](Vec3 const& x, Vec3 const& wp, Vec3 const& w, std::size_t e) {
            return scatter(x, w, wp, energies[e]);
        });
    std::size_t const size = grid.node_count() * grid.block_size();
    std::vector<double> v(size);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& x : v)
        x = dist(rng);
    std::vector<double> kv(size);
    double estimate = 0;
    for (int it = 0; it < iterations; ++it)
    {
        double const vv = lattice_inner(grid, v, v);
        if (!(vv > 0))
            return 0;
        k.apply(v, kv);
        estimate = std::sqrt(lattice_inner(grid, kv, kv) / vv);
        k_adjoint.apply(kv, v);
        double const scale = 1.0 / std::sqrt(lattice_inner(grid, v, v) + 1e-300);
        for (auto& x : v)
            x *= scale;
    }
    return estimate;
}

double shift_threshold(CoefficientSet const& coeffs, int m, GridSpec const& grid)
{
    double const sigma_norm = coeffs.sigma_constant ? std::abs(*coeffs.sigma_constant)
                                                    : sup_norm_estimate(coeffs.sigma_fn(), m, grid);
    return leibniz_constant(m) * sigma_norm + scatter_norm_bound(coeffs.scatter, m, grid);
}

//---------------------------------------------------------------------------//
namespace
{
detail::FixedPointProblem
make_problem(CoefficientSet const& coeffs, GridPtr const& grid, ScatteringOptions const& options)
{
    auto const& energies = grid->energy().nodes;
    detail::FixedPointProblem p;
    p.grid = grid;
    p.quad = options.quad;
    double const c = coeffs.shift;
    if (coeffs.sigma_constant)
        p.sigma_constant = *coeffs.sigma_constant + c;
    p.sigma = [&coeffs, &energies, c](Vec3 const& x, Vec3 const& w, std::size_t e) {
        return coeffs.sigma(x, w, energies[e]) + c;
    };
    if (coeffs.scatter)
        p.kernel = slot_kernel(coeffs.scatter, *grid);
    p.tol = options.tol;
    p.max_iter = options.max_iter;
    p.interpolation_order = options.interpolation_order;
    return p;
}

double checked_threshold(CoefficientSet const& coeffs, GridSpec const& grid, int m)
{
    double const threshold = shift_threshold(coeffs, m, grid);
    if (coeffs.has_scatter() && !(coeffs.shift > threshold))
    {
        throw Error(ErrorCode::ShiftTooSmall, module_name,
                    "shift C = " + std::to_string(coeffs.shift) + " does not exceed C'' = "
                        + std::to_string(threshold));
    }
    return threshold;
}
}  // namespace

ScatteringResult solve_scattering(PhaseFn const& f,
                                  CoefficientSet const& coeffs,
                                  GridPtr const& grid,
                                  ScatteringOptions const& options)
{
    double const threshold = checked_threshold(coeffs, *grid, options.m);
    auto const& energies = grid->energy().nodes;
    auto problem = make_problem(coeffs, grid, options);
    problem.source = [&f, &energies](Vec3 const& x, Vec3 const& w, std::size_t e) {
        return f(x, w, energies[e]);
    };
    auto r = detail::source_iteration(problem);
    return {std::move(r.psi), std::move(r.report), threshold};
}

//---------------------------------------------------------------------------//
LiftValue lift_inflow(PhaseFn const& g, double lambda, ConvexDomain const& domain, PhasePoint const& p)
{
    double const t = extended_escape_time(domain, p.x, p.omega);
    if (t > 0)
        return {std::exp(-lambda * t) * g(p.x - t * p.omega, p.omega, p.energy), false};
    // t = 0 only on the inflow and tangential boundary
    auto const cls = classify_boundary(domain, p.x, p.omega);
    if (cls.kind == BoundaryKind::Inflow)
        return {g(p.x, p.omega, p.energy), false};
    return {0.0, true};
}

ScatteringResult solve_with_inflow(PhaseFn const& f,
                                   PhaseFn const& g,
                                   CoefficientSet const& coeffs,
                                   GridPtr const& grid,
                                   ScatteringOptions const& options,
                                   double lambda)
{
    double const threshold = checked_threshold(coeffs, *grid, options.m);
    auto const& domain = grid->domain();
    auto const& energies = grid->energy().nodes;
    PhaseFn const lift = [&](Vec3 const& x, Vec3 const& w, double e) {
        return lift_inflow(g, lambda, domain, {x, w, e}).value;
    };
    DiscreteField const lifted = sample_field(lift, grid);

    // u-source f - (Sigma + C - lambda - K_r) L g, all evaluated along the rays
    auto problem = make_problem(coeffs, grid, options);
    double const c = coeffs.shift;
    auto const& sphere = grid->sphere();
    problem.source = [&](Vec3 const& x, Vec3 const& w, std::size_t e) {
        double const en = energies[e];
        double const l = lift(x, w, en);
        double const kl = coeffs.scatter ? apply_scatter(coeffs.scatter, lift, sphere, x, w, en) : 0.0;
        return f(x, w, en) - (coeffs.sigma(x, w, en) + c - lambda) * l + kl;
    };
    auto r = detail::source_iteration(problem);
    auto& psi = r.psi;
    for (std::size_t i = 0; i < psi.values().size(); ++i)
        psi.values()[i] += lifted.values()[i];
    for (std::size_t i = 0; i < psi.trace().size(); ++i)
        psi.trace()[i] += lifted.trace()[i];
    return {std::move(psi), std::move(r.report), threshold};
}

}  // namespace cbt
