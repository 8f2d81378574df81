// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cbt/attenuation.hh"
#include "cbt/catalog.hh"
#include "cbt/csda.hh"
#include "cbt/error.hh"
#include "cbt/norms.hh"
#include "cbt/scattering.hh"
#include "cbt/scenario.hh"

namespace cbt
{
namespace
{
using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_direction(Rng& rng)
{
    double const mu = uniform(rng, -1, 1);
    double const phi = uniform(rng, 0, 2 * std::numbers::pi);
    double const s = std::sqrt(1 - mu * mu);
    return {s * std::cos(phi), s * std::sin(phi), mu};
}

Vec3 random_in_ball(Rng& rng, double radius)
{
    double const r = radius * std::cbrt(uniform(rng, 0, 1));
    return r * random_direction(rng);
}

//! Smooth direction-dependent bump supported in |x - c| < r.
PhaseFn random_bump(Rng& rng, double reach)
{
    double const r = uniform(rng, 0.25, 0.4);
    Vec3 const c = random_in_ball(rng, reach - r);
    double const amp = uniform(rng, 0.5, 1.5);
    Vec3 const a = 0.5 * random_direction(rng);
    return [=](Vec3 const& x, Vec3 const& w, double) { return amp * smooth_bump(norm(x - c) / r) * (1 + dot(a, w)); };
}

GridPtr small_grid(int nodes, int n_theta, int n_phi, int n_energy = 1)
{
    GridOptions o;
    o.nodes_per_axis = nodes;
    o.n_theta = n_theta;
    o.n_phi = n_phi;
    o.n_energy = n_energy;
    return GridSpec::build(ConvexDomain::unit_ball(), o);
}

//---------------------------------------------------------------------------//
void geometry_suite(RunReport& report, std::uint64_t seed)
{
    Rng rng(seed);
    auto const ball = ConvexDomain::unit_ball();
    auto const ell = ConvexDomain::ellipsoid({0.1, -0.2, 0.0}, {1.5, 1.0, 0.8});

    double additivity = 0;
    double range_violation = 0;
    for (auto const* dom : {&ball, &ell})
    {
        for (int i = 0; i < 1000; ++i)
        {
            Vec3 const u = random_in_ball(rng, 0.95);
            Vec3 x = dom->center();
            for (int k = 0; k < 3; ++k)
                x[k] += u[k] * dom->semi_axes()[k];
            Vec3 const w = random_direction(rng);
            double const t = extended_escape_time(*dom, x, w);
            double const s = uniform(rng, 0, t);
            additivity = std::max(additivity, std::abs(extended_escape_time(*dom, x - s * w, w) - (t - s)));
            range_violation = std::max({range_violation, -t, t - dom->diameter()});
        }
    }
    report.add("ray additivity", additivity < 1e-9, additivity, 1e-9);
    report.add("escape time range", range_violation <= 0, std::max(range_violation, 0.0), 0);

    int mismatched = 0;
    for (int i = 0; i < 1000; ++i)
    {
        Vec3 const y = random_direction(rng);
        Vec3 w = random_direction(rng);
        if (i % 10 == 0)
            w = normalized(cross(y, random_direction(rng)));
        auto const cls = classify_boundary(ball, y, w);
        bool const zero = extended_escape_time(ball, y, w) < 1e-9;
        if (zero != (cls.kind != BoundaryKind::Outflow))
            ++mismatched;
    }
    report.add("escape time zero set", mismatched == 0, mismatched, 0);

    double hyperplane = -1;
    for (int i = 0; i < 100; ++i)
    {
        Vec3 const u = random_direction(rng);
        Vec3 y = ell.center();
        for (int k = 0; k < 3; ++k)
            y[k] += u[k] * ell.semi_axes()[k];
        Vec3 const nu = outward_normal(ell, y);
        for (int j = 0; j < 1000; ++j)
        {
            Vec3 const v = random_in_ball(rng, 0.999);
            Vec3 z = ell.center();
            for (int k = 0; k < 3; ++k)
                z[k] += v[k] * ell.semi_axes()[k];
            hyperplane = std::max(hyperplane, dot(nu, z - y));
        }
    }
    report.add("supporting hyperplane", hyperplane < 0, hyperplane, 0);

    double closed = 0;
    for (int i = 0; i < 10000; ++i)
    {
        Vec3 const x = random_in_ball(rng, 0.999);
        Vec3 const w = random_direction(rng);
        closed = std::max(closed, std::abs(ball_escape_time(x, w) - escape_time_root_find(ball, x, w)));
    }
    report.add("closed form matches root finding", closed < 1e-9, closed, 1e-9);

    // t~ -> 0 approaching inflow boundary points from inside
    double approach = 0;
    for (int i = 0; i < 200; ++i)
    {
        Vec3 const y = random_direction(rng);
        Vec3 w = random_direction(rng);
        if (dot(w, y) > -0.05)
            w = -1.0 * w;
        if (dot(w, y) > -0.05)
            continue;
        approach = std::max(approach, extended_escape_time(ball, (1 - 1e-8) * y, w));
    }
    report.add("continuity toward inflow boundary", approach < 1e-6, approach, 1e-6);
}

//---------------------------------------------------------------------------//
void attenuation_suite(RunReport& report, std::uint64_t seed)
{
    Rng rng(seed);
    auto const ball = ConvexDomain::unit_ball();
    auto const coeffs = CoefficientSet::constant(0.7, 0.3);
    PhaseFn const f1 = random_bump(rng, 0.7);
    PhaseFn const f2 = [](Vec3 const& x, Vec3 const&, double) { return 1 + x[0] * x[1]; };
    PhaseFn const combo = [&](Vec3 const& x, Vec3 const& w, double e) { return 2 * f1(x, w, e) - 3 * f2(x, w, e); };

    double linear = 0;
    double negative = 0;
    double support = 0;
    double inflow = 0;
    for (int i = 0; i < 300; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 1.0), random_direction(rng), 0.5};
        double const a = solve_attenuation(f1, coeffs, ball, p);
        double const b = solve_attenuation(f2, coeffs, ball, p);
        linear = std::max(linear, std::abs(solve_attenuation(combo, coeffs, ball, p) - (2 * a - 3 * b)));
        negative = std::max(negative, -std::min(a, 0.0));
        Vec3 const y = random_direction(rng);
        Vec3 w = random_direction(rng);
        if (dot(w, y) > 0)
            w = -1.0 * w;
        inflow = std::max(inflow, std::abs(solve_attenuation(f2, coeffs, ball, {y, w, 0.5})));
    }
    report.add("linearity", linear < 1e-12, linear, 1e-12);
    report.add("monotonicity", negative == 0, negative, 0);
    report.add("inflow condition", inflow == 0, inflow, 0);

    // Source supported in |x| <= 0.6 has margin 0.4
    PhaseFn const inner = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.6); };
    for (int i = 0; i < 2000; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 1.0), random_direction(rng), 0.5};
        if (extended_escape_time(ball, p.x, p.omega) < 0.4 - 1e-6)
            support = std::max(support, std::abs(solve_attenuation(inner, coeffs, ball, p)));
    }
    report.add("support preservation", support < 1e-12, support, 1e-12);

    auto const grid = small_grid(25, 2, 4);
    double worst = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= 2; ++m)
    {
        for (int k = 0; k < 4; ++k)
        {
            PhaseFn const bump = random_bump(rng, 0.7);
            auto const psi = sample_field(bump, grid);
            CoefficientSet c = CoefficientSet::constant(0.5);
            c.shift = leibniz_constant(m) * 0.5 + 1;
            auto const r = accretivity_functional(psi, c, m);
            worst = std::min(worst, (r.lhs - r.rhs_bound) / r.norm_squared);
        }
    }
    report.add("accretivity", worst >= -0.02, worst, -0.02);
}

//---------------------------------------------------------------------------//
void scattering_suite(RunReport& report, std::uint64_t seed)
{
    Rng rng(seed);
    auto const grid = small_grid(17, 2, 4);
    KernelFn const kernel = make_kernel({{"type", "linear_anisotropic"},
                                         {"strength", 0.5},
                                         {"anisotropy", 0.4},
                                         {"profile", {{"type", "plateau"}, {"inner", 0.3}, {"outer", 0.6}}}});
    auto const& sphere = grid->sphere();

    double linear = 0;
    double negative = 0;
    for (int i = 0; i < 100; ++i)
    {
        PhaseFn const a = random_bump(rng, 0.7);
        PhaseFn const b = random_bump(rng, 0.7);
        PhaseFn const sum = [&](Vec3 const& x, Vec3 const& w, double e) { return a(x, w, e) + 2 * b(x, w, e); };
        Vec3 const x = random_in_ball(rng, 1.0);
        Vec3 const w = random_direction(rng);
        double const ka = apply_scatter(kernel, a, sphere, x, w, 0.5);
        double const kb = apply_scatter(kernel, b, sphere, x, w, 0.5);
        linear = std::max(linear, std::abs(apply_scatter(kernel, sum, sphere, x, w, 0.5) - ka - 2 * kb));
        negative = std::max(negative, -std::min({ka, kb, 0.0}));
    }
    report.add("scatter linearity", linear < 1e-13, linear, 1e-13);
    report.add("scatter monotonicity", negative == 0, negative, 0);

    CoefficientSet c = CoefficientSet::constant(0.0);
    c.scatter = kernel;
    double const bound = scatter_norm_bound(kernel, 0, *grid);
    c.shift = 1.0;
    PhaseFn const f = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.6); };
    ScatteringOptions o;
    o.tol = 1e-9;
    auto const r = solve_scattering(f, c, grid, o);
    double const limit = bound / c.shift + 0.05;
    report.add("contraction below bound", r.report.estimated_rate <= limit, r.report.estimated_rate, limit);
    auto const margin = h0_margin(r.psi);
    report.add("support margin retained", margin.eta > 0, margin.eta, 0);

    CoefficientSet plain = CoefficientSet::constant(0.4, 0.6);
    auto const s = solve_scattering(f, plain, grid, o);
    auto const a = solve_attenuation_field(f, plain, grid);
    double diff = 0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        diff = std::max(diff, std::abs(a.values()[i] - s.psi.values()[i]));
    report.add("no kernel reduces to attenuation", diff < 1e-12 && s.report.iterations == 1, diff, 1e-12);
}

//---------------------------------------------------------------------------//
void csda_suite(RunReport& report, std::uint64_t seed)
{
    Rng rng(seed);
    GridOptions o;
    o.nodes_per_axis = 13;
    o.n_theta = 2;
    o.n_phi = 4;
    o.n_energy = 5;
    auto const grid = GridSpec::build(ConvexDomain::unit_ball(), o);

    PhaseFn const any = [&](Vec3 const& x, Vec3 const& w, double e) { return std::sin(x[0] + 2 * w[1]) * (1 + e); };
    auto const sampled = sample_field(any, grid);
    auto const back = inverse_energy_transform(energy_transform(sampled, 0.8), 0.8);
    double round = 0;
    for (std::size_t i = 0; i < back.values().size(); ++i)
        round = std::max(round, std::abs(back.values()[i] - sampled.values()[i]));
    report.add("transform round trip", round < 1e-12, round, 1e-12);

    CoefficientSet c = CoefficientSet::constant(0.5);
    c.stopping = [](Vec3 const&, double) { return -1.0; };
    c.kappa = 1;
    c.shift = 1.0;
    CsdaOptions opts;
    opts.energy_step = 0.25 / 4;
    // Source vanishes above E* = 0.5
    PhaseFn const f = [](Vec3 const& x, Vec3 const&, double e) {
        return e < 0.5 ? smooth_bump(norm(x) / 0.6) * (0.5 - e) * (0.5 - e) : 0.0;
    };
    auto const psi = solve_csda(f, c, grid, opts);
    double causal = 0;
    for (std::size_t n = 0; n < grid->node_count(); ++n)
        for (std::size_t e = 0; e < grid->energy_count(); ++e)
            if (grid->energy().nodes[e] >= 0.5)
                for (std::size_t d = 0; d < grid->direction_count(); ++d)
                    causal = std::max(causal, std::abs(psi.at(n, e, d)));
    report.add("energy causality", causal < 1e-12, causal, 1e-12);

    double fin = 0;
    for (std::size_t n = 0; n < grid->node_count(); ++n)
        for (std::size_t d = 0; d < grid->direction_count(); ++d)
            fin = std::max(fin, std::abs(psi.at(n, grid->energy_count() - 1, d)));
    double inflow = 0;
    for (double v : extract_trace(psi, TraceSide::Inflow).values)
        inflow = std::max(inflow, std::abs(v));
    report.add("final energy slice zero", fin < 1e-12, fin, 1e-12);
    report.add("inflow trace zero", inflow < 1e-10, inflow, 1e-10);

    // E -> K_r(E) phi is differentiable with derivative given by d sigma^2 / dE
    KernelFn const k = [](Vec3 const& x, Vec3 const& wp, Vec3 const& w, double e) {
        return (1 + e * e) * (1 + 0.3 * dot(w, wp)) * (1 + 0.2 * x[0]) / (4 * std::numbers::pi);
    };
    KernelFn const dk = [](Vec3 const& x, Vec3 const& wp, Vec3 const& w, double e) {
        return 2 * e * (1 + 0.3 * dot(w, wp)) * (1 + 0.2 * x[0]) / (4 * std::numbers::pi);
    };
    PhaseFn const phi = [](Vec3 const& x, Vec3 const& w, double) { return std::cos(x[1]) * (1 + w[2]); };
    auto const& sphere = grid->sphere();
    double err_coarse = 0;
    double err_fine = 0;
    for (int i = 0; i < 50; ++i)
    {
        Vec3 const x = random_in_ball(rng, 1.0);
        Vec3 const w = random_direction(rng);
        double const e = uniform(rng, 0.1, 0.8);
        double const exact = apply_scatter(dk, phi, sphere, x, w, e);
        for (double de : {1e-2, 5e-3})
        {
            double const q = (apply_scatter(k, phi, sphere, x, w, e + de) - apply_scatter(k, phi, sphere, x, w, e)) / de;
            (de == 1e-2 ? err_coarse : err_fine) = std::max(de == 1e-2 ? err_coarse : err_fine, std::abs(q - exact));
        }
    }
    double const ratio = err_coarse > 0 ? err_fine / err_coarse : 0;
    report.add("scatter energy derivative first order", ratio > 0.4 && ratio < 0.6, ratio, 0.6);
}

//---------------------------------------------------------------------------//
void norms_suite(RunReport& report, std::uint64_t seed)
{
    Rng rng(seed);
    auto const grid = small_grid(25, 2, 4);
    PhaseFn const bump = random_bump(rng, 0.7);
    auto const psi = sample_field(bump, grid);
    double const n0 = h_norm(psi, {0, 0, 0});
    double const n1 = h_norm(psi, {1, 0, 0});
    double const n2 = h_norm(psi, {2, 0, 0});
    report.add("h_norm monotone in order", n0 <= n1 && n1 <= n2, n2 - n0, 0);
    auto scaled = psi;
    for (auto& v : scaled.values())
        v *= -2.5;
    double const hom = std::abs(h_norm(scaled, {1, 0, 0}) - 2.5 * n1) / n1;
    report.add("h_norm homogeneous", hom < 1e-12, hom, 1e-12);

    // Outflow boundary identity 2 <omega . grad psi, psi> = |psi|^2_{T^2(Gamma_+)}
    auto const fine = small_grid(33, 2, 4);
    PhaseFn const src = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.6); };
    auto const sol = solve_attenuation_field(src, CoefficientSet::constant(0.0), fine);
    auto const& g = *fine;
    std::size_t const block = g.block_size();
    std::array<std::vector<double>, 3> grad;
    for (int a = 0; a < 3; ++a)
        grad[a] = lattice_difference(g, sol.values(), block, a);
    std::vector<double> transport(sol.values().size());
    for (std::size_t n = 0; n < g.node_count(); ++n)
        for (std::size_t d = 0; d < g.direction_count(); ++d)
        {
            Vec3 const& w = g.sphere().directions[d];
            std::size_t const i = n * block + d;
            transport[i] = w[0] * grad[0][i] + w[1] * grad[1][i] + w[2] * grad[2][i];
        }
    double const lhs = 2 * lattice_inner(g, transport, sol.values());
    double const b = boundary_h_norm(sol, 0);
    double const rel = std::abs(lhs - b * b) / (b * b);
    report.add("transport identity at order 0", rel < 0.03, rel, 0.03);

    auto const coarse = solve_attenuation_field(src, CoefficientSet::constant(0.0), small_grid(17, 2, 4));
    double const t1 = trace_norm(extract_trace(coarse, TraceSide::Outflow));
    double const t2 = trace_norm(extract_trace(sol, TraceSide::Outflow));
    double const drift = std::abs(t1 - t2) / t2;
    report.add("outflow trace norm stable under refinement", drift < 0.05, drift, 0.05);

    auto const ones = sample_field([](Vec3 const&, Vec3 const&, double) { return 1.0; }, grid);
    double const green = std::abs(green_residual(ones, ones));
    report.add("green residual of constants", green < 1e-10, green, 1e-10);
}
}  // namespace

//---------------------------------------------------------------------------//
std::vector<std::string> const& verification_suites()
{
    static std::vector<std::string> const names{"geometry", "attenuation", "scattering", "csda", "norms"};
    return names;
}

RunReport run_verification_suite(std::string const& suite, std::uint64_t seed)
{
    auto const& names = verification_suites();
    bool const all = suite == "all";
    if (!all && std::find(names.begin(), names.end(), suite) == names.end())
        throw Error(ErrorCode::ConfigError, "cli", "'suite': unknown verification suite '" + suite + "'");
    RunReport report;
    report.kind = "verify:" + suite;
    report.seed = seed;
    for (auto const& name : names)
    {
        if (!all && name != suite)
            continue;
        auto const start = std::chrono::steady_clock::now();
        try
        {
            if (name == "geometry")
                geometry_suite(report, seed);
            else if (name == "attenuation")
                attenuation_suite(report, seed);
            else if (name == "scattering")
                scattering_suite(report, seed);
            else if (name == "csda")
                csda_suite(report, seed);
            else
                norms_suite(report, seed);
        }
        catch (Error const& e)
        {
            report.error += std::string(to_string(e.code())) + " [" + e.module() + "]: " + e.what() + "; ";
        }
        report.timings.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return report;
}

}  // namespace cbt
