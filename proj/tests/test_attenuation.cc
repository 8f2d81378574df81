// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "cbt/attenuation.hh"
#include "cbt/catalog.hh"
#include "cbt/error.hh"
#include "cbt/norms.hh"
#include "test_support.hh"

using namespace cbt;
using namespace cbt::test;

namespace
{
PhaseFn constant(double c)
{
    return [c](Vec3 const&, Vec3 const&, double) { return c; };
}

//! Inflow-vanishing bump centered at c with radius r and its gradient.
struct Bump
{
    Vec3 c;
    double r;

    double operator()(Vec3 const& x, Vec3 const&, double) const { return smooth_bump(norm(x - c) / r); }
    Vec3 gradient(Vec3 const& x) const
    {
        Vec3 const d = x - c;
        double const s = norm(d) / r;
        if (s >= 1 || s == 0)
            return {0, 0, 0};
        double const q = 1 - s * s;
        // d/ds exp(1 - 1/q) = exp(1 - 1/q) * (-2 s / q^2)
        double const ds = smooth_bump(s) * (-2 * s / (q * q));
        return (ds / (r * norm(d))) * d;
    }
};
}  // namespace

TEST_CASE("attenuation closed forms")
{
    auto const ball = ConvexDomain::unit_ball();
    Rng rng(41);
    RayQuadrature q;
    q.fixed_panels = 16;
    q.nodes_per_panel = 4;
    for (int i = 0; i < 200; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 1.0), random_direction(rng), 0.5};
        double const t = extended_escape_time(ball, p.x, p.omega);
        CHECK(solve_attenuation(constant(1), CoefficientSet::constant(0), ball, p) == doctest::Approx(t).epsilon(1e-13));
        double const got = solve_attenuation(constant(1), CoefficientSet::constant(0.6, 0.4), ball, p, q);
        CHECK(std::abs(got - (1 - std::exp(-t))) < 1e-8);
    }
}

TEST_CASE("manufactured solution along characteristics")
{
    // psi* = w(t~) with w(0) = 0; omega . grad t~ = 1 gives f = w'(t~) + sigma w(t~)
    auto const ball = ConvexDomain::unit_ball();
    double const sigma = 0.8;
    auto w = [](double t) { return t * std::sin(t) + t * t; };
    auto dw = [](double t) { return std::sin(t) + t * std::cos(t) + 2 * t; };
    PhaseFn const f = [&](Vec3 const& x, Vec3 const& o, double) {
        double const t = extended_escape_time(ball, x, o);
        return dw(t) + sigma * w(t);
    };
    Rng rng(42);
    for (int i = 0; i < 200; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 1.0), random_direction(rng), 0};
        double const exact = w(extended_escape_time(ball, p.x, p.omega));
        CHECK(std::abs(solve_attenuation(f, CoefficientSet::constant(sigma), ball, p) - exact) < 1e-9);
    }
}

TEST_CASE("variable attenuation against a fine reference")
{
    auto const ball = ConvexDomain::unit_ball();
    CoefficientSet c;
    c.sigma_t = [](Vec3 const& x, Vec3 const&, double) { return 1 + 0.5 * x[0] * x[0]; };
    c.shift = 0.2;
    PhaseFn const f = [](Vec3 const& x, Vec3 const& o, double) { return 1 + x[1] * o[2]; };
    RayQuadrature fine;
    fine.panels_per_unit_length = 128;
    fine.nodes_per_panel = 8;
    Rng rng(43);
    for (int i = 0; i < 50; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 1.0), random_direction(rng), 0};
        CHECK(solve_attenuation(f, c, ball, p) == doctest::Approx(solve_attenuation(f, c, ball, p, fine)).epsilon(1e-10));
    }
}

TEST_CASE("attenuation gradient")
{
    auto const ball = ConvexDomain::unit_ball();
    auto const c = CoefficientSet::constant(0.7, 0.3);
    PhaseGradFn const no_grad = [](Vec3 const&, Vec3 const&, double) { return Vec3{0, 0, 0}; };
    PhasePoint const p0{{0.1, 0.2, -0.3}, normalized(Vec3{1, 1, 0}), 0};
    auto const g0 = solve_attenuation_gradient(constant(0), no_grad, c, {}, ball, p0, {}, true);
    CHECK(norm(g0) == 0);

    Bump const bump{{0.1, -0.1, 0.05}, 0.6};
    PhaseFn const f = [bump](Vec3 const& x, Vec3 const& w, double e) { return bump(x, w, e); };
    PhaseGradFn const grad = [bump](Vec3 const& x, Vec3 const&, double) { return bump.gradient(x); };
    Rng rng(44);
    double const h = 1e-4;
    double worst = 0;
    for (int i = 0; i < 50; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 0.8), random_direction(rng), 0};
        Vec3 const g = solve_attenuation_gradient(f, grad, c, {}, ball, p, {}, true);
        Vec3 fd;
        for (int k = 0; k < 3; ++k)
        {
            PhasePoint a = p;
            PhasePoint b = p;
            a.x[k] += h;
            b.x[k] -= h;
            fd[k] = (solve_attenuation(f, c, ball, a) - solve_attenuation(f, c, ball, b)) / (2 * h);
        }
        if (norm(fd) > 1e-3)
            worst = std::max(worst, norm(g - fd) / norm(fd));
    }
    CHECK(worst < 1e-4);

    // f = 1 is not inflow-vanishing: psi = t~ and the boundary term carries the gradient
    for (int i = 0; i < 50; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 0.9), random_direction(rng), 0};
        Vec3 const g = solve_attenuation_gradient(constant(1), no_grad, CoefficientSet::constant(0), {}, ball, p, {}, false);
        CHECK(norm(g - ball_escape_closed_form(p.x, p.omega).gradient) < 1e-10);
    }
}

TEST_CASE("derivative source")
{
    Bump const bump{{0, 0, 0}, 0.6};
    DerivativeTable fd{{{0, 0, 0}, [bump](Vec3 const& x, Vec3 const& w, double e) { return bump(x, w, e); }},
                       {{1, 0, 0}, [bump](Vec3 const& x, Vec3 const&, double) { return bump.gradient(x)[0]; }}};
    PhaseFn const zero = constant(0);
    DerivativeTable const flat{{{0, 0, 0}, constant(0.5)}, {{1, 0, 0}, zero}};
    DerivativeTable const psi{{{0, 0, 0}, [](Vec3 const& x, Vec3 const&, double) { return x[1]; }}};

    // Constant Sigma: the Leibniz sum vanishes
    auto const fa = derivative_source(fd, flat, psi, {1, 0, 0});
    Vec3 const x{0.1, 0.2, 0.3};
    CHECK(fa(x, {0, 0, 1}, 0) == doctest::Approx(bump.gradient(x)[0]));

    // Sigma = x1: f_alpha = d1 f - psi
    DerivativeTable const lin{{{0, 0, 0}, [](Vec3 const& y, Vec3 const&, double) { return y[0]; }}, {{1, 0, 0}, constant(1)}};
    auto const fb = derivative_source(fd, lin, psi, {1, 0, 0});
    CHECK(fb(x, {0, 0, 1}, 0) == doctest::Approx(bump.gradient(x)[0] - x[1]));

    bool threw = false;
    try
    {
        derivative_source(fd, lin, DerivativeTable{}, {1, 0, 0});
    }
    catch (Error const& e)
    {
        threw = e.code() == ErrorCode::MissingDerivative;
    }
    CHECK(threw);
}

TEST_CASE("derivative source reproduces finite differences of the solution")
{
    auto const ball = ConvexDomain::unit_ball();
    CoefficientSet c;
    c.sigma_t = [](Vec3 const& x, Vec3 const&, double) { return 1 + 0.5 * x[0]; };
    Bump const bump{{0.1, 0, 0}, 0.55};
    PhaseFn const f = [bump](Vec3 const& x, Vec3 const& w, double e) { return bump(x, w, e); };
    PhaseFn const psi = [&](Vec3 const& x, Vec3 const& w, double e) { return solve_attenuation(f, c, ball, {x, w, e}); };
    DerivativeTable const fd{{{1, 0, 0}, [bump](Vec3 const& x, Vec3 const&, double) { return bump.gradient(x)[0]; }}};
    DerivativeTable const sd{{{1, 0, 0}, constant(0.5)}};
    DerivativeTable const pd{{{0, 0, 0}, psi}};
    auto const fa = derivative_source(fd, sd, pd, {1, 0, 0});

    Rng rng(45);
    double const h = 1e-4;
    for (int i = 0; i < 10; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 0.7), random_direction(rng), 0};
        PhasePoint a = p;
        PhasePoint b = p;
        a.x[0] += h;
        b.x[0] -= h;
        double const ref = (solve_attenuation(f, c, ball, a) - solve_attenuation(f, c, ball, b)) / (2 * h);
        CHECK(std::abs(solve_attenuation(fa, c, ball, p) - ref) < 1e-3);
    }
}

TEST_CASE("linearity, positivity, inflow and support")
{
    auto const ball = ConvexDomain::unit_ball();
    auto const c = CoefficientSet::constant(0.9, 0.1);
    Bump const b1{{0.2, 0, 0}, 0.5};
    Bump const b2{{-0.1, 0.3, 0}, 0.4};
    PhaseFn const f1 = [b1](Vec3 const& x, Vec3 const& w, double e) { return b1(x, w, e); };
    PhaseFn const f2 = [b2](Vec3 const& x, Vec3 const& w, double e) { return b2(x, w, e) * (1 + w[0]); };
    PhaseFn const mix = [&](Vec3 const& x, Vec3 const& w, double e) { return 3 * f1(x, w, e) - 0.5 * f2(x, w, e); };
    PhaseFn const inner = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.7); };
    Rng rng(46);
    for (int i = 0; i < 300; ++i)
    {
        PhasePoint const p{random_in_ball(rng, 1.0), random_direction(rng), 0};
        double const a = solve_attenuation(f1, c, ball, p);
        double const b = solve_attenuation(f2, c, ball, p);
        CHECK(std::abs(solve_attenuation(mix, c, ball, p) - (3 * a - 0.5 * b)) < 1e-12);
        CHECK(a >= 0);
        CHECK(b >= 0);
        if (extended_escape_time(ball, p.x, p.omega) < 0.3 - 1e-6)
            CHECK(std::abs(solve_attenuation(inner, c, ball, p)) < 1e-12);

        Vec3 const y = random_direction(rng);
        Vec3 w = random_direction(rng);
        if (dot(w, y) > 0)
            w = -w;
        CHECK(solve_attenuation(constant(1), c, ball, {y, w, 0}) == 0);
    }
}

TEST_CASE("grid sweep matches point solves")
{
    auto const g = ball_grid(9, 2, 4, 2);
    auto const c = CoefficientSet::constant(0.4, 0.2);
    PhaseFn const f = [](Vec3 const& x, Vec3 const& w, double e) { return 1 + x[0] * w[1] + e; };
    auto const psi = solve_attenuation_field(f, c, g);
    for (std::size_t n = 0; n < g->node_count(); n += 7)
        for (std::size_t e = 0; e < 2; ++e)
            for (std::size_t d = 0; d < g->direction_count(); ++d)
            {
                PhasePoint const p{g->position(n), g->sphere().directions[d], g->energy().nodes[e]};
                CHECK(psi.at(n, e, d) == doctest::Approx(solve_attenuation(f, c, g->domain(), p)).epsilon(1e-14));
            }
    auto const& s = g->surface();
    for (std::size_t i = 0; i < g->surface_count(); i += 5)
        for (std::size_t d = 0; d < g->direction_count(); ++d)
        {
            PhasePoint const p{s.points[i], g->sphere().directions[d], 0};
            CHECK(psi.trace_at(i, 0, d) == doctest::Approx(solve_attenuation(f, c, g->domain(), p)).epsilon(1e-14));
        }
}

TEST_CASE("accretivity functional")
{
    auto const g = ball_grid(25, 2, 4);
    DiscreteField zero(g);
    auto const z = accretivity_functional(zero, CoefficientSet::constant(0.3, 1), 1);
    CHECK(z.lhs == 0);
    CHECK(z.rhs_bound == 0);
    CHECK(z.boundary_term == 0);

    Rng rng(47);
    for (int i = 0; i < 12; ++i)
    {
        double const r = uniform(rng, 0.3, 0.45);
        Vec3 const c = random_in_ball(rng, 0.75 - r);
        Vec3 const a = 0.5 * random_direction(rng);
        auto const psi = sample_field(
            [=](Vec3 const& x, Vec3 const& w, double) { return smooth_bump(norm(x - c) / r) * (1 + dot(a, w)); }, g);
        int const m = i % 3;
        auto const res = accretivity_functional(psi, CoefficientSet::constant(0, 1), m);
        CHECK(res.lhs >= (1 - 0.02) * res.norm_squared);
        CHECK(res.boundary_term >= 0);

        if (m == 0)
        {
            auto const s = accretivity_functional(psi, CoefficientSet::constant(0.6, 1), 0);
            CHECK(s.lhs == doctest::Approx(s.boundary_term + 1.6 * s.norm_squared).epsilon(0.02));
        }
    }

    auto const ones = sample_field(constant(1), g);
    bool threw = false;
    try
    {
        accretivity_functional(ones, CoefficientSet::constant(0, 1), 0);
    }
    catch (Error const& e)
    {
        threw = e.code() == ErrorCode::NotInH0;
    }
    CHECK(threw);
}
