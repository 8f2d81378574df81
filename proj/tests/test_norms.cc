// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

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
constexpr double pi = std::numbers::pi;

ErrorCode code_of(auto&& fn)
{
    try
    {
        fn();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

PhaseFn constant(double c)
{
    return [c](Vec3 const&, Vec3 const&, double) { return c; };
}
}  // namespace

TEST_CASE("h norm of simple fields")
{
    auto const g = ball_grid(101, 1, 2, 2);
    REQUIRE(g->h() <= 0.02);
    double const vol = 4 * pi / 3;
    auto const ones = sample_field(constant(1), g);
    double const expect = std::sqrt(vol * 4 * pi);
    CHECK(std::abs(h_norm(ones, {0, 0, 0}) - expect) / expect < 0.01);
    CHECK(h_norm(ones, {2, 0, 0}) == doctest::Approx(h_norm(ones, {0, 0, 0})).epsilon(1e-12));

    auto const x1 = sample_field([](Vec3 const& x, Vec3 const&, double) { return x[0]; }, g);
    double const moment = 4 * pi / 15;
    double const lin = std::sqrt((moment + vol) * 4 * pi);
    CHECK(std::abs(h_norm(x1, {1, 0, 0}) - lin) / lin < 0.01);

    auto scaled = x1;
    for (auto& v : scaled.values())
        v *= -3;
    CHECK(h_norm(scaled, {1, 0, 0}) == doctest::Approx(3 * h_norm(x1, {1, 0, 0})).epsilon(1e-12));
}

TEST_CASE("h norm guards")
{
    auto const g = ball_grid(9, 1, 2);
    auto const coarse = sample_field(constant(1), ball_grid(7, 1, 2));
    auto const ones = sample_field(constant(1), g);
    CHECK(code_of([&] { h_norm(ones, {4, 0, 0}); }) == ErrorCode::OrderTooHigh);
    CHECK(code_of([&] { h_norm(ones, {1, 1, 0}); }) == ErrorCode::OrderTooHigh);
    CHECK(code_of([&] { h_norm(coarse, {3, 0, 0}); }) == ErrorCode::GridTooCoarse);
}

TEST_CASE("trace norms")
{
    auto const g = ball_grid(33, 8, 16, 2);
    CHECK(trace_norm(sample_trace(constant(0), *g, TraceSide::Inflow)) == 0);

    // int_{Gamma_-} |omega . nu| = area * pi = 4 pi^2 per unit energy
    auto const one = sample_trace(constant(1), *g, TraceSide::Inflow);
    double const plain = trace_norm(one);
    CHECK(std::abs(plain - 2 * pi) / (2 * pi) < 0.01);
    CHECK(trace_norm(sample_trace(constant(1), *g, TraceSide::Outflow)) == doctest::Approx(plain).epsilon(1e-12));
    double const tau = trace_norm(one, TraceWeighting::Tau);
    CHECK(tau <= g->domain().diameter() * plain);
    CHECK(tau > 0);

    for (std::size_t i = 0; i < one.size(); ++i)
    {
        CHECK(one.dot[i] < 0);
        CHECK(one.weights[i] > 0);
    }

    DiscreteField bare(g, false);
    CHECK(code_of([&] { extract_trace(bare, TraceSide::Outflow); }) == ErrorCode::EmptyTrace);
}

TEST_CASE("boundary norms")
{
    auto const g = ball_grid(25, 2, 4);
    auto const zero = sample_field(constant(0), g);
    CHECK(boundary_h_norm(zero, 1) == 0);

    // Attenuation solution of a central source vanishes near the inflow boundary
    PhaseFn const src = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.5); };
    auto const psi = solve_attenuation_field(src, CoefficientSet::constant(0.3), g);
    double const out = boundary_h_norm(psi, 0, TraceSide::Outflow);
    double const full = boundary_h_norm(psi, 0, TraceSide::Full);
    CHECK(out > 0);
    CHECK(std::abs(out - full) < 1e-10);

    // psi = w(t~) has trace w(tau_+) on the outflow boundary
    auto w = [](double t) { return t * t * std::exp(-t); };
    auto const& dom = g->domain();
    auto const field = sample_field([&](Vec3 const& x, Vec3 const& o, double) { return w(extended_escape_time(dom, x, o)); }, g);
    double oracle = 0;
    auto const& s = g->surface();
    auto const& sph = g->sphere();
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t d = 0; d < sph.size(); ++d)
        {
            double const mu = dot(sph.directions[d], s.normals[i]);
            if (mu > tangential_tolerance)
            {
                double const t = extended_escape_time(dom, s.points[i], sph.directions[d]);
                oracle += s.weights[i] * sph.weights[d] * g->energy().weights[0] * mu * w(t) * w(t);
            }
        }
    CHECK(boundary_h_norm(field, 0) == doctest::Approx(std::sqrt(oracle)).epsilon(1e-12));
}

TEST_CASE("transport identity")
{
    auto const g = ball_grid(33, 2, 4);
    PhaseFn const src = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.6); };
    auto const psi = solve_attenuation_field(src, CoefficientSet::constant(0.0), g);
    std::size_t const block = g->block_size();
    std::array<std::vector<double>, 3> grad;
    for (int a = 0; a < 3; ++a)
        grad[a] = lattice_difference(*g, psi.values(), block, a);
    std::vector<double> transport(psi.values().size());
    for (std::size_t n = 0; n < g->node_count(); ++n)
        for (std::size_t d = 0; d < g->direction_count(); ++d)
        {
            Vec3 const& w = g->sphere().directions[d];
            std::size_t const i = n * block + d;
            transport[i] = w[0] * grad[0][i] + w[1] * grad[1][i] + w[2] * grad[2][i];
        }
    double const lhs = 2 * lattice_inner(*g, transport, psi.values());
    double const b = boundary_h_norm(psi, 0);
    CHECK(std::abs(lhs - b * b) / (b * b) < 0.03);
}

TEST_CASE("green residual")
{
    auto const g = ball_grid(17, 2, 4);
    auto const ones = sample_field(constant(1), g);
    CHECK(std::abs(green_residual(ones, ones)) < 1e-10);

    auto const x1 = sample_field([](Vec3 const& x, Vec3 const&, double) { return x[0]; }, g);
    auto const x2 = sample_field([](Vec3 const& x, Vec3 const& w, double) { return x[1] * (1 + w[1]); }, g);
    CHECK(std::abs(green_residual(x1, x2)) < 1e-10);

    // Analytic pair: the residual is interpolation error only
    auto const fine = ball_grid(33, 2, 4);
    auto const e1 = sample_field([](Vec3 const& x, Vec3 const& w, double) { return std::exp(x[0] + 0.5 * x[1]) * (1 + w[0]); }, fine);
    auto const e2 = sample_field([](Vec3 const& x, Vec3 const&, double) { return std::cos(1.3 * x[2]) - x[0] * x[1]; }, fine);
    CHECK(std::abs(green_residual(e1, e2)) < 1e-4);

    auto const other = sample_field(constant(1), ball_grid(17, 2, 4));
    CHECK(code_of([&] { green_residual(ones, other); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("h0 margin")
{
    auto const g = ball_grid(25, 2, 4);
    auto const zero = h0_margin(sample_field(constant(0), g));
    CHECK(zero.eta == doctest::Approx(2));
    CHECK(zero.pass);
    auto const one = h0_margin(sample_field(constant(1), g));
    CHECK(one.eta == 0);
    CHECK_FALSE(one.pass);

    PhaseFn const src = [](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x) / 0.7); };
    auto const psi = solve_attenuation_field(src, CoefficientSet::constant(0.5), g);
    auto const m = h0_margin(psi);
    CHECK(m.eta >= 0.3 - 1e-6);
    CHECK(m.pass);
}
