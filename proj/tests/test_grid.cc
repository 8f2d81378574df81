// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <doctest.h>

#include "cbt/grid.hh"
#include "test_support.hh"

using namespace cbt;
using namespace cbt::test;

TEST_CASE("multi indices and binomials")
{
    CHECK(multi_indices(0).size() == 1);
    CHECK(multi_indices(1).size() == 4);
    CHECK(multi_indices(2).size() == 10);
    CHECK(multi_indices(3).size() == 20);
    auto const idx = multi_indices(2);
    for (std::size_t i = 1; i < idx.size(); ++i)
        CHECK(order_of(idx[i - 1]) <= order_of(idx[i]));
    CHECK(binomial({2, 1, 0}, {1, 0, 0}) == 2);
    CHECK(binomial({2, 1, 0}, {1, 1, 0}) == 2);
    CHECK(binomial({3, 0, 1}, {1, 0, 1}) == 3);
    CHECK(dominated({1, 0, 0}, {1, 1, 0}));
    CHECK_FALSE(dominated({0, 2, 0}, {1, 1, 0}));
}

TEST_CASE("lattice construction")
{
    auto const g = ball_grid(17, 2, 4, 3);
    CHECK(g->h() == doctest::Approx(2.0 / 16));
    CHECK(g->direction_count() == 8);
    CHECK(g->energy_count() == 3);
    CHECK(g->block_size() == 24);
    REQUIRE(g->node_count() > 0);
    for (std::size_t n = 0; n < g->node_count(); ++n)
    {
        CHECK(g->domain().level(g->position(n)) < 0);
        auto const& c = g->cell(n);
        CHECK(g->lattice_index(c[0], c[1], c[2]) == static_cast<int>(n));
    }
    CHECK(g->lattice_index(-1, 0, 0) == -1);
    CHECK(g->surface_count() > 0);

    double w = 0;
    for (double x : g->sphere().weights)
        w += x;
    CHECK(std::abs(w - 4 * std::numbers::pi) < 1e-12);

    auto const slice = g->with_energy(EnergyGrid::uniform({0, 1}, 1));
    CHECK(slice->energy_count() == 1);
    CHECK(slice->node_count() == g->node_count());
    CHECK(slice->surface_count() == g->surface_count());
}

TEST_CASE("discrete field layout")
{
    auto const g = ball_grid(9, 2, 2, 2);
    DiscreteField f(g);
    CHECK(f.values().size() == g->node_count() * 8);
    CHECK(f.trace().size() == g->surface_count() * 8);
    f.at(3, 1, 2) = 7;
    CHECK(f.values()[(3 * 2 + 1) * 4 + 2] == 7);
    DiscreteField bare(g, false);
    CHECK_FALSE(bare.has_trace());
}

TEST_CASE("lattice differences")
{
    auto const g = ball_grid(21, 1, 2);
    std::size_t const block = 1;
    std::vector<double> v(g->node_count());
    for (std::size_t n = 0; n < v.size(); ++n)
    {
        Vec3 const& x = g->position(n);
        v[n] = x[0] * x[0] + 3 * x[1] - x[2] * x[0];
    }
    auto const dx = lattice_difference(*g, v, block, 0);
    auto const dy = lattice_difference(*g, v, block, 1);
    double worst = 0;
    for (std::size_t n = 0; n < v.size(); ++n)
    {
        Vec3 const& x = g->position(n);
        worst = std::max(worst, std::abs(dx[n] - (2 * x[0] - x[2])));
        worst = std::max(worst, std::abs(dy[n] - 3));
    }
    // Second-order stencils are exact on quadratics
    CHECK(worst < 1e-10);

    auto const d = lattice_derivatives(*g, v, block, 2);
    REQUIRE(d.size() == 10);
    // d^2/dx^2 = 2 away from the boundary
    auto const idx = multi_indices(2);
    for (std::size_t a = 0; a < idx.size(); ++a)
    {
        if (idx[a] != MultiIndex{2, 0, 0})
            continue;
        for (std::size_t n = 0; n < v.size(); ++n)
            if (g->depth(n) > 3 * g->h())
                CHECK(d[a][n] == doctest::Approx(2).epsilon(1e-8));
    }
}

TEST_CASE("lattice interpolation")
{
    auto const g = ball_grid(25, 1, 2);
    std::vector<double> v(g->node_count());
    auto cubic = [](Vec3 const& x) { return 1 + x[0] - 2 * x[1] * x[2] + x[0] * x[0] * x[1] + x[2] * x[2] * x[2]; };
    for (std::size_t n = 0; n < v.size(); ++n)
        v[n] = cubic(g->position(n));

    Rng rng(21);
    for (int order : {4, 6})
    {
        LatticeInterpolator const interp(*g, order);
        double worst = 0;
        for (int i = 0; i < 300; ++i)
        {
            Vec3 const x = random_in_ball(rng, 1.0);
            worst = std::max(worst, std::abs(interp.interpolate(v, 1, 0, x) - cubic(x)));
        }
        CHECK(worst < 1e-10);
    }

    // Linear interpolation is exact on linear data
    LatticeInterpolator const lin(*g, 2);
    for (std::size_t n = 0; n < v.size(); ++n)
        v[n] = 2 * g->position(n)[0] - g->position(n)[2];
    for (int i = 0; i < 100; ++i)
    {
        Vec3 const x = random_in_ball(rng, 0.9);
        CHECK(lin.interpolate(v, 1, 0, x) == doctest::Approx(2 * x[0] - x[2]).epsilon(1e-12));
    }

    // Gradient weights reproduce the gradient of a quadratic
    LatticeInterpolator const quad4(*g, 4);
    for (std::size_t n = 0; n < v.size(); ++n)
        v[n] = g->position(n)[0] * g->position(n)[1];
    LatticeStencil s;
    Vec3 const x{0.31, -0.27, 0.12};
    quad4.stencil(x, s, true);
    double gx = 0;
    double gy = 0;
    for (int k = 0; k < s.count; ++k)
    {
        gx += s.gradient[0][k] * v[s.node[k]];
        gy += s.gradient[1][k] * v[s.node[k]];
    }
    CHECK(gx == doctest::Approx(x[1]).epsilon(1e-10));
    CHECK(gy == doctest::Approx(x[0]).epsilon(1e-10));

    MultiIndex const alpha{1, 1, 0};
    quad4.derivative_stencil(x, alpha, s);
    double dxy = 0;
    for (int k = 0; k < s.count; ++k)
        dxy += s.weight[k] * v[s.node[k]];
    CHECK(dxy == doctest::Approx(1).epsilon(1e-9));
}
