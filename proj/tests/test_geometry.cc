// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <doctest.h>

#include "cbt/error.hh"
#include "cbt/geometry.hh"
#include "test_support.hh"

using namespace cbt;
using namespace cbt::test;

namespace
{
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

bool near(Vec3 const& a, Vec3 const& b, double tol)
{
    return norm(a - b) < tol;
}
}  // namespace

TEST_CASE("outward normal")
{
    auto const ball = ConvexDomain::unit_ball();
    CHECK(near(outward_normal(ball, {1, 0, 0}), {1, 0, 0}, 1e-12));
    CHECK(near(outward_normal(ball, {0, -1, 0}), {0, -1, 0}, 1e-12));

    // r = x^2/4 + y^2 + z^2 - 1 at (2, 0, 0)
    auto const ell = ConvexDomain::ellipsoid({0, 0, 0}, {2, 1, 1});
    CHECK(near(outward_normal(ell, {2, 0, 0}), {1, 0, 0}, 1e-12));
    Vec3 const y{std::sqrt(2.0), std::sqrt(0.5), 0};
    Vec3 const expect = normalized(Vec3{y[0] / 2, 2 * y[1], 0});
    CHECK(near(outward_normal(ell, y), expect, 1e-12));

    CHECK(code_of([&] { outward_normal(ball, {0.5, 0, 0}); }) == ErrorCode::NotOnBoundary);
}

TEST_CASE("boundary classification")
{
    auto const ball = ConvexDomain::unit_ball();
    auto c = classify_boundary(ball, {1, 0, 0}, {-1, 0, 0});
    CHECK(c.kind == BoundaryKind::Inflow);
    CHECK(c.dot == doctest::Approx(-1));
    c = classify_boundary(ball, {1, 0, 0}, {0, 0, 1});
    CHECK(c.kind == BoundaryKind::Tangential);
    CHECK(c.dot == doctest::Approx(0));
    c = classify_boundary(ball, {1, 0, 0}, {1, 0, 0});
    CHECK(c.kind == BoundaryKind::Outflow);
    CHECK(c.dot == doctest::Approx(1));

    // Inside the tangential band
    c = classify_boundary(ball, {1, 0, 0}, normalized(Vec3{1e-11, 0, 1}));
    CHECK(c.kind == BoundaryKind::Tangential);
    CHECK(code_of([&] { classify_boundary(ball, {0, 0, 0}, {1, 0, 0}); }) == ErrorCode::NotOnBoundary);
}

TEST_CASE("extended escape time examples")
{
    auto const ball = ConvexDomain::unit_ball();
    CHECK(extended_escape_time(ball, {0, 0, 0}, normalized(Vec3{1, 2, 3})) == doctest::Approx(1).epsilon(1e-14));
    CHECK(extended_escape_time(ball, {0.5, 0, 0}, {1, 0, 0}) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(extended_escape_time(ball, {1, 0, 0}, {0, 0, 1}) == 0);
    CHECK(extended_escape_time(ball, {1, 0, 0}, {-1, 0, 0}) == 0);
    CHECK(extended_escape_time(ball, {1, 0, 0}, {1, 0, 0}) == doctest::Approx(2));
    CHECK(code_of([&] { extended_escape_time(ball, {1.5, 0, 0}, {1, 0, 0}); }) == ErrorCode::OutsideDomain);

    auto const shifted = ConvexDomain::ball({1, 2, 3}, 2);
    CHECK(extended_escape_time(shifted, {1, 2, 3}, {0, 1, 0}) == doctest::Approx(2));
}

TEST_CASE("escape time against bisection")
{
    Rng rng(11);
    auto const ball = ConvexDomain::unit_ball();
    double worst = 0;
    for (int i = 0; i < 2000; ++i)
    {
        Vec3 const x = random_in_ball(rng, 0.999);
        Vec3 const w = random_direction(rng);
        worst = std::max(worst, std::abs(extended_escape_time(ball, x, w) - bisection_escape(x, w)));
        worst = std::max(worst, std::abs(escape_time_root_find(ball, x, w) - bisection_escape(x, w)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("ellipsoid escape time by root finding")
{
    Rng rng(12);
    auto const ell = ConvexDomain::ellipsoid({0.2, 0, -0.1}, {1.5, 1.0, 0.7});
    for (int i = 0; i < 500; ++i)
    {
        Vec3 const u = random_in_ball(rng, 0.98);
        Vec3 x = ell.center();
        for (int k = 0; k < 3; ++k)
            x[k] += u[k] * ell.semi_axes()[k];
        Vec3 const w = random_direction(rng);
        double const t = extended_escape_time(ell, x, w);
        REQUIRE(t > 0);
        REQUIRE(t <= ell.diameter());
        CHECK(std::abs(ell.level(x - t * w)) < 1e-9);
        CHECK(ell.level(x - 0.5 * t * w) < 0);
    }
}

TEST_CASE("ball closed form and gradient")
{
    Vec3 const w = normalized(Vec3{0.3, -0.4, 0.5});
    auto r = ball_escape_closed_form({0, 0, 0}, w);
    CHECK(r.time == doctest::Approx(1));
    CHECK(near(r.gradient, w, 1e-14));

    r = ball_escape_closed_form({0.5, 0, 0}, {1, 0, 0});
    CHECK(r.time == doctest::Approx(1.5));
    CHECK(near(r.gradient, {1, 0, 0}, 1e-14));

    Rng rng(13);
    double const h = 1e-5;
    double worst = 0;
    for (int i = 0; i < 500; ++i)
    {
        Vec3 const x = random_in_ball(rng, 0.9);
        Vec3 const d = random_direction(rng);
        auto const g = ball_escape_closed_form(x, d).gradient;
        Vec3 fd;
        for (int k = 0; k < 3; ++k)
        {
            Vec3 e{0, 0, 0};
            e[k] = h;
            fd[k] = (ball_escape_time(x + e, d) - ball_escape_time(x - e, d)) / (2 * h);
        }
        worst = std::max(worst, norm(fd - g) / std::max(norm(g), 1e-3));
    }
    CHECK(worst < 1e-5);

    CHECK(code_of([] { ball_escape_closed_form({1, 0, 0}, {0, 0, 1}); }) == ErrorCode::GradientUndefinedOnBoundary);
}

TEST_CASE("implicit gradient on ellipsoid")
{
    auto const ell = ConvexDomain::ellipsoid({0, 0, 0}, {1.4, 1.0, 0.8});
    Vec3 const x{0.1, -0.2, 0.15};
    Vec3 const w = normalized(Vec3{0.6, 0.3, -0.2});
    Vec3 const g = escape_time_gradient(ell, x, w);
    double const h = 1e-6;
    for (int k = 0; k < 3; ++k)
    {
        Vec3 e{0, 0, 0};
        e[k] = h;
        double const fd = (extended_escape_time(ell, x + e, w) - extended_escape_time(ell, x - e, w)) / (2 * h);
        CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("backtracking to the inflow boundary")
{
    auto const ball = ConvexDomain::unit_ball();
    auto p = backtrack_to_inflow(ball, {0, 0, 0}, {0, 0, 1});
    CHECK(near(p.y, {0, 0, -1}, 1e-12));
    CHECK(p.s == doctest::Approx(1));
    CHECK(classify_boundary(ball, p.y, {0, 0, 1}).dot == doctest::Approx(-1));

    p = backtrack_to_inflow(ball, {1, 0, 0}, {1, 0, 0});
    CHECK(near(p.y, {-1, 0, 0}, 1e-12));
    CHECK(p.s == doctest::Approx(2));

    Rng rng(14);
    for (int i = 0; i < 500; ++i)
    {
        Vec3 const x = random_in_ball(rng, 0.99);
        Vec3 const w = random_direction(rng);
        auto const q = backtrack_to_inflow(ball, x, w);
        CHECK(q.s > 0);
        CHECK(dot(w, outward_normal(ball, q.y)) < 1e-10);
    }

    CHECK(code_of([&] { backtrack_to_inflow(ball, {1, 0, 0}, {0, 0, 1}); }) == ErrorCode::TangentialStart);
    CHECK(code_of([&] { backtrack_to_inflow(ball, {1, 0, 0}, {-1, 0, 0}); }) == ErrorCode::TangentialStart);
}

TEST_CASE("support margin")
{
    auto const ball = ConvexDomain::unit_ball();
    std::vector<PhasePoint> pts{{{0, 0, 0}, {0, 1, 0}, 0}};
    CHECK(support_margin(ball, pts) == doctest::Approx(1));
    pts.push_back({{1, 0, 0}, {-1, 0, 0}, 0});
    CHECK(support_margin(ball, pts) == 0);

    // Points of a bump of radius 0.3 at the origin
    Rng rng(15);
    std::vector<PhasePoint> bump;
    for (int i = 0; i < 2000; ++i)
        bump.push_back({random_in_ball(rng, 0.3), random_direction(rng), 0});
    CHECK(support_margin(ball, bump) >= 0.7 - 1e-12);

    CHECK(code_of([&] { support_margin(ball, std::vector<PhasePoint>{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("strict convexity and gradient consistency")
{
    Rng rng(16);
    auto const ell = ConvexDomain::ellipsoid({0, 0.1, 0}, {1.2, 0.9, 1.1});
    for (int i = 0; i < 200; ++i)
    {
        Vec3 const a = random_direction(rng);
        Vec3 const b = random_direction(rng);
        Vec3 y1 = ell.center();
        Vec3 y2 = ell.center();
        for (int k = 0; k < 3; ++k)
        {
            y1[k] += a[k] * ell.semi_axes()[k];
            y2[k] += b[k] * ell.semi_axes()[k];
        }
        CHECK(ell.level(0.5 * (y1 + y2)) < 0);

        Vec3 const x = random_in_ball(rng, 1.0);
        Vec3 const g = ell.level_gradient(x);
        double const h = 1e-6;
        for (int k = 0; k < 3; ++k)
        {
            Vec3 e{0, 0, 0};
            e[k] = h;
            double const fd = (ell.level(x + e) - ell.level(x - e)) / (2 * h);
            CHECK(std::abs(fd - g[k]) <= 1e-6 * std::max(1.0, norm(g)));
        }
    }
}
