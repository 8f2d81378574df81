// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <numbers>

#include <doctest.h>

#include "cbt/catalog.hh"
#include "cbt/error.hh"
#include "cbt/fields.hh"
#include "cbt/norms.hh"
#include "test_support.hh"

using namespace cbt;
using namespace cbt::test;

namespace
{
// Binomial sums by direct enumeration over a box of multi-indices
double brute_leibniz(int m)
{
    auto choose = [](int n, int k) { return std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)); };
    double row = 0;
    int column = 0;
    for (int a0 = 0; a0 <= m; ++a0)
        for (int a1 = 0; a0 + a1 <= m; ++a1)
            for (int a2 = 0; a0 + a1 + a2 <= m; ++a2)
            {
                double r = 0;
                for (int b0 = 0; b0 <= a0; ++b0)
                    for (int b1 = 0; b1 <= a1; ++b1)
                        for (int b2 = 0; b2 <= a2; ++b2)
                        {
                            double const c = choose(a0, b0) * choose(a1, b1) * choose(a2, b2);
                            r += c * c;
                        }
                row = std::max(row, r);
                // alphas above this one (as beta) within order m
                int count = 0;
                for (int c0 = a0; c0 <= m; ++c0)
                    for (int c1 = a1; c0 + c1 <= m; ++c1)
                        for (int c2 = a2; c0 + c1 + c2 <= m; ++c2)
                            ++count;
                column = std::max(column, count);
            }
    return std::sqrt(row * column);
}
}  // namespace

TEST_CASE("sample field")
{
    auto const g = ball_grid(9, 2, 2, 2);
    auto const ones = sample_field([](Vec3 const&, Vec3 const&, double) { return 1.0; }, g);
    for (double v : ones.values())
        CHECK(v == 1);
    for (double v : ones.trace())
        CHECK(v == 1);

    auto const energy = sample_field([](Vec3 const&, Vec3 const&, double e) { return e; }, g);
    for (std::size_t n = 0; n < g->node_count(); ++n)
        for (std::size_t d = 0; d < g->direction_count(); ++d)
        {
            CHECK(energy.at(n, 0, d) == 0);
            CHECK(energy.at(n, 1, d) == 1);
        }

    auto const& dom = g->domain();
    auto const t = sample_field([&](Vec3 const& x, Vec3 const& w, double) { return extended_escape_time(dom, x, w); }, g);
    for (std::size_t n = 0; n < g->node_count(); ++n)
        for (std::size_t d = 0; d < g->direction_count(); ++d)
            CHECK(t.at(n, 1, d) == extended_escape_time(dom, g->position(n), g->sphere().directions[d]));

    bool threw = false;
    try
    {
        sample_field([](Vec3 const& x, Vec3 const&, double) {
            return x[0] > 0.3 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
        }, g);
    }
    catch (Error const& e)
    {
        threw = e.code() == ErrorCode::NonFiniteValue;
    }
    CHECK(threw);
}

TEST_CASE("sup norm estimates")
{
    auto const g = ball_grid(21, 1, 2);
    PhaseFn const c = [](Vec3 const&, Vec3 const&, double) { return -2.5; };
    for (int m = 0; m <= 4; ++m)
        CHECK(sup_norm_estimate(c, m, *g) == doctest::Approx(2.5));

    PhaseFn const x1 = [](Vec3 const& x, Vec3 const&, double) { return x[0]; };
    CHECK(sup_norm_estimate(x1, 1, *g) == doctest::Approx(1).epsilon(1e-10));

    PhaseFn const wave = [](Vec3 const& x, Vec3 const&, double) { return std::sin(std::numbers::pi * x[0]); };
    auto const fine = ball_grid(101, 1, 2);
    REQUIRE(fine->h() <= 0.02);
    double const pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(sup_norm_estimate(wave, 2, *fine) - pi2) / pi2 < 0.02);

    double prev = 0;
    for (int m = 0; m <= 3; ++m)
    {
        double const s = sup_norm_estimate(wave, m, *g);
        CHECK(s >= prev);
        prev = s;
    }

    bool threw = false;
    try
    {
        sup_norm_estimate(wave, 5, *g);
    }
    catch (Error const& e)
    {
        threw = e.code() == ErrorCode::OrderTooHigh;
    }
    CHECK(threw);
}

TEST_CASE("kernel support check")
{
    auto const g = ball_grid(21, 1, 2);
    auto r = kernel_support_check(KernelFn{}, 1, 0.3, *g);
    CHECK(r.pass);
    CHECK(r.worst_value == 0);

    KernelFn const zero = [](Vec3 const&, Vec3 const&, Vec3 const&, double) { return 0.0; };
    CHECK(kernel_support_check(zero, 2, 0.3, *g).pass);

    KernelFn const bump = [](Vec3 const& x, Vec3 const&, Vec3 const&, double) { return smooth_bump(norm(x) / 0.5); };
    CHECK(kernel_support_check(bump, 1, 0.3, *g).pass);
    CHECK(kernel_support_check(bump, 2, 0.3, *g).pass);

    KernelFn const one = [](Vec3 const&, Vec3 const&, Vec3 const&, double) { return 1.0; };
    r = kernel_support_check(one, 1, 0.1, *g);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_value == doctest::Approx(1));

    // Passing implies passing at smaller order and margin
    KernelFn const wide = [](Vec3 const& x, Vec3 const&, Vec3 const&, double) { return smooth_bump(norm(x) / 0.85); };
    bool const big = kernel_support_check(wide, 2, 0.1, *g).pass;
    if (big)
    {
        CHECK(kernel_support_check(wide, 1, 0.1, *g).pass);
        CHECK(kernel_support_check(wide, 2, 0.05, *g).pass);
    }
}

TEST_CASE("leibniz constant")
{
    CHECK(leibniz_constant(0) == 1);
    CHECK(leibniz_row_constant(1) == doctest::Approx(std::sqrt(2.0)));
    for (int m = 0; m <= 3; ++m)
        CHECK(leibniz_constant(m) == doctest::Approx(brute_leibniz(m)));
    CHECK(lower_set_size({1, 2, 0}) == 6);
}

TEST_CASE("product estimate holds with the leibniz constant")
{
    Rng rng(31);
    auto const g = ball_grid(25, 1, 2);
    double worst = 0;
    for (int i = 0; i < 100; ++i)
    {
        int const m = i % 3;
        double const a0 = uniform(rng, -1, 1);
        double const a1 = uniform(rng, -1, 1);
        double const a2 = uniform(rng, -1, 1);
        PhaseFn const sigma = [=](Vec3 const& x, Vec3 const&, double) {
            return a0 + a1 * x[0] + a2 * x[1] * x[2];
        };
        double const r = uniform(rng, 0.3, 0.5);
        Vec3 const c = random_in_ball(rng, 0.9 - r);
        PhaseFn const psi = [=](Vec3 const& x, Vec3 const&, double) { return smooth_bump(norm(x - c) / r); };
        PhaseFn const prod = [&](Vec3 const& x, Vec3 const& w, double e) { return sigma(x, w, e) * psi(x, w, e); };
        double const lhs = h_norm(sample_field(prod, g), {m, 0, 0});
        double const rhs = leibniz_constant(m) * sup_norm_estimate(sigma, m, *g) * h_norm(sample_field(psi, g), {m, 0, 0});
        worst = std::max(worst, lhs / rhs);
    }
    CHECK(worst <= 1.02);
}
