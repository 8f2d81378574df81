// SPDX-License-Identifier: Apache-2.0
#include "cbt/geometry.hh"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cbt/error.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "geometry";

[[noreturn]] void fail(ErrorCode code, std::string const& what)
{
    throw Error(code, module_name, what);
}

std::string describe(Vec3 const& x)
{
    std::ostringstream os;
    os.precision(17);
    os << '(' << x[0] << ", " << x[1] << ", " << x[2] << ')';
    return os.str();
}

// Closed-form escape time on the unit ball; clamps the discriminant so that
// boundary points within tolerance stay well defined.
double unit_ball_time(Vec3 const& x, Vec3 const& omega, double* root = nullptr)
{
    double const xw = dot(x, omega);
    double const arg = std::max(0.0, xw * xw + 1.0 - dot(x, x));
    double const sq = std::sqrt(arg);
    if (root)
        *root = sq;
    return std::max(0.0, xw + sq);
}

// Safeguarded Newton iteration with bisection fallback for a sign change of
// f on [lo, hi] with f(lo) < 0 < f(hi).
template<class F, class DF>
double safeguarded_newton(F const& f, DF const& df, double lo, double hi)
{
    double x = hi;
    double fx = f(x);
    double dx_old = hi - lo;
    double dx = dx_old;
    for (int iter = 0; iter < 200; ++iter)
    {
        double const dfx = df(x);
        bool const out_of_bracket
            = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0;
        bool const slow = std::abs(2 * fx) > std::abs(dx_old * dfx);
        dx_old = dx;
        if (out_of_bracket || slow || dfx == 0)
        {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        else
        {
            dx = fx / dfx;
            x -= dx;
        }
        if (std::abs(dx) < escape_root_tolerance)
            return x;
        fx = f(x);
        if (fx < 0)
            lo = x;
        else
            hi = x;
        if (hi - lo < escape_root_tolerance)
            return 0.5 * (lo + hi);
    }
    return 0.5 * (lo + hi);
}

// Larger root of s -> r(x - s omega) on (0, diameter]. `from_boundary` marks
// an outflow boundary start where r(x) ~ 0 and the lower bracket end has to
// be searched for.
double root_find_time(ConvexDomain const& domain,
                      Vec3 const& x,
                      Vec3 const& omega,
                      bool from_boundary)
{
    auto f = [&](double s) { return domain.level(x - s * omega); };
    auto df = [&](double s) {
        return -dot(domain.level_gradient(x - s * omega), omega);
    };

    double const hi = domain.diameter();
    if (!(f(hi) > 0))
    {
        fail(ErrorCode::RootNotBracketed,
             "level(x - d omega) is not positive for x = " + describe(x)
                 + ", omega = " + describe(omega));
    }

    double lo = 0;
    if (from_boundary)
    {
        bool found = false;
        double s = hi;
        for (int k = 0; k < 60; ++k)
        {
            s *= 0.5;
            if (f(s) < 0)
            {
                lo = s;
                found = true;
                break;
            }
        }
        if (!found)
            return 0;
    }
    else if (!(f(0) < 0))
    {
        fail(ErrorCode::RootNotBracketed,
             "level(x) is not negative at x = " + describe(x));
    }
    return safeguarded_newton(f, df, lo, hi);
}

}  // namespace

//---------------------------------------------------------------------------//
std::string to_string(DomainKind kind)
{
    switch (kind)
    {
        case DomainKind::UnitBall: return "unit_ball";
        case DomainKind::Ball: return "ball";
        case DomainKind::Ellipsoid: return "ellipsoid";
        case DomainKind::Custom: return "custom";
    }
    return "unknown";
}

std::string to_string(BoundaryKind kind)
{
    switch (kind)
    {
        case BoundaryKind::Inflow: return "inflow";
        case BoundaryKind::Outflow: return "outflow";
        case BoundaryKind::Tangential: return "tangential";
    }
    return "unknown";
}

//---------------------------------------------------------------------------//
ConvexDomain ConvexDomain::unit_ball()
{
    return ConvexDomain{};
}

ConvexDomain ConvexDomain::ball(Vec3 center, double radius)
{
    if (!(radius > 0))
        fail(ErrorCode::InvalidArgument, "ball radius must be positive");
    ConvexDomain d;
    d.kind_ = DomainKind::Ball;
    d.center_ = center;
    d.semi_axes_ = {radius, radius, radius};
    d.diameter_ = 2 * radius;
    d.bbox_lo_ = center - Vec3{radius, radius, radius};
    d.bbox_hi_ = center + Vec3{radius, radius, radius};
    d.gradient_bound_ = 2 / radius;
    return d;
}

ConvexDomain ConvexDomain::ellipsoid(Vec3 center, Vec3 semi_axes)
{
    for (int i = 0; i < 3; ++i)
    {
        if (!(semi_axes[i] > 0))
            fail(ErrorCode::InvalidArgument,
                 "ellipsoid semi-axes must be positive");
    }
    ConvexDomain d;
    d.kind_ = DomainKind::Ellipsoid;
    d.center_ = center;
    d.semi_axes_ = semi_axes;
    double const amax = std::max({semi_axes[0], semi_axes[1], semi_axes[2]});
    double const amin = std::min({semi_axes[0], semi_axes[1], semi_axes[2]});
    d.diameter_ = 2 * amax;
    d.bbox_lo_ = center - semi_axes;
    d.bbox_hi_ = center + semi_axes;
    d.gradient_bound_ = 2 / amin;
    return d;
}

ConvexDomain ConvexDomain::custom(LevelFn level,
                                  GradientFn gradient,
                                  double diameter,
                                  Vec3 bbox_lo,
                                  Vec3 bbox_hi,
                                  Vec3 center,
                                  double gradient_bound)
{
    if (!level || !gradient)
        fail(ErrorCode::InvalidArgument, "custom domain needs level and gradient");
    if (!(diameter > 0) || !(gradient_bound > 0))
        fail(ErrorCode::InvalidArgument,
             "custom domain diameter and gradient bound must be positive");
    ConvexDomain d;
    d.kind_ = DomainKind::Custom;
    d.center_ = center;
    d.diameter_ = diameter;
    d.bbox_lo_ = bbox_lo;
    d.bbox_hi_ = bbox_hi;
    d.semi_axes_ = 0.5 * (bbox_hi - bbox_lo);
    d.gradient_bound_ = gradient_bound;
    d.custom_level_ = std::move(level);
    d.custom_gradient_ = std::move(gradient);
    return d;
}

double ConvexDomain::level(Vec3 const& x) const
{
    if (kind_ == DomainKind::Custom)
        return custom_level_(x);
    double r = -1;
    for (int i = 0; i < 3; ++i)
    {
        double const u = (x[i] - center_[i]) / semi_axes_[i];
        r += u * u;
    }
    return r;
}

Vec3 ConvexDomain::level_gradient(Vec3 const& x) const
{
    if (kind_ == DomainKind::Custom)
        return custom_gradient_(x);
    Vec3 g;
    for (int i = 0; i < 3; ++i)
        g[i] = 2 * (x[i] - center_[i]) / (semi_axes_[i] * semi_axes_[i]);
    return g;
}

double ConvexDomain::boundary_distance(Vec3 const& x) const
{
    if (this->is_ball())
        return std::max(0.0, semi_axes_[0] - norm(x - center_));
    // r(x) >= -|grad r|_max * dist on the segment to the nearest boundary point
    return std::max(0.0, -this->level(x) / gradient_bound_);
}

double ConvexDomain::volume() const
{
    if (kind_ == DomainKind::Custom)
        return 0;
    return 4.0 / 3.0 * std::numbers::pi * semi_axes_[0] * semi_axes_[1]
           * semi_axes_[2];
}

//---------------------------------------------------------------------------//
Vec3 outward_normal(ConvexDomain const& domain, Vec3 const& y)
{
    double const lv = domain.level(y);
    if (std::abs(lv) > boundary_tolerance)
    {
        fail(ErrorCode::NotOnBoundary,
             "level(y) = " + std::to_string(lv) + " at y = " + describe(y));
    }
    Vec3 const g = domain.level_gradient(y);
    double const gn = norm(g);
    if (gn < 1e-12)
        fail(ErrorCode::DegenerateGradient, "vanishing level gradient at " + describe(y));
    return g / gn;
}

BoundaryClass
classify_boundary(ConvexDomain const& domain, Vec3 const& y, Vec3 const& omega)
{
    double const d = dot(omega, outward_normal(domain, y));
    if (d < -tangential_tolerance)
        return {BoundaryKind::Inflow, d};
    if (d > tangential_tolerance)
        return {BoundaryKind::Outflow, d};
    return {BoundaryKind::Tangential, d};
}

double ball_escape_time(Vec3 const& x, Vec3 const& omega)
{
    return unit_ball_time(x, omega);
}

BallEscape ball_escape_closed_form(Vec3 const& x, Vec3 const& omega)
{
    double const xw = dot(x, omega);
    double const arg = xw * xw + 1.0 - dot(x, x);
    if (arg < 1e-14)
    {
        fail(ErrorCode::GradientUndefinedOnBoundary,
             "square-root argument " + std::to_string(arg) + " at x = " + describe(x));
    }
    double const sq = std::sqrt(arg);
    BallEscape result;
    result.time = xw + sq;
    result.gradient = omega + (xw * omega - x) / sq;
    return result;
}

double escape_time_root_find(ConvexDomain const& domain,
                             Vec3 const& x,
                             Vec3 const& omega)
{
    double const lv = domain.level(x);
    if (lv > boundary_tolerance)
        fail(ErrorCode::OutsideDomain, "level(x) = " + std::to_string(lv));
    if (lv >= -boundary_tolerance)
    {
        if (classify_boundary(domain, x, omega).kind != BoundaryKind::Outflow)
            return 0;
        return root_find_time(domain, x, omega, true);
    }
    return root_find_time(domain, x, omega, false);
}

double extended_escape_time(ConvexDomain const& domain,
                            Vec3 const& x,
                            Vec3 const& omega)
{
    if (!domain.is_ball())
        return escape_time_root_find(domain, x, omega);

    double const lv = domain.level(x);
    if (lv > boundary_tolerance)
        fail(ErrorCode::OutsideDomain, "level(x) = " + std::to_string(lv));
    if (lv >= -boundary_tolerance
        && classify_boundary(domain, x, omega).kind != BoundaryKind::Outflow)
    {
        return 0;
    }
    double const r = domain.semi_axes()[0];
    return r * unit_ball_time((x - domain.center()) / r, omega);
}

double inflow_chord_length(ConvexDomain const& domain,
                           Vec3 const& y,
                           Vec3 const& omega)
{
    return extended_escape_time(domain, y, -omega);
}

Vec3 escape_time_gradient(ConvexDomain const& domain,
                          Vec3 const& x,
                          Vec3 const& omega)
{
    if (domain.is_ball())
    {
        double const r = domain.semi_axes()[0];
        return ball_escape_closed_form((x - domain.center()) / r, omega).gradient;
    }
    double const t = extended_escape_time(domain, x, omega);
    Vec3 const y = x - t * omega;
    Vec3 const g = domain.level_gradient(y);
    double const wg = dot(omega, g);
    if (std::abs(wg) < gradient_tangential_tolerance)
    {
        fail(ErrorCode::GradientUnavailable,
             "near-tangential exit at y = " + describe(y));
    }
    return g / wg;
}

InflowPoint backtrack_to_inflow(ConvexDomain const& domain,
                                Vec3 const& x,
                                Vec3 const& omega)
{
    double const s = extended_escape_time(domain, x, omega);
    if (s <= 0)
    {
        fail(ErrorCode::TangentialStart,
             "no inflow point behind x = " + describe(x));
    }
    return {x - s * omega, s};
}

double support_margin(ConvexDomain const& domain,
                      std::span<PhasePoint const> points)
{
    if (points.empty())
        fail(ErrorCode::EmptyInput, "support_margin needs at least one point");
    double margin = domain.diameter();
    for (auto const& p : points)
        margin = std::min(margin, extended_escape_time(domain, p.x, p.omega));
    return margin;
}

}  // namespace cbt
