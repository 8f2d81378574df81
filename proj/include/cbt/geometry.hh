// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>

#include "vec3.hh"

namespace cbt
{
//---------------------------------------------------------------------------//
// Tolerances
//---------------------------------------------------------------------------//
//! Band on omega . nu inside which a boundary direction counts as tangential.
inline constexpr double tangential_tolerance = 1e-10;
//! |level(y)| at or below this qualifies y as a boundary point.
inline constexpr double boundary_tolerance = 1e-9;
//! Absolute tolerance on escape-time root finding.
inline constexpr double escape_root_tolerance = 1e-12;
//! Below this |omega . grad r(y)| the implicit escape-time gradient is refused.
inline constexpr double gradient_tangential_tolerance = 1e-8;

//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//
enum class DomainKind
{
    UnitBall,
    Ball,
    Ellipsoid,
    Custom,
};

std::string to_string(DomainKind kind);

//! Point (x, omega, E) in phase space.
struct PhasePoint
{
    Vec3 x;
    Vec3 omega;
    double energy = 0;
};

enum class BoundaryKind
{
    Inflow,
    Outflow,
    Tangential,
};

std::string to_string(BoundaryKind kind);

//! Classification of a boundary direction together with omega . nu.
struct BoundaryClass
{
    BoundaryKind kind;
    double dot;
};

/*!
 * Strictly convex domain {r(x) < 0} described by a smooth level function.
 *
 * Balls and ellipsoids use r(x) = sum_i ((x_i - c_i) / a_i)^2 - 1. Custom
 * domains supply their own level function, gradient, diameter, bounding box
 * and a bound on |grad r| over the closure (used for boundary distances).
 */
class ConvexDomain
{
  public:
    using LevelFn = std::function<double(Vec3 const&)>;
    using GradientFn = std::function<Vec3(Vec3 const&)>;

    static ConvexDomain unit_ball();
    static ConvexDomain ball(Vec3 center, double radius);
    static ConvexDomain ellipsoid(Vec3 center, Vec3 semi_axes);
    static ConvexDomain custom(LevelFn level,
                               GradientFn gradient,
                               double diameter,
                               Vec3 bbox_lo,
                               Vec3 bbox_hi,
                               Vec3 center,
                               double gradient_bound);

    DomainKind kind() const { return kind_; }
    bool is_ball() const
    {
        return kind_ == DomainKind::UnitBall || kind_ == DomainKind::Ball;
    }
    Vec3 const& center() const { return center_; }
    Vec3 const& semi_axes() const { return semi_axes_; }
    double diameter() const { return diameter_; }
    Vec3 const& bbox_lo() const { return bbox_lo_; }
    Vec3 const& bbox_hi() const { return bbox_hi_; }

    double level(Vec3 const& x) const;
    Vec3 level_gradient(Vec3 const& x) const;

    bool on_boundary(Vec3 const& x) const
    {
        return std::abs(this->level(x)) <= boundary_tolerance;
    }
    bool contains(Vec3 const& x) const
    {
        return this->level(x) <= boundary_tolerance;
    }

    //! Distance to the boundary: exact for balls, a lower bound otherwise.
    double boundary_distance(Vec3 const& x) const;

    //! Analytic volume for balls and ellipsoids (0 for custom domains).
    double volume() const;

  private:
    ConvexDomain() = default;

    DomainKind kind_ = DomainKind::UnitBall;
    Vec3 center_;
    Vec3 semi_axes_{1, 1, 1};
    double diameter_ = 2;
    Vec3 bbox_lo_{-1, -1, -1};
    Vec3 bbox_hi_{1, 1, 1};
    double gradient_bound_ = 2;
    LevelFn custom_level_;
    GradientFn custom_gradient_;
};

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//
//! Unit outward normal grad r / |grad r| at a boundary point.
Vec3 outward_normal(ConvexDomain const& domain, Vec3 const& y);

//! Inflow / outflow / tangential classification of (y, omega) on the boundary.
BoundaryClass
classify_boundary(ConvexDomain const& domain, Vec3 const& y, Vec3 const& omega);

/*!
 * Extended escape time: t(x, omega) for interior x, 0 on the inflow and
 * tangential boundary, tau_+ on the outflow boundary.
 *
 * Balls use the closed form; other domains use safeguarded Newton iteration
 * with bisection fallback on s -> r(x - s omega) bracketed in [0, diameter].
 */
double extended_escape_time(ConvexDomain const& domain,
                             Vec3 const& x,
                             Vec3 const& omega);

//! Root-finding escape time regardless of domain kind (same semantics).
double escape_time_root_find(ConvexDomain const& domain,
                             Vec3 const& x,
                             Vec3 const& omega);

//! Forward boundary-to-boundary time tau_-(y, omega) for inflow points.
double inflow_chord_length(ConvexDomain const& domain,
                           Vec3 const& y,
                           Vec3 const& omega);

//! Closed-form escape time on the closed unit ball (no gradient).
double ball_escape_time(Vec3 const& x, Vec3 const& omega);

struct BallEscape
{
    double time;
    Vec3 gradient;
};

/*!
 * Closed-form escape time and its spatial gradient on the unit ball.
 *
 * Throws GradientUndefinedOnBoundary when the square-root argument falls
 * below 1e-14.
 */
BallEscape ball_escape_closed_form(Vec3 const& x, Vec3 const& omega);

/*!
 * Spatial gradient of the escape time at an interior point.
 *
 * Balls use the closed form (rescaled); other domains use implicit
 * differentiation of r(x - t omega) = 0. Near-tangential exits throw
 * GradientUnavailable.
 */
Vec3 escape_time_gradient(ConvexDomain const& domain,
                          Vec3 const& x,
                          Vec3 const& omega);

struct InflowPoint
{
    Vec3 y;
    double s;
};

//! Trace the characteristic backwards to its inflow boundary point.
InflowPoint backtrack_to_inflow(ConvexDomain const& domain,
                                Vec3 const& x,
                                Vec3 const& omega);

//! Minimum extended escape time over a set of phase points.
double support_margin(ConvexDomain const& domain,
                      std::span<PhasePoint const> points);

}  // namespace cbt
