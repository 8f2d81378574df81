// SPDX-License-Identifier: Apache-2.0
#include "cbt/catalog.hh"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cbt/error.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "cli";
using nlohmann::json;

[[noreturn]] void config_error(std::string const& key, std::string const& what)
{
    throw Error(ErrorCode::ConfigError, module_name, "'" + key + "': " + what);
}

double number(json const& spec, char const* key, double fallback)
{
    if (!spec.contains(key))
        return fallback;
    if (!spec[key].is_number())
        config_error(key, "expected a number");
    return spec[key].get<double>();
}

double required_number(json const& spec, char const* key)
{
    if (!spec.contains(key))
        config_error(key, "missing");
    return number(spec, key, 0);
}

Vec3 vector3(json const& spec, char const* key, Vec3 fallback)
{
    if (!spec.contains(key))
        return fallback;
    auto const& v = spec[key];
    if (!v.is_array() || v.size() != 3)
        config_error(key, "expected three numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i)
    {
        if (!v[i].is_number())
            config_error(key, "expected three numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

std::vector<double> coefficients(json const& spec, char const* key)
{
    if (!spec.contains(key))
        return {1.0};
    auto const& v = spec[key];
    if (!v.is_array() || v.empty())
        config_error(key, "expected a nonempty list of coefficients");
    std::vector<double> out;
    for (auto const& c : v)
    {
        if (!c.is_number())
            config_error(key, "expected numeric coefficients");
        out.push_back(c.get<double>());
    }
    return out;
}

double horner(std::vector<double> const& c, double t)
{
    double v = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        v = v * t + *it;
    return v;
}

std::string type_of(json const& spec)
{
    if (!spec.is_object())
        config_error("type", "expected an object with a type key");
    if (!spec.contains("type") || !spec["type"].is_string())
        config_error("type", "missing");
    return spec["type"].get<std::string>();
}
}  // namespace

double smooth_bump(double s)
{
    double const q = s * s;
    if (q >= 1)
        return 0;
    return std::exp(1 - 1 / (1 - q));
}

double smooth_plateau(double s, double inner, double outer)
{
    if (s <= inner)
        return 1;
    if (s >= outer)
        return 0;
    double const u = (s - inner) / (outer - inner);
    auto phi = [](double v) { return v > 0 ? std::exp(-1 / v) : 0.0; };
    return phi(1 - u) / (phi(1 - u) + phi(u));
}

//---------------------------------------------------------------------------//
PhaseFn make_field(json const& spec)
{
    std::string const type = type_of(spec);
    if (type == "constant")
    {
        double const v = required_number(spec, "value");
        return [v](Vec3 const&, Vec3 const&, double) { return v; };
    }
    if (type == "polynomial")
    {
        auto const cx = coefficients(spec, "x");
        auto const cy = coefficients(spec, "y");
        auto const cz = coefficients(spec, "z");
        auto const ce = coefficients(spec, "energy");
        double const scale = number(spec, "scale", 1.0);
        return [=](Vec3 const& x, Vec3 const&, double e) {
            return scale * horner(cx, x[0]) * horner(cy, x[1]) * horner(cz, x[2]) * horner(ce, e);
        };
    }
    if (type == "radial_bump" || type == "plateau")
    {
        double const amplitude = number(spec, "amplitude", 1.0);
        Vec3 const center = vector3(spec, "center", {});
        auto const ce = coefficients(spec, "energy");
        Vec3 const dir = vector3(spec, "direction", {});
        double r0 = 0;
        double r1 = 0;
        if (type == "radial_bump")
        {
            r1 = required_number(spec, "radius");
        }
        else
        {
            r0 = required_number(spec, "inner");
            r1 = required_number(spec, "outer");
            if (!(r1 > r0))
                config_error("outer", "must exceed inner");
        }
        if (!(r1 > 0))
            config_error(type == "radial_bump" ? "radius" : "outer", "must be positive");
        bool const bump = type == "radial_bump";
        return [=](Vec3 const& x, Vec3 const& w, double e) {
            double const r = norm(x - center);
            double const profile = bump ? smooth_bump(r / r1) : smooth_plateau(r, r0, r1);
            return amplitude * profile * horner(ce, e) * (1 + dot(dir, w));
        };
    }
    config_error("type", "unknown field type '" + type + "'");
}

KernelFn make_kernel(json const& spec)
{
    std::string const type = type_of(spec);
    if (type == "none")
        return {};
    if (type != "isotropic" && type != "linear_anisotropic")
        config_error("type", "unknown kernel type '" + type + "'");
    double const strength = required_number(spec, "strength");
    if (strength < 0)
        config_error("strength", "must be nonnegative");
    double const mu = type == "isotropic" ? 0.0 : number(spec, "anisotropy", 0.0);
    if (std::abs(mu) > 1)
        config_error("anisotropy", "must lie in [-1, 1] for a nonnegative kernel");
    PhaseFn profile;
    if (spec.contains("profile"))
        profile = make_field(spec["profile"]);
    double const c = strength / (4 * std::numbers::pi);
    return [=](Vec3 const& x, Vec3 const& wp, Vec3 const& w, double e) {
        double const p = profile ? profile(x, w, e) : 1.0;
        return c * p * (1 + mu * dot(w, wp));
    };
}

StoppingFn make_stopping(json const& spec)
{
    std::string const type = type_of(spec);
    if (type == "constant")
    {
        double const v = required_number(spec, "value");
        return [v](Vec3 const&, double) { return v; };
    }
    if (type == "linear")
    {
        double const v = required_number(spec, "value");
        double const slope = number(spec, "slope", 0.0);
        return [v, slope](Vec3 const&, double e) { return v + slope * e; };
    }
    config_error("type", "unknown stopping type '" + type + "'");
}

ConvexDomain make_domain(json const& spec)
{
    std::string const kind = spec.is_object() && spec.contains("kind") && spec["kind"].is_string()
                                 ? spec["kind"].get<std::string>()
                                 : std::string();
    if (kind == "unit_ball")
        return ConvexDomain::unit_ball();
    if (kind == "ball")
    {
        double const r = required_number(spec, "radius");
        if (!(r > 0))
            config_error("radius", "must be positive");
        return ConvexDomain::ball(vector3(spec, "center", {}), r);
    }
    if (kind == "ellipsoid")
    {
        Vec3 const axes = vector3(spec, "semi_axes", {1, 1, 1});
        if (!(axes[0] > 0 && axes[1] > 0 && axes[2] > 0))
            config_error("semi_axes", "must be positive");
        return ConvexDomain::ellipsoid(vector3(spec, "center", {}), axes);
    }
    config_error("domain.kind", "expected unit_ball, ball or ellipsoid");
}

CoefficientSet make_coefficients(json const& spec)
{
    CoefficientSet c;
    json const sigma = spec.contains("sigma") ? spec["sigma"] : json{{"type", "constant"}, {"value", 0.0}};
    c.sigma_t = make_field(sigma);
    if (type_of(sigma) == "constant")
        c.sigma_constant = required_number(sigma, "value");
    if (spec.contains("scatter"))
        c.scatter = make_kernel(spec["scatter"]);
    if (spec.contains("stopping"))
    {
        c.stopping = make_stopping(spec["stopping"]);
        auto const& s = spec["stopping"];
        double fallback = 0;
        if (type_of(s) == "constant")
            fallback = -required_number(s, "value");
        c.kappa = number(spec, "kappa", fallback);
    }
    c.shift = number(spec, "shift", 0.0);
    if (c.shift < 0)
        config_error("shift", "must be nonnegative");
    return c;
}

}  // namespace cbt
