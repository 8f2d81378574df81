// SPDX-License-Identifier: Apache-2.0
#include "cbt/attenuation.hh"

#include <array>
#include <cmath>
#include <memory>
#include <sstream>

#include "cbt/error.hh"
#include "cbt/norms.hh"
#include "cbt/parallel.hh"
#include "ray_rule.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "attenuation_solver";

std::string describe(MultiIndex const& a)
{
    std::ostringstream os;
    os << '(' << a[0] << ',' << a[1] << ',' << a[2] << ')';
    return os.str();
}
}  // namespace

//---------------------------------------------------------------------------//
double solve_attenuation(PhaseFn const& f,
                         CoefficientSet const& coeffs,
                         ConvexDomain const& domain,
                         PhasePoint const& p,
                         RayQuadrature const& quad)
{
    double const t = extended_escape_time(domain, p.x, p.omega);
    if (!(t > 0))
        return 0;
    detail::RayRule const rule(quad);
    double const c = coeffs.shift;
    auto source = [&](double s) { return f(p.x - s * p.omega, p.omega, p.energy); };
    if (coeffs.sigma_constant)
    {
        double const total = *coeffs.sigma_constant + c;
        return rule.integrate(t, [](double) { return 0.0; }, source, &total);
    }
    auto sigma = [&](double s) {
        return coeffs.sigma_t(p.x - s * p.omega, p.omega, p.energy) + c;
    };
    return rule.integrate(t, sigma, source, nullptr);
}

//---------------------------------------------------------------------------//
Vec3 solve_attenuation_gradient(PhaseFn const& f,
                                PhaseGradFn const& grad_f,
                                CoefficientSet const& coeffs,
                                PhaseGradFn const& grad_sigma,
                                ConvexDomain const& domain,
                                PhasePoint const& p,
                                RayQuadrature const& quad,
                                bool inflow_vanishing)
{
    double const t = extended_escape_time(domain, p.x, p.omega);
    if (!(t > 0))
        return {};
    if (!coeffs.sigma_constant && !grad_sigma)
    {
        throw Error(ErrorCode::InvalidArgument, module_name,
                    "variable attenuation needs its spatial gradient");
    }
    detail::RayRule const rule(quad);
    int const n = rule.size();
    auto const& xi = rule.xi();
    auto const& w = rule.w();
    double const c = coeffs.shift;
    double const base = 1.0 / quad.panels_per_unit_length;

    // h1 + h2 accumulate along the ray; depth and g carry the nested integrals
    Vec3 h12;
    double depth = 0;
    Vec3 g_acc;
    double s0 = 0;
    int panel = 0;
    while (s0 < t)
    {
        double len = quad.fixed_panels > 0 ? t / quad.fixed_panels : std::min(base, t - s0);
        if (quad.fixed_panels > 0 && panel == quad.fixed_panels)
            break;
        double sig[8];
        Vec3 dsig[8];
        for (int j = 0; j < n; ++j)
        {
            Vec3 const y = p.x - (s0 + len * xi[j]) * p.omega;
            sig[j] = coeffs.sigma(y, p.omega, p.energy) + c;
            dsig[j] = coeffs.sigma_constant ? Vec3{} : grad_sigma(y, p.omega, p.energy);
        }
        double panel_depth = 0;
        Vec3 panel_g;
        for (int k = 0; k < n; ++k)
        {
            double tau = depth;
            Vec3 gk = g_acc;
            for (int j = 0; j < n; ++j)
            {
                tau += len * rule.s(k, j) * sig[j];
                gk += (len * rule.s(k, j)) * dsig[j];
            }
            Vec3 const y = p.x - (s0 + len * xi[k]) * p.omega;
            double const fy = f(y, p.omega, p.energy);
            Vec3 const dfy = grad_f(y, p.omega, p.energy);
            h12 += (len * w[k] * std::exp(-tau)) * (dfy - fy * gk);
            panel_depth += w[k] * sig[k];
            panel_g += w[k] * dsig[k];
        }
        depth += len * panel_depth;
        g_acc += len * panel_g;
        s0 += len;
        ++panel;
        if (quad.fixed_panels <= 0 && t - s0 <= 1e-14 * t)
            break;
    }
    if (inflow_vanishing)
        return h12;

    Vec3 const y = p.x - t * p.omega;
    double const fy = f(y, p.omega, p.energy);
    if (fy == 0)
        return h12;
    Vec3 const dt = escape_time_gradient(domain, p.x, p.omega);
    return h12 + (std::exp(-depth) * fy) * dt;
}

//---------------------------------------------------------------------------//
DiscreteField
transport_sweep(GridPtr const& grid, RayQuadrature const& quad, SweepTerms const& terms)
{
    auto const& g = *grid;
    DiscreteField out(grid, terms.with_trace);
    detail::RayRule const rule(quad);
    auto const& domain = g.domain();
    auto const& dirs = g.sphere().directions;
    std::size_t const nd = dirs.size();
    std::size_t const ne = g.energy_count();
    std::size_t const block = g.block_size();

    std::optional<LatticeInterpolator> interp;
    if (terms.lattice_source)
        interp.emplace(g, terms.interpolation_order);
    double const* lattice = terms.lattice_source ? terms.lattice_source->data() : nullptr;

    auto solve_point = [&](Vec3 const& x, double* dest, LatticeStencil& st) {
        for (std::size_t d = 0; d < nd; ++d)
        {
            Vec3 const& omega = dirs[d];
            double const t = extended_escape_time(domain, x, omega);
            for (std::size_t e = 0; e < ne; ++e)
            {
                if (!(t > 0))
                {
                    dest[e * nd + d] = 0;
                    continue;
                }
                auto sigma = [&](double s) { return terms.sigma(x - s * omega, omega, e); };
                auto source = [&](double s) {
                    Vec3 const y = x - s * omega;
                    double v = terms.source ? terms.source(y, omega, e) : 0.0;
                    if (lattice)
                    {
                        interp->stencil(y, st);
                        double acc = 0;
                        std::size_t const b = e * nd + d;
                        for (int i = 0; i < st.count; ++i)
                            acc += st.weight[i] * lattice[st.node[i] * block + b];
                        if (terms.lattice_weight)
                            acc *= terms.lattice_weight(y, e);
                        v += acc;
                    }
                    return v;
                };
                double const* sc = terms.sigma_constant ? &*terms.sigma_constant : nullptr;
                dest[e * nd + d] = rule.integrate(t, sigma, source, sc);
            }
        }
    };

    if (terms.with_nodes)
    {
        parallel_for(g.node_count(), [&](std::size_t n0, std::size_t n1) {
            auto st = std::make_unique<LatticeStencil>();
            for (std::size_t n = n0; n < n1; ++n)
                solve_point(g.position(n), out.values().data() + n * block, *st);
        });
    }
    if (terms.with_trace)
    {
        auto const& surf = g.surface();
        parallel_for(surf.size(), [&](std::size_t s0, std::size_t s1) {
            auto st = std::make_unique<LatticeStencil>();
            for (std::size_t s = s0; s < s1; ++s)
                solve_point(surf.points[s], out.trace().data() + s * block, *st);
        });
    }
    return out;
}

DiscreteField solve_attenuation_field(PhaseFn const& f,
                                      CoefficientSet const& coeffs,
                                      GridPtr const& grid,
                                      RayQuadrature const& quad,
                                      bool with_trace)
{
    auto const& energies = grid->energy().nodes;
    SweepTerms terms;
    double const c = coeffs.shift;
    if (coeffs.sigma_constant)
        terms.sigma_constant = *coeffs.sigma_constant + c;
    terms.sigma = [&](Vec3 const& x, Vec3 const& w, std::size_t e) {
        return coeffs.sigma(x, w, energies[e]) + c;
    };
    terms.source = [&](Vec3 const& x, Vec3 const& w, std::size_t e) {
        return f(x, w, energies[e]);
    };
    terms.with_trace = with_trace;
    return transport_sweep(grid, quad, terms);
}

//---------------------------------------------------------------------------//
PhaseFn derivative_source(DerivativeTable const& f_derivs,
                          DerivativeTable const& sigma_derivs,
                          DerivativeTable const& psi_derivs,
                          MultiIndex const& alpha)
{
    auto require = [](DerivativeTable const& table, MultiIndex const& a, char const* what) {
        auto it = table.find(a);
        if (it == table.end() || !it->second)
        {
            throw Error(ErrorCode::MissingDerivative, module_name,
                        std::string(what) + " derivative " + describe(a) + " is missing");
        }
        return it->second;
    };

    struct Term
    {
        double coefficient;
        PhaseFn sigma;
        PhaseFn psi;
    };
    PhaseFn const base = require(f_derivs, alpha, "source");
    std::vector<Term> terms;
    for (auto const& beta : multi_indices(order_of(alpha)))
    {
        if (!dominated(beta, alpha) || beta == alpha)
            continue;
        MultiIndex const diff{alpha[0] - beta[0], alpha[1] - beta[1], alpha[2] - beta[2]};
        terms.push_back({binomial(alpha, beta),
                         require(sigma_derivs, diff, "attenuation"),
                         require(psi_derivs, beta, "solution")});
    }
    return [base, terms](Vec3 const& x, Vec3 const& w, double e) {
        double v = base(x, w, e);
        for (auto const& t : terms)
            v -= t.coefficient * t.sigma(x, w, e) * t.psi(x, w, e);
        return v;
    };
}

//---------------------------------------------------------------------------//
AccretivityResult
accretivity_functional(DiscreteField const& psi, CoefficientSet const& coeffs, int m)
{
    if (m < 0 || m > 2)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "accretivity order " + std::to_string(m) + " outside [0, 2]");
    }
    auto const margin = h0_margin(psi);
    if (!margin.pass)
    {
        throw Error(ErrorCode::NotInH0, module_name,
                    "field does not vanish near the inflow boundary (eta = "
                        + std::to_string(margin.eta) + ")");
    }
    auto const& g = psi.grid();
    std::size_t const block = g.block_size();
    std::size_t const nd = g.direction_count();
    std::size_t const ne = g.energy_count();
    auto const& dirs = g.sphere().directions;
    auto const& energies = g.energy().nodes;
    auto const& u = psi.values();

    std::array<std::vector<double>, 3> grad;
    for (int a = 0; a < 3; ++a)
        grad[a] = lattice_difference(g, u, block, a);
    std::vector<double> transport(u.size());
    parallel_for(g.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
        {
            for (std::size_t e = 0; e < ne; ++e)
            {
                for (std::size_t d = 0; d < nd; ++d)
                {
                    std::size_t const i = (n * ne + e) * nd + d;
                    Vec3 const& w = dirs[d];
                    double const sig = coeffs.sigma(g.position(n), w, energies[e]);
                    transport[i] = w[0] * grad[0][i] + w[1] * grad[1][i] + w[2] * grad[2][i]
                                   + (sig + coeffs.shift) * u[i];
                }
            }
        }
    });

    auto const du = lattice_derivatives(g, u, block, m);
    auto const dt = lattice_derivatives(g, transport, block, m);
    AccretivityResult r;
    for (std::size_t k = 0; k < du.size(); ++k)
    {
        r.lhs += lattice_inner(g, dt[k], du[k]);
        r.norm_squared += lattice_inner(g, du[k], du[k]);
    }
    double const sigma_norm = sup_norm_estimate(coeffs.sigma_fn(), m, g);
    r.c_prime = leibniz_constant(m) * sigma_norm;
    r.rhs_bound = (coeffs.shift - r.c_prime) * r.norm_squared;
    double const b = boundary_h_norm(psi, m, TraceSide::Outflow);
    r.boundary_term = 0.5 * b * b;
    return r;
}

}  // namespace cbt
