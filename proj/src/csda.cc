// SPDX-License-Identifier: Apache-2.0
#include "cbt/csda.hh"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "cbt/error.hh"
#include "cbt/parallel.hh"
#include "ray_rule.hh"
#include "source_iteration.hh"

namespace cbt
{
namespace
{
constexpr char const module_name[] = "csda_solver";

void require_stopping(CoefficientSet const& coeffs)
{
    if (!coeffs.has_stopping())
        throw Error(ErrorCode::InvalidArgument, module_name, "stopping coefficient a is required");
    if (!(coeffs.kappa > 0))
    {
        throw Error(ErrorCode::StoppingPowerViolation, module_name,
                    "kappa must be positive, got " + std::to_string(coeffs.kappa));
    }
}

void check_stopping(CoefficientSet const& coeffs, GridSpec const& grid, double energy)
{
    double const worst = -parallel_max(grid.node_count(), [&](std::size_t n) {
        return coeffs.stopping(grid.position(n), energy);
    });
    if (worst < coeffs.kappa)
    {
        throw Error(ErrorCode::StoppingPowerViolation, module_name,
                    "-a = " + std::to_string(worst) + " below kappa = " + std::to_string(coeffs.kappa)
                        + " at E = " + std::to_string(energy));
    }
}

DiscreteField flip(DiscreteField const& in, double c, double sign)
{
    auto const& g = in.grid();
    DiscreteField out(in.grid_ptr(), in.has_trace());
    std::size_t const ne = g.energy_count();
    std::size_t const nd = g.direction_count();
    auto const& nodes = g.energy().nodes;
    double const em = g.energy().interval.em;
    auto copy = [&](std::vector<double> const& src, std::vector<double>& dst, std::size_t points) {
        for (std::size_t p = 0; p < points; ++p)
        {
            for (std::size_t k = 0; k < ne; ++k)
            {
                std::size_t const from = ne - 1 - k;
                // Slot k of phi sits at E' = Em - E_{from}; psi slot k at E_k
                double const eprime = sign > 0 ? em - nodes[from] : em - nodes[k];
                double const w = std::exp(sign * c * eprime);
                for (std::size_t d = 0; d < nd; ++d)
                    dst[(p * ne + k) * nd + d] = w * src[(p * ne + from) * nd + d];
            }
        }
    };
    copy(in.values(), out.values(), g.node_count());
    if (in.has_trace())
        copy(in.trace(), out.trace(), g.surface_count());
    return out;
}
}  // namespace

//---------------------------------------------------------------------------//
double csda_shift_threshold(CoefficientSet const& coeffs, int m, GridSpec const& grid)
{
    require_stopping(coeffs);
    auto const& energies = grid.energy().nodes;
    double const kappa = coeffs.kappa;

    double grad_a = 0;
    std::vector<double> a(grid.node_count());
    for (double e : energies)
    {
        for (std::size_t n = 0; n < a.size(); ++n)
            a[n] = coeffs.stopping(grid.position(n), e);
        std::array<std::vector<double>, 3> d;
        for (int axis = 0; axis < 3; ++axis)
            d[axis] = lattice_difference(grid, a, 1, axis);
        for (std::size_t n = 0; n < a.size(); ++n)
        {
            if (grid.depth(n) > grid.h())
                grad_a = std::max(grad_a, std::hypot(d[0][n], d[1][n], d[2][n]));
        }
    }
    PhaseFn const ratio = [&coeffs](Vec3 const& x, Vec3 const& w, double e) {
        return coeffs.sigma(x, w, e) / coeffs.stopping(x, e);
    };
    double const sigma_part = leibniz_constant(m) * sup_norm_estimate(ratio, m, grid);
    double const scatter_part = scatter_norm_bound(coeffs.scatter, m, grid) / kappa;
    return grad_a / (2 * kappa * kappa) + sigma_part + scatter_part;
}

DiscreteField energy_transform(DiscreteField const& psi, double c)
{
    return flip(psi, c, 1.0);
}

DiscreteField inverse_energy_transform(DiscreteField const& phi, double c)
{
    return flip(phi, c, -1.0);
}

//---------------------------------------------------------------------------//
namespace
{
//! Backward characteristic of a lattice node or trace point on fixed panels.
struct Line
{
    Vec3 x;
    std::uint32_t dir = 0;
    std::uint32_t panels = 0;
    double len = 0;
    std::size_t offset = 0;
};

/*!
 * Characteristic lines of every lattice node and outflow trace point.
 *
 * phi_n is kept at the panel nodes of each line between energy steps, so
 * the b / dE phi_n term of a step is integrated along the same line
 * without re-interpolation.
 */
class LineSet
{
  public:
    LineSet(GridSpec const& g, detail::RayRule const& rule, double max_len) : rule_(rule)
    {
        auto const& dirs = g.sphere().directions;
        std::size_t const nd = dirs.size();
        std::size_t offset = 0;
        auto add = [&](Vec3 const& x, std::size_t d, double t) {
            Line l;
            l.x = x;
            l.dir = static_cast<std::uint32_t>(d);
            if (t > 0)
            {
                l.panels = static_cast<std::uint32_t>(std::ceil(t / max_len - 1e-12));
                l.len = t / l.panels;
            }
            l.offset = offset;
            offset += static_cast<std::size_t>(l.panels) * rule.size();
            lines_.push_back(l);
        };
        for (std::size_t n = 0; n < g.node_count(); ++n)
            for (std::size_t d = 0; d < nd; ++d)
                add(g.position(n), d, extended_escape_time(g.domain(), g.position(n), dirs[d]));
        auto const& surf = g.surface();
        for (std::size_t s = 0; s < surf.size(); ++s)
            for (std::size_t d = 0; d < nd; ++d)
                add(surf.points[s], d, extended_escape_time(g.domain(), surf.points[s], dirs[d]));
        size_ = offset;
    }

    std::size_t size() const { return size_; }
    std::vector<Line> const& lines() const { return lines_; }

    /*!
     * Solve -du/ds + sig u = q on [0, t] with u(t) = 0 from the inflow end.
     *
     * eval(y, i) returns {sig, q} at line node i located at y. Returns u(0).
     */
    template<class Eval>
    double sweep(Line const& l, Vec3 const& w, Eval&& eval, double* u) const
    {
        int const n = rule_.size();
        auto const& xi = rule_.xi();
        auto const& wt = rule_.w();
        double sig[8];
        double h[8];
        double tau[8];
        double carry = 0;
        for (int p = static_cast<int>(l.panels) - 1; p >= 0; --p)
        {
            double const a = p * l.len;
            std::size_t const base = l.offset + static_cast<std::size_t>(p) * n;
            double q[8];
            for (int j = 0; j < n; ++j)
            {
                auto const [sj, qj] = eval(l.x - (a + l.len * xi[j]) * w, base + j);
                sig[j] = sj;
                q[j] = qj;
            }
            double depth = 0;
            for (int k = 0; k < n; ++k)
            {
                double acc = 0;
                for (int j = 0; j < n; ++j)
                    acc += rule_.s(k, j) * sig[j];
                tau[k] = l.len * acc;
                depth += wt[k] * sig[k];
            }
            depth *= l.len;
            double total = 0;
            for (int j = 0; j < n; ++j)
            {
                h[j] = std::exp(-tau[j]) * q[j];
                total += wt[j] * h[j];
            }
            double const start = l.len * total + std::exp(-depth) * carry;
            for (int k = 0; k < n; ++k)
            {
                double partial = 0;
                for (int j = 0; j < n; ++j)
                    partial += rule_.s(k, j) * h[j];
                u[base + k] = std::exp(tau[k]) * (start - l.len * partial);
            }
            carry = start;
        }
        return carry;
    }

  private:
    detail::RayRule const& rule_;
    std::vector<Line> lines_;
    std::size_t size_ = 0;
};

//! Upper bound on Sigma + b (1 / dE + |C|) over lattice nodes and grid energies.
double attenuation_bound(CoefficientSet const& coeffs, GridSpec const& g, double de)
{
    auto const& dirs = g.sphere().directions;
    double bound = 0;
    for (double e : g.energy().nodes)
    {
        bound = std::max(bound, parallel_max(g.node_count(), [&](std::size_t n) {
            Vec3 const& x = g.position(n);
            double const b = -coeffs.stopping(x, e);
            double m = 0;
            for (auto const& w : dirs)
                m = std::max(m, std::abs(coeffs.sigma(x, w, e)));
            return m + std::abs(b) * (1 / de + std::abs(coeffs.shift));
        }));
    }
    return bound;
}
}  // namespace

DiscreteField march_energy(PhaseFn const& f,
                           CoefficientSet const& coeffs,
                           GridPtr const& grid,
                           CsdaOptions const& options)
{
    require_stopping(coeffs);
    auto const& g = *grid;
    auto const& egrid = g.energy();
    double const em = egrid.interval.em;
    double const c = coeffs.shift;
    for (double e : egrid.nodes)
        check_stopping(coeffs, g, e);
    if (options.check_shift)
    {
        double const threshold = csda_shift_threshold(coeffs, options.m, g);
        if (!(c > threshold))
        {
            throw Error(ErrorCode::ShiftTooSmall, module_name,
                        "shift C = " + std::to_string(c) + " does not exceed "
                            + std::to_string(threshold));
        }
    }
    double const target = options.energy_step > 0 ? options.energy_step : egrid.interval.width() / 64;

    std::size_t const ne = g.energy_count();
    std::size_t const nd = g.direction_count();
    std::size_t const nn = g.node_count();
    std::size_t const ns = g.surface_count();
    DiscreteField out(grid, true);

    // Flipped energies of the output slots, increasing from E' = Em - E_{N-1}
    std::vector<double> slots(ne);
    for (std::size_t k = 0; k < ne; ++k)
        slots[k] = em - egrid.nodes[ne - 1 - k];

    MarchState state{slots[0], 0.0, 0, DiscreteField(g.with_energy(EnergyGrid::uniform(egrid.interval, 1)), true)};
    auto const slice = state.phi.grid_ptr();
    if (slots[0] > 0)
    {
        throw Error(ErrorCode::InvalidArgument, module_name,
                    "energy grid must include the cut-off energy Em");
    }

    auto store = [&](std::size_t k) {
        for (std::size_t n = 0; n < nn; ++n)
            for (std::size_t d = 0; d < nd; ++d)
                out.at(n, k, d) = state.phi.at(n, 0, d);
        for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t d = 0; d < nd; ++d)
                out.trace_at(s, k, d) = state.phi.trace_at(s, 0, d);
    };
    store(0);

    // Panels resolve both the geometry and the optical depth of one step
    double smallest = target;
    for (std::size_t k = 1; k < ne; ++k)
    {
        double const span = slots[k] - slots[k - 1];
        smallest = std::min(smallest, span / std::max(1.0, std::ceil(span / target - 1e-9)));
    }
    detail::RayRule const rule(options.quad);
    double const max_len = std::min(1.0 / options.quad.panels_per_unit_length,
                                    options.quad.max_panel_optical_depth
                                        / std::max(attenuation_bound(coeffs, g, smallest), 1e-300));
    LineSet const lines(g, rule, max_len);
    auto const& all = lines.lines();
    auto const& dirs = g.sphere().directions;
    std::vector<double> u_old(lines.size(), 0.0);
    std::vector<double> u_new(lines.size(), 0.0);

    std::optional<LatticeInterpolator> interp;
    if (coeffs.scatter)
        interp.emplace(*slice, options.interpolation_order);
    std::vector<double> kphi;

    for (std::size_t k = 1; k < ne; ++k)
    {
        double const span = slots[k] - slots[k - 1];
        int const nsub = std::max(1, static_cast<int>(std::ceil(span / target - 1e-9)));
        double const de = span / nsub;
        for (int sub = 1; sub <= nsub; ++sub)
        {
            double const eprime = sub == nsub ? slots[k] : slots[k - 1] + sub * de;
            double const energy = em - eprime;
            check_stopping(coeffs, g, energy);
            double const weight = std::exp(c * eprime);

            std::optional<detail::LatticeScatter> scatter;
            if (coeffs.scatter)
            {
                scatter.emplace(*slice, [&](Vec3 const& x, Vec3 const& wp, Vec3 const& w, std::size_t) {
                    return coeffs.scatter(x, wp, w, energy);
                });
                kphi.assign(nn * nd, 0.0);
            }

            DiscreteField next(slice, true);
            IterationReport report;
            DiscreteField const* iterate = &state.phi;
            while (true)
            {
                if (scatter)
                    scatter->apply(iterate->values(), kphi);
                parallel_for(all.size(), [&](std::size_t l0, std::size_t l1) {
                    LatticeStencil st;
                    for (std::size_t li = l0; li < l1; ++li)
                    {
                        Line const& line = all[li];
                        Vec3 const& w = dirs[line.dir];
                        auto eval = [&](Vec3 const& y, std::size_t i) {
                            double const b = -coeffs.stopping(y, energy);
                            double q = weight * f(y, w, energy) + b / de * u_old[i];
                            if (interp)
                            {
                                interp->stencil(y, st);
                                for (int j = 0; j < st.count; ++j)
                                    q += st.weight[j] * kphi[st.node[j] * nd + line.dir];
                            }
                            return std::pair<double, double>{coeffs.sigma(y, w, energy) + b / de - b * c, q};
                        };
                        double const value = line.panels ? lines.sweep(line, w, eval, u_new.data()) : 0.0;
                        std::size_t const point = li / nd;
                        if (point < nn)
                            next.at(point, 0, line.dir) = value;
                        else
                            next.trace_at(point - nn, 0, line.dir) = value;
                    }
                });
                ++report.iterations;
                double const change = parallel_max(nn, [&](std::size_t n) {
                    double m = 0;
                    for (std::size_t d = 0; d < nd; ++d)
                        m = std::max(m, std::abs(next.at(n, 0, d) - iterate->at(n, 0, d)));
                    return m;
                });
                report.residual_history.push_back(change);
                if (!scatter || change < options.tol)
                    break;
                if (report.iterations >= options.max_iter)
                    throw IterationLimitError(module_name, report);
                state.phi = std::move(next);
                iterate = &state.phi;
                next = DiscreteField(slice, true);
            }
            std::swap(u_old, u_new);

            state.phi = std::move(next);
            state.e_current = eprime;
            state.step = de;
            ++state.index;
            if (options.on_step)
                options.on_step(state);
        }
        store(k);
    }
    return out;
}

DiscreteField solve_csda(PhaseFn const& f,
                         CoefficientSet const& coeffs,
                         GridPtr const& grid,
                         CsdaOptions const& options)
{
    return inverse_energy_transform(march_energy(f, coeffs, grid, options), coeffs.shift);
}

//---------------------------------------------------------------------------//
double explicit_csda(PhaseFn const& f,
                     double sigma,
                     ConvexDomain const& domain,
                     EnergyInterval const& interval,
                     PhasePoint const& p,
                     RayQuadrature const& quad)
{
    double const range = interval.em - p.energy;
    if (!(range > 0))
        return 0;
    double const length = std::min(range, extended_escape_time(domain, p.x, p.omega));
    if (!(length > 0))
        return 0;
    detail::RayRule const rule(quad);
    auto source = [&](double s) { return f(p.x - s * p.omega, p.omega, p.energy + s); };
    return rule.integrate(length, [](double) { return 0.0; }, source, &sigma);
}

//---------------------------------------------------------------------------//
CompatibilityReport compatibility_check(PhaseFn const& g,
                                        PhaseFn const& F,
                                        int order,
                                        CoefficientSet const& coeffs,
                                        GridSpec const& grid,
                                        double tol)
{
    if (order < 0 || order > 2)
    {
        throw Error(ErrorCode::OrderTooHigh, module_name,
                    "compatibility order " + std::to_string(order) + " outside [0, 2]");
    }
    std::size_t const needed = order == 0 ? 1 : static_cast<std::size_t>(order + 2);
    if (grid.energy_count() < needed)
    {
        throw Error(ErrorCode::InsufficientEnergyResolution, module_name,
                    "order " + std::to_string(order) + " needs " + std::to_string(needed)
                        + " energy nodes, grid has " + std::to_string(grid.energy_count()));
    }
    if (order == 2 && !coeffs.has_stopping())
        throw Error(ErrorCode::InvalidArgument, module_name, "second order needs the stopping coefficient");

    auto const& domain = grid.domain();
    auto const& surf = grid.surface();
    auto const& sphere = grid.sphere();
    double const em = grid.energy().interval.em;
    double const de = grid.energy().spacing();

    auto residual_at = [&](Vec3 const& y, Vec3 const& w) -> double {
        auto gk = [&](int k) { return g(y, w, em - k * de); };
        if (order == 0)
            return std::abs(gk(0));
        if (order == 1)
            return std::abs((3 * gk(0) - 4 * gk(1) + gk(2)) / (2 * de) - F(y, w, em));
        double const g2 = (2 * gk(0) - 5 * gk(1) + 4 * gk(2) - gk(3)) / (de * de);
        double const dF = (3 * F(y, w, em) - 4 * F(y, w, em - de) + F(y, w, em - 2 * de)) / (2 * de);
        // omega . grad F by a one-sided fourth-order difference into the domain
        double const chord = inflow_chord_length(domain, y, w);
        double const dx = std::min(1e-3, chord / 8);
        double fx[5];
        for (int i = 0; i < 5; ++i)
            fx[i] = F(y + (i * dx) * w, w, em);
        double const transport = (-25 * fx[0] + 48 * fx[1] - 36 * fx[2] + 16 * fx[3] - 3 * fx[4]) / (12 * dx);
        double const scatter = coeffs.scatter ? apply_scatter(coeffs.scatter, F, sphere, y, w, em) : 0.0;
        double const pf = -(transport + coeffs.sigma(y, w, em) * fx[0] - scatter) / coeffs.stopping(y, em);
        return std::abs(g2 - pf - dF);
    };

    double const residual = parallel_max(surf.size(), [&](std::size_t s) {
        double worst = 0;
        for (std::size_t d = 0; d < sphere.size(); ++d)
        {
            Vec3 const& w = sphere.directions[d];
            if (dot(w, surf.normals[s]) < -tangential_tolerance)
                worst = std::max(worst, residual_at(surf.points[s], w));
        }
        return worst;
    });
    return {order, residual, residual < tol};
}

}  // namespace cbt
