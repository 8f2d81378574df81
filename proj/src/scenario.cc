// SPDX-License-Identifier: Apache-2.0
#include "cbt/scenario.hh"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "cbt/attenuation.hh"
#include "cbt/catalog.hh"
#include "cbt/csda.hh"
#include "cbt/error.hh"
#include "cbt/norms.hh"
#include "cbt/parallel.hh"
#include "cbt/scattering.hh"

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

void check_keys(json const& block, std::string const& name, std::set<std::string> const& allowed)
{
    if (!block.is_object())
        config_error(name, "expected an object");
    for (auto const& [key, value] : block.items())
    {
        if (!allowed.count(key))
            config_error(name.empty() ? key : name + "." + key, "unknown key");
    }
}

template<class T>
T value_or(json const& block, char const* key, T fallback, std::string const& name)
{
    if (!block.contains(key))
        return fallback;
    try
    {
        return block[key].get<T>();
    }
    catch (json::exception const&)
    {
        config_error(name + "." + key, "wrong type");
    }
}

class Stopwatch
{
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

GridOptions grid_options(json const& spec)
{
    check_keys(spec, "grid", {"nodes_per_axis", "n_theta", "n_phi", "n_energy", "energy"});
    GridOptions o;
    o.nodes_per_axis = value_or(spec, "nodes_per_axis", 17, "grid");
    o.n_theta = value_or(spec, "n_theta", 4, "grid");
    o.n_phi = value_or(spec, "n_phi", 8, "grid");
    o.n_energy = value_or(spec, "n_energy", 2, "grid");
    if (spec.contains("energy"))
    {
        auto const e = value_or(spec, "energy", std::vector<double>{}, "grid");
        if (e.size() != 2 || !(e[1] > e[0]) || e[0] < 0)
            config_error("grid.energy", "expected [E0, Em] with 0 <= E0 < Em");
        o.energy = {e[0], e[1]};
    }
    if (o.nodes_per_axis < 5 || o.nodes_per_axis > 129)
        config_error("grid.nodes_per_axis", "expected 5..129");
    if (o.n_theta < 1 || o.n_phi < 1 || o.n_energy < 1)
        config_error("grid", "quadrature counts must be positive");
    return o;
}

RayQuadrature ray_quadrature(json const& spec)
{
    check_keys(spec, "quadrature", {"panels_per_unit_length", "nodes_per_panel", "optical_cutoff"});
    RayQuadrature q;
    q.panels_per_unit_length = value_or(spec, "panels_per_unit_length", q.panels_per_unit_length, "quadrature");
    q.nodes_per_panel = value_or(spec, "nodes_per_panel", q.nodes_per_panel, "quadrature");
    q.optical_cutoff = value_or(spec, "optical_cutoff", q.optical_cutoff, "quadrature");
    if (q.panels_per_unit_length < 1 || q.nodes_per_panel < 1 || q.nodes_per_panel > 8)
        config_error("quadrature", "expected positive panel density and 1..8 nodes per panel");
    return q;
}

namespace
{
double inflow_trace_max(DiscreteField const& psi)
{
    if (!psi.has_trace())
        return 0;
    auto const tr = extract_trace(psi, TraceSide::Inflow);
    double m = 0;
    for (double v : tr.values)
        m = std::max(m, std::abs(v));
    return m;
}

double final_slice_max(DiscreteField const& psi)
{
    auto const& g = psi.grid();
    std::size_t const last = g.energy_count() - 1;
    double m = 0;
    for (std::size_t n = 0; n < g.node_count(); ++n)
        for (std::size_t d = 0; d < g.direction_count(); ++d)
            m = std::max(m, std::abs(psi.at(n, last, d)));
    return m;
}

void record_norms(RunReport& report, DiscreteField const& psi)
{
    report.norms["h0"] = h_norm(psi, {0, 0, 0});
    report.norms["h1"] = h_norm(psi, {1, 0, 0});
    if (psi.has_trace())
        report.norms["trace_outflow"] = trace_norm(extract_trace(psi, TraceSide::Outflow));
}

//! Relative lattice L^2 distance between a field and an oracle sampled on the grid.
double relative_l2(DiscreteField const& psi, std::vector<double> const& oracle)
{
    auto const& g = psi.grid();
    std::vector<double> diff(oracle.size());
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = psi.values()[i] - oracle[i];
    double const den = lattice_inner(g, oracle, oracle);
    double const num = lattice_inner(g, diff, diff);
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::vector<double> explicit_oracle(PhaseFn const& f, double sigma, GridSpec const& g, RayQuadrature const& q)
{
    std::vector<double> out(g.node_count() * g.block_size());
    auto const& dirs = g.sphere().directions;
    auto const& energies = g.energy().nodes;
    std::size_t const nd = dirs.size();
    std::size_t const ne = energies.size();
    parallel_for(g.node_count(), [&](std::size_t n0, std::size_t n1) {
        for (std::size_t n = n0; n < n1; ++n)
            for (std::size_t e = 0; e < ne; ++e)
                for (std::size_t d = 0; d < nd; ++d)
                    out[(n * ne + e) * nd + d] = explicit_csda(
                        f, sigma, g.domain(), g.energy().interval, {g.position(n), dirs[d], energies[e]}, q);
    });
    return out;
}

bool explicit_form(CoefficientSet const& c, GridSpec const& g)
{
    if (!c.sigma_constant || c.has_scatter() || !c.has_stopping())
        return false;
    for (double e : g.energy().nodes)
    {
        if (c.stopping(g.domain().center(), e) != -1.0)
            return false;
    }
    return true;
}
}  // namespace

//---------------------------------------------------------------------------//
RunReport run_scenario(json const& config, std::uint64_t seed, std::filesystem::path const& out_dir)
{
    check_keys(config, "",
               {"problem", "domain", "grid", "coefficients", "source", "inflow", "lambda", "quadrature",
                "iteration", "csda", "seed", "threads"});
    if (!config.contains("problem") || !config["problem"].is_string())
        config_error("problem", "missing");
    std::string const problem = config["problem"].get<std::string>();
    static std::set<std::string> const problems{"attenuation", "scattering", "scattering_with_inflow", "csda",
                                                "explicit_csda"};
    if (!problems.count(problem))
        config_error("problem", "unknown problem '" + problem + "'");

    ConvexDomain const domain = make_domain(config.value("domain", json{{"kind", "unit_ball"}}));
    GridOptions const gopts = grid_options(config.value("grid", json::object()));
    json const coeff_spec = config.value("coefficients", json::object());
    check_keys(coeff_spec, "coefficients", {"sigma", "scatter", "stopping", "kappa", "shift"});
    CoefficientSet coeffs = make_coefficients(coeff_spec);
    PhaseFn const f = make_field(config.value("source", json{{"type", "constant"}, {"value", 1.0}}));
    RayQuadrature const quad = ray_quadrature(config.value("quadrature", json::object()));
    json const it = config.value("iteration", json::object());
    check_keys(it, "iteration", {"tol", "max_iter", "m", "interpolation_order"});
    ScatteringOptions sopts;
    sopts.quad = quad;
    sopts.tol = value_or(it, "tol", sopts.tol, "iteration");
    sopts.max_iter = value_or(it, "max_iter", sopts.max_iter, "iteration");
    sopts.m = value_or(it, "m", sopts.m, "iteration");
    sopts.interpolation_order = value_or(it, "interpolation_order", sopts.interpolation_order, "iteration");
    json const cs = config.value("csda", json::object());
    check_keys(cs, "csda", {"energy_step", "halving_sweep"});
    PhaseFn g;
    if (problem == "scattering_with_inflow")
    {
        if (!config.contains("inflow"))
            config_error("inflow", "required for scattering_with_inflow");
        g = make_field(config["inflow"]);
    }
    double const lambda = value_or(config, "lambda", 0.0, "");
    if ((problem == "csda" || problem == "explicit_csda") && !coeffs.has_stopping())
        config_error("coefficients.stopping", "required for " + problem);

    RunReport report;
    report.kind = problem;
    report.scenario = config;
    report.seed = seed;
    Stopwatch total;
    std::optional<DiscreteField> field;
    try
    {
        Stopwatch setup;
        auto const grid = GridSpec::build(domain, gopts);
        report.grid = grid_metadata(*grid);
        report.timings.emplace_back("setup", setup.seconds());
        double const h = grid->h();

        if (problem == "attenuation")
        {
            Stopwatch solve;
            auto psi = solve_attenuation_field(f, coeffs, grid, quad);
            report.timings.emplace_back("solve", solve.seconds());
            report.add("inflow trace zero", inflow_trace_max(psi) == 0, inflow_trace_max(psi), 0);
            json const src = config.value("source", json{{"type", "constant"}, {"value", 1.0}});
            if (coeffs.sigma_constant && src.value("type", "") == "constant")
            {
                double const s = *coeffs.sigma_constant + coeffs.shift;
                double const fv = src.value("value", 1.0);
                double worst = 0;
                auto const& dirs = grid->sphere().directions;
                for (std::size_t n = 0; n < grid->node_count(); ++n)
                {
                    for (std::size_t d = 0; d < dirs.size(); ++d)
                    {
                        double const t = extended_escape_time(domain, grid->position(n), dirs[d]);
                        double const exact = s == 0 ? fv * t : fv * (1 - std::exp(-s * t)) / s;
                        for (std::size_t e = 0; e < grid->energy_count(); ++e)
                            worst = std::max(worst, std::abs(psi.at(n, e, d) - exact));
                    }
                }
                report.add("closed-form agreement", worst < 1e-8, worst, 1e-8);
            }
            field = std::move(psi);
        }
        else if (problem == "scattering" || problem == "scattering_with_inflow")
        {
            if (!coeff_spec.contains("shift"))
                coeffs.shift = shift_threshold(coeffs, sopts.m, *grid) + 1;
            Stopwatch solve;
            auto r = problem == "scattering" ? solve_scattering(f, coeffs, grid, sopts)
                                             : solve_with_inflow(f, g, coeffs, grid, sopts, lambda);
            report.timings.emplace_back("solve", solve.seconds());
            auto rep = to_json(r.report);
            rep["label"] = problem;
            report.iterations.push_back(rep);
            report.residuals["shift"] = coeffs.shift;
            report.residuals["threshold"] = r.threshold;
            report.add("converged", r.report.converged, r.report.residual_history.back(), sopts.tol);
            if (coeffs.has_scatter() && r.report.iterations > 2)
            {
                double const sigma_part = r.threshold - scatter_norm_bound(coeffs.scatter, sopts.m, *grid);
                double const bound = (r.threshold - sigma_part) / (coeffs.shift - sigma_part) + 0.05;
                report.add("contraction rate", r.report.estimated_rate <= bound, r.report.estimated_rate, bound);
            }
            if (problem == "scattering")
            {
                double const m = inflow_trace_max(r.psi);
                report.add("inflow trace zero", m < 1e-10, m, 1e-10);
            }
            else
            {
                auto const got = extract_trace(r.psi, TraceSide::Inflow);
                auto const want = sample_trace(g, *grid, TraceSide::Inflow);
                double worst = 0;
                for (std::size_t i = 0; i < got.size(); ++i)
                    worst = std::max(worst, std::abs(got.values[i] - want.values[i]));
                report.add("inflow trace matches data", worst < 2 * h, worst, 2 * h);
            }
            field = std::move(r.psi);
        }
        else if (problem == "csda")
        {
            if (!coeff_spec.contains("shift"))
                coeffs.shift = csda_shift_threshold(coeffs, sopts.m, *grid) + 1;
            CsdaOptions copts;
            copts.quad = quad;
            copts.tol = sopts.tol;
            copts.max_iter = sopts.max_iter;
            copts.m = sopts.m;
            copts.interpolation_order = sopts.interpolation_order;
            copts.energy_step = value_or(cs, "energy_step", 0.0, "csda");
            Stopwatch solve;
            auto psi = solve_csda(f, coeffs, grid, copts);
            report.timings.emplace_back("solve", solve.seconds());
            report.residuals["shift"] = coeffs.shift;
            double const fin = final_slice_max(psi);
            double const inflow = inflow_trace_max(psi);
            report.add("final energy slice zero", fin < 1e-12, fin, 1e-12);
            report.add("inflow trace zero", inflow < 1e-10, inflow, 1e-10);
            if (value_or(cs, "halving_sweep", false, "csda"))
            {
                if (!explicit_form(coeffs, *grid))
                    config_error("csda.halving_sweep", "needs a = -1, constant sigma and no scattering");
                double const de = copts.energy_step > 0 ? copts.energy_step : grid->energy().interval.width() / 64;
                auto const oracle = explicit_oracle(f, *coeffs.sigma_constant, *grid, quad);
                double const e1 = relative_l2(psi, oracle);
                copts.energy_step = de / 2;
                Stopwatch refine;
                auto const half = solve_csda(f, coeffs, grid, copts);
                report.timings.emplace_back("solve_half_step", refine.seconds());
                double const e2 = relative_l2(half, oracle);
                report.residuals["error_rows"] = json::array({{{"energy_step", de}, {"l2_error", e1}},
                                                              {{"energy_step", de / 2}, {"l2_error", e2}}});
                double const ratio = e1 > 0 ? e2 / e1 : 0;
                report.add("error within 3 dE", e1 <= 3 * de, e1, 3 * de);
                report.add("halving ratio", ratio >= 0.4 && ratio <= 0.6, ratio, 0.6);
            }
            field = std::move(psi);
        }
        else
        {
            if (!explicit_form(coeffs, *grid))
                config_error("coefficients", "explicit_csda needs a = -1, constant sigma and no scattering");
            Stopwatch solve;
            DiscreteField psi(grid, false);
            psi.values() = explicit_oracle(f, *coeffs.sigma_constant, *grid, quad);
            report.timings.emplace_back("solve", solve.seconds());
            double const fin = final_slice_max(psi);
            report.add("final energy slice zero", fin < 1e-12, fin, 1e-12);
            field = std::move(psi);
        }
        if (field)
            record_norms(report, *field);
    }
    catch (Error const& e)
    {
        if (e.code() == ErrorCode::ConfigError)
            throw;
        report.error = std::string(to_string(e.code())) + " [" + e.module() + "]: " + e.what();
    }
    report.timings.emplace_back("total", total.seconds());

    if (!out_dir.empty())
    {
        write_report(report, out_dir);
        if (field)
            write_slice_csv(*field, out_dir / "slice.csv");
    }
    return report;
}

//---------------------------------------------------------------------------//
void write_report(RunReport const& report, std::filesystem::path const& out_dir)
{
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "report.json") << report.to_json().dump(2) << '\n';
    std::ofstream(out_dir / "report.txt") << report.to_text();
}

void write_slice_csv(DiscreteField const& field, std::filesystem::path const& file)
{
    auto const& g = field.grid();
    std::ofstream os(file);
    os.precision(12);
    os << "x,y,z,omega_index,E,value\n";
    double const zc = g.domain().center()[2];
    for (std::size_t n = 0; n < g.node_count(); ++n)
    {
        Vec3 const& x = g.position(n);
        if (std::abs(x[2] - zc) > 0.5 * g.h())
            continue;
        for (std::size_t e = 0; e < g.energy_count(); ++e)
            for (std::size_t d = 0; d < g.direction_count(); ++d)
                os << x[0] << ',' << x[1] << ',' << x[2] << ',' << d << ',' << g.energy().nodes[e] << ','
                   << field.at(n, e, d) << '\n';
    }
}

}  // namespace cbt
