// SPDX-License-Identifier: Apache-2.0
#include "cbt/report.hh"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace cbt
{
namespace
{
// JSON has no representation for inf or nan
nlohmann::json number(double v)
{
    if (std::isfinite(v))
        return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}
}  // namespace

void RunReport::add(std::string name, bool pass, double value, double tolerance)
{
    properties.push_back({std::move(name), pass, value, tolerance});
}

bool RunReport::passed() const
{
    if (!error.empty())
        return false;
    for (auto const& p : properties)
    {
        if (!p.pass)
            return false;
    }
    return true;
}

nlohmann::json RunReport::to_json(bool with_timings) const
{
    nlohmann::json j;
    j["schema_version"] = report_schema_version;
    j["kind"] = kind;
    j["seed"] = seed;
    j["scenario"] = scenario;
    j["grid"] = grid;
    j["norms"] = norms;
    j["residuals"] = residuals;
    j["iterations"] = iterations;
    auto props = nlohmann::json::array();
    for (auto const& p : properties)
    {
        props.push_back({{"name", p.name},
                         {"pass", p.pass},
                         {"value", number(p.value)},
                         {"tolerance", number(p.tolerance)}});
    }
    j["properties"] = props;
    j["passed"] = this->passed();
    if (!error.empty())
        j["error"] = error;
    if (with_timings)
    {
        auto t = nlohmann::json::object();
        for (auto const& [stage, seconds] : timings)
            t[stage] = seconds;
        j["timings"] = t;
    }
    return j;
}

std::string RunReport::to_text() const
{
    std::ostringstream os;
    os << "run: " << kind << "  seed " << seed << '\n';
    if (!grid.empty())
        os << "grid: " << grid.dump() << '\n';
    for (auto const& [name, value] : norms.items())
        os << "norm " << name << " = " << value.dump() << '\n';
    for (auto const& [name, value] : residuals.items())
        os << "residual " << name << " = " << value.dump() << '\n';
    for (auto const& it : iterations)
    {
        os << "iteration " << it.value("label", std::string("solve")) << ": "
           << it.value("iterations", 0) << " sweeps, rate " << it.value("estimated_rate", 0.0) << '\n';
    }
    os << std::setprecision(6);
    for (auto const& p : properties)
    {
        os << (p.pass ? "PASS " : "FAIL ") << p.name << "  value " << p.value << "  tol "
           << p.tolerance << '\n';
    }
    if (!error.empty())
        os << "ERROR " << error << '\n';
    for (auto const& [stage, seconds] : timings)
        os << "time " << stage << " " << seconds << " s\n";
    os << (this->passed() ? "result: pass" : "result: fail") << '\n';
    return os.str();
}

nlohmann::json to_json(IterationReport const& r)
{
    auto hist = nlohmann::json::array();
    for (double v : r.residual_history)
        hist.push_back(number(v));
    return {{"iterations", r.iterations},
            {"residual_history", hist},
            {"converged", r.converged},
            {"estimated_rate", number(r.estimated_rate)}};
}

nlohmann::json grid_metadata(GridSpec const& grid)
{
    auto const& o = grid.options();
    return {{"h", grid.h()},
            {"nodes", grid.node_count()},
            {"nodes_per_axis", o.nodes_per_axis},
            {"n_theta", o.n_theta},
            {"n_phi", o.n_phi},
            {"n_energy", grid.energy_count()},
            {"energy", {grid.energy().interval.e0, grid.energy().interval.em}},
            {"surface_points", grid.surface_count()}};
}

}  // namespace cbt
