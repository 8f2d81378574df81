// SPDX-License-Identifier: Apache-2.0
// Python module cbt._core. Structured arguments travel as JSON text.
#include <optional>
#include <string>

#include <json.hpp>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cbt/attenuation.hh"
#include "cbt/catalog.hh"
#include "cbt/csda.hh"
#include "cbt/error.hh"
#include "cbt/geometry.hh"
#include "cbt/norms.hh"
#include "cbt/parallel.hh"
#include "cbt/scattering.hh"
#include "cbt/scenario.hh"

namespace py = pybind11;
using nlohmann::json;

namespace
{
using Triple = std::array<double, 3>;

cbt::Vec3 vec(Triple const& t)
{
    return {t[0], t[1], t[2]};
}

Triple triple(cbt::Vec3 const& v)
{
    return {v[0], v[1], v[2]};
}

json parse(std::string const& text)
{
    try
    {
        return json::parse(text);
    }
    catch (json::exception const& e)
    {
        throw cbt::Error(cbt::ErrorCode::ConfigError, "python", std::string("parse: ") + e.what());
    }
}

cbt::ConvexDomain domain_of(std::string const& text)
{
    return text.empty() ? cbt::ConvexDomain::unit_ball() : cbt::make_domain(parse(text));
}

double escape_time(Triple const& x, Triple const& w, std::string const& domain)
{
    return cbt::extended_escape_time(domain_of(domain), vec(x), vec(w));
}

Triple escape_gradient(Triple const& x, Triple const& w, std::string const& domain)
{
    return triple(cbt::escape_time_gradient(domain_of(domain), vec(x), vec(w)));
}

double attenuation_point(std::string const& source,
                         std::string const& coefficients,
                         Triple const& x,
                         Triple const& w,
                         double energy,
                         std::string const& domain,
                         std::string const& quadrature)
{
    auto const f = cbt::make_field(parse(source));
    auto const c = cbt::make_coefficients(parse(coefficients));
    return cbt::solve_attenuation(f, c, domain_of(domain), {vec(x), vec(w), energy},
                                  cbt::ray_quadrature(parse(quadrature)));
}

double explicit_csda_point(std::string const& source,
                           double sigma,
                           Triple const& x,
                           Triple const& w,
                           double energy,
                           std::pair<double, double> interval,
                           std::string const& domain)
{
    auto const f = cbt::make_field(parse(source));
    return cbt::explicit_csda(f, sigma, domain_of(domain), {interval.first, interval.second},
                              {vec(x), vec(w), energy});
}

double lift_point(std::string const& inflow, double lambda, Triple const& x, Triple const& w, double energy,
                  std::string const& domain)
{
    auto const g = cbt::make_field(parse(inflow));
    return cbt::lift_inflow(g, lambda, domain_of(domain), {vec(x), vec(w), energy}).value;
}

// Solve one steady problem on a lattice; returns positions, directions, energies and values.
py::dict solve_field(std::string const& config_text)
{
    json const config = parse(config_text);
    std::string const problem = config.value("problem", std::string("attenuation"));
    cbt::GridPtr grid;
    std::optional<cbt::DiscreteField> psi;
    {
        py::gil_scoped_release release;
        auto const domain = cbt::make_domain(config.value("domain", json{{"kind", "unit_ball"}}));
        grid = cbt::GridSpec::build(domain, cbt::grid_options(config.value("grid", json::object())));
        auto coeffs = cbt::make_coefficients(config.value("coefficients", json::object()));
        auto const f = cbt::make_field(config.value("source", json{{"type", "constant"}, {"value", 1.0}}));
        auto const quad = cbt::ray_quadrature(config.value("quadrature", json::object()));
        if (problem == "attenuation")
        {
            psi = cbt::solve_attenuation_field(f, coeffs, grid, quad);
        }
        else if (problem == "scattering")
        {
            cbt::ScatteringOptions o;
            o.quad = quad;
            if (!config.value("coefficients", json::object()).contains("shift"))
                coeffs.shift = cbt::shift_threshold(coeffs, 0, *grid) + 1;
            psi = cbt::solve_scattering(f, coeffs, grid, o).psi;
        }
        else if (problem == "csda")
        {
            cbt::CsdaOptions o;
            o.quad = quad;
            o.energy_step = config.value("energy_step", 0.0);
            if (!config.value("coefficients", json::object()).contains("shift"))
                coeffs.shift = cbt::csda_shift_threshold(coeffs, 0, *grid) + 1;
            psi = cbt::solve_csda(f, coeffs, grid, o);
        }
        else
        {
            throw cbt::Error(cbt::ErrorCode::ConfigError, "python",
                             "'problem': expected attenuation, scattering or csda");
        }
    }
    std::size_t const nn = grid->node_count();
    std::size_t const ne = grid->energy_count();
    std::size_t const nd = grid->direction_count();
    py::array_t<double> positions({nn, std::size_t{3}});
    py::array_t<double> directions({nd, std::size_t{3}});
    py::array_t<double> energies(ne);
    py::array_t<double> values({nn, ne, nd});
    auto p = positions.mutable_unchecked<2>();
    for (std::size_t n = 0; n < nn; ++n)
        for (int a = 0; a < 3; ++a)
            p(n, a) = grid->position(n)[a];
    auto d = directions.mutable_unchecked<2>();
    for (std::size_t k = 0; k < nd; ++k)
        for (int a = 0; a < 3; ++a)
            d(k, a) = grid->sphere().directions[k][a];
    auto e = energies.mutable_unchecked<1>();
    for (std::size_t k = 0; k < ne; ++k)
        e(k) = grid->energy().nodes[k];
    std::copy(psi->values().begin(), psi->values().end(), values.mutable_data());
    py::dict out;
    out["positions"] = positions;
    out["directions"] = directions;
    out["energies"] = energies;
    out["values"] = values;
    out["h"] = grid->h();
    return out;
}

std::string scenario(std::string const& config, std::uint64_t seed)
{
    return cbt::run_scenario(parse(config), seed).to_json(false).dump();
}

std::string verify(std::string const& suite, std::uint64_t seed)
{
    return cbt::run_verification_suite(suite, seed).to_json(false).dump();
}
}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Characteristic transport solvers";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result([&]() { return py::object(py::exception<cbt::Error>(m, "Error")); });
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (cbt::Error const& e)
        {
            py::object const& type = error_type.get_stored();
            std::string const code(cbt::to_string(e.code()));
            py::object exc = type(code + " [" + e.module() + "]: " + e.what());
            exc.attr("code") = code;
            exc.attr("module") = e.module();
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    m.def("set_threads", &cbt::set_thread_count, py::arg("count"));
    m.def("escape_time", &escape_time, py::arg("x"), py::arg("omega"), py::arg("domain") = "",
          "Extended escape time; domain is a JSON domain spec (default unit ball).");
    m.def("escape_time_gradient", &escape_gradient, py::arg("x"), py::arg("omega"), py::arg("domain") = "");
    m.def("solve_attenuation", &attenuation_point, py::arg("source"), py::arg("coefficients"), py::arg("x"),
          py::arg("omega"), py::arg("energy") = 0.0, py::arg("domain") = "", py::arg("quadrature") = "{}");
    m.def("explicit_csda", &explicit_csda_point, py::arg("source"), py::arg("sigma"), py::arg("x"), py::arg("omega"),
          py::arg("energy"), py::arg("interval") = std::pair<double, double>{0.0, 1.0}, py::arg("domain") = "");
    m.def("lift_inflow", &lift_point, py::arg("inflow"), py::arg("lam"), py::arg("x"), py::arg("omega"),
          py::arg("energy") = 0.0, py::arg("domain") = "");
    m.def("solve_field", &solve_field, py::arg("config"));
    m.def("run_scenario", &scenario, py::arg("config"), py::arg("seed") = 20240607,
          py::call_guard<py::gil_scoped_release>());
    m.def("run_verification_suite", &verify, py::arg("suite"), py::arg("seed") = 20240607,
          py::call_guard<py::gil_scoped_release>());
}
