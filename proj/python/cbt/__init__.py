"""Characteristic transport solvers for linear Boltzmann problems on convex domains."""

import json

from . import _core
from ._core import Error, set_threads

__all__ = [
    "Error",
    "escape_time",
    "escape_time_gradient",
    "explicit_csda",
    "lift_inflow",
    "run_scenario",
    "set_threads",
    "solve_attenuation",
    "solve_field",
    "verify",
]


def _spec(value):
    if value is None:
        return ""
    return value if isinstance(value, str) else json.dumps(value)


def escape_time(x, omega, domain=None):
    return _core.escape_time(x, omega, _spec(domain))


def escape_time_gradient(x, omega, domain=None):
    return _core.escape_time_gradient(x, omega, _spec(domain))


def solve_attenuation(source, coefficients, x, omega, energy=0.0, domain=None, quadrature=None):
    return _core.solve_attenuation(
        _spec(source), _spec(coefficients), x, omega, energy, _spec(domain), _spec(quadrature) or "{}"
    )


def explicit_csda(source, sigma, x, omega, energy, interval=(0.0, 1.0), domain=None):
    return _core.explicit_csda(_spec(source), sigma, x, omega, energy, tuple(interval), _spec(domain))


def lift_inflow(inflow, lam, x, omega, energy=0.0, domain=None):
    return _core.lift_inflow(_spec(inflow), lam, x, omega, energy, _spec(domain))


def solve_field(config):
    """Solve on a lattice. values has shape (nodes, energies, directions)."""
    return _core.solve_field(_spec(config))


def run_scenario(config, seed=20240607):
    return json.loads(_core.run_scenario(_spec(config), seed))


def verify(suite, seed=20240607):
    return json.loads(_core.run_verification_suite(suite, seed))
