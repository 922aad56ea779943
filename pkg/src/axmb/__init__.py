"""Axisymmetric MHD-Boussinesq solver on a cylindrical (r, z) grid.

Evolves (Gamma, Omega, H, rho) = (r u_theta, omega_theta/r, h_theta/r,
buoyancy) with a stream-function meridional velocity, monitors the
single-component blow-up integrand and the fundamental energy and
maximum-principle estimates, and measures the vanishing-viscosity
convergence rate.
"""

from . import _tuning  # noqa: F401  (allocator setup, import for effect)
from .grid import (Grid, ScalarField, build_grid, constant_field, cyl_integral,
                   cyl_lp_norm, d_minus, d_plus, ddr, ddz, lap_cyl)
from .state import (InitialProfile, ProfileSet, SimState, derived_swirl,
                    init_from_profiles, swirl_vorticity, zero_profile)
from .elliptic import solve_stream, velocity_from_stream
from .dynamics import RunResult, SchemeConfig, advect, cfl_dt, rhs, run, step
from .diagnostics import (CSV_COLUMNS, DiagnosticsRecord, LedgerReport,
                          SeriesBuilder, bkm_accumulate, bkm_integrand,
                          energy_ledger, energy_terms, h3_proxy,
                          reformulated_quantities, riesz_ratio, support_radius,
                          swirl_ratio_check)
from .experiments import (ExperimentResult, MuError, fit_loglog,
                          inviscid_limit, refinement_floor)
from .io_cli import (Config, append_timeseries, cli_main, load_config,
                     parse_config, read_snapshot, read_timeseries,
                     serialize_config, write_snapshot)

__version__ = "0.1.0"

__all__ = [
    "Grid", "ScalarField", "build_grid", "constant_field", "cyl_integral",
    "cyl_lp_norm", "ddr", "ddz", "lap_cyl", "d_plus", "d_minus",
    "InitialProfile", "ProfileSet", "SimState", "init_from_profiles",
    "derived_swirl", "swirl_vorticity", "zero_profile",
    "solve_stream", "velocity_from_stream",
    "SchemeConfig", "advect", "rhs", "cfl_dt", "step", "run", "RunResult",
    "DiagnosticsRecord", "SeriesBuilder", "CSV_COLUMNS", "LedgerReport",
    "bkm_integrand", "bkm_accumulate", "swirl_ratio_check", "riesz_ratio",
    "reformulated_quantities", "h3_proxy", "energy_terms", "energy_ledger",
    "support_radius",
    "ExperimentResult", "MuError", "fit_loglog", "inviscid_limit",
    "refinement_floor",
    "Config", "parse_config", "serialize_config", "load_config",
    "write_snapshot", "read_snapshot", "append_timeseries", "read_timeseries",
    "cli_main",
]
