"""Vanishing-viscosity convergence study and its supporting machinery.

A reference run at mu = 0 and a ladder of runs at decreasing mu > 0 share
one grid, scheme and initial data.  The per-mu error is

    sup over the shared output times of
        ( |u_mu - u|_L2,  |h_mu - h|_L2,  |rho_mu - rho|_L2 )

computed by pointwise subtraction of co-located snapshots (u carries all
three components, h = r*H).  The expected first-order rate in mu is only
trusted where the error towers a factor ten above the discretization
floor, which is measured by re-running mu = 0 at doubled resolution and
restricting to the coarse cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import linregress

from .grid import Grid, build_grid, cyl_integral
from .state import SimState, state_from_primaries

FLOOR_FACTOR = 10.0


@dataclass(frozen=True)
class MuError:
    mu: float
    err_u: float
    err_h: float
    err_rho: float
    floor_ok: bool

    @property
    def total(self) -> float:
        return self.err_u + self.err_h + self.err_rho


@dataclass
class ExperimentResult:
    mu_values: list[float]          # strictly decreasing
    errors: list[MuError]
    slope: float                    # NaN when fewer than 3 points pass the floor
    intercept: float
    r_squared: float
    floor: float

    @property
    def floor_ok(self) -> bool:
        return all(e.floor_ok for e in self.errors)

    def table_rows(self) -> list[tuple]:
        return [(e.mu, e.err_u, e.err_h, e.err_rho, e.total, e.floor_ok)
                for e in self.errors]


def fit_loglog(points: list[tuple[float, float]]) -> tuple[float, float, float]:
    """Ordinary least squares on (log mu, log error).

    Returns (slope, intercept, r_squared); rejects non-positive data.
    """
    if len(points) < 2:
        raise ValueError("need at least 2 points for a log-log fit")
    mu = np.array([p[0] for p in points], dtype=float)
    err = np.array([p[1] for p in points], dtype=float)
    if np.any(mu <= 0.0) or np.any(err <= 0.0):
        raise ValueError("log-log fit requires positive values")
    res = linregress(np.log(mu), np.log(err))
    return float(res.slope), float(res.intercept), float(res.rvalue**2)


def _field_differences(a: SimState, b: SimState) -> tuple[float, float, float]:
    """(|u_a - u_b|_L2, |h_a - h_b|_L2, |rho_a - rho_b|_L2) on one grid."""
    grid = a.grid
    rr = grid.r_col
    du = ((a.ur.values - b.ur.values) ** 2
          + (a.Gamma.values / rr - b.Gamma.values / rr) ** 2
          + (a.uz.values - b.uz.values) ** 2)
    dh = (rr * (a.Hfield.values - b.Hfield.values)) ** 2
    drho = (a.rho.values - b.rho.values) ** 2
    return (math.sqrt(cyl_integral(du, grid)),
            math.sqrt(cyl_integral(dh, grid)),
            math.sqrt(cyl_integral(drho, grid)))


def _sup_differences(ref_states: list[SimState], states: list[SimState]
                     ) -> tuple[float, float, float]:
    if len(ref_states) != len(states):
        raise RuntimeError("runs produced different output grids")
    sup = [0.0, 0.0, 0.0]
    for sa, sb in zip(states, ref_states):
        d = _field_differences(sa, sb)
        sup = [max(s, v) for s, v in zip(sup, d)]
    return tuple(sup)  # type: ignore[return-value]


def restrict_state(fine: SimState, coarse_grid: Grid) -> SimState:
    """Average 2x2 fine cells onto the coarse grid and re-derive velocity."""
    def avg(arr: np.ndarray) -> np.ndarray:
        return 0.25 * (arr[::2, ::2] + arr[1::2, ::2]
                       + arr[::2, 1::2] + arr[1::2, 1::2])

    return state_from_primaries(coarse_grid, fine.t, fine.mu,
                                *(avg(a) for a in fine.primary_arrays))


def refinement_floor(config) -> float:
    """Discretization-error scale: sup-t difference between the mu = 0 run
    at the configured resolution and at doubled resolution (restricted to
    the coarse cells), in the same triple-sum metric as the mu errors."""
    from .dynamics import run

    if config.Nr % 2 or config.Nz % 2:
        raise ValueError("refinement_floor needs even Nr, Nz")
    base = replace(config, mu=0.0, snapshot_times=())
    fine_cfg = replace(base, Nr=2 * config.Nr, Nz=2 * config.Nz)
    coarse = run(base, keep_states=True)
    fine = run(fine_cfg, keep_states=True)
    coarse_grid = coarse.states[0].grid
    restricted = [restrict_state(s, coarse_grid) for s in fine.states]
    d = _sup_differences(coarse.states, restricted)
    return d[0] + d[1] + d[2]


def inviscid_limit(config, mu_list: list[float]) -> ExperimentResult:
    """Measure the convergence rate of the mu-viscous system to mu = 0.

    mu_list entries must be nonnegative; they are sorted into a strictly
    decreasing ladder (order of the input does not matter).  Entries that
    fail the floor gate are excluded from the slope fit; the fit needs at
    least three passing points, otherwise slope and r^2 are NaN.
    """
    from .dynamics import run

    mus = sorted({float(m) for m in mu_list}, reverse=True)
    if any(m < 0.0 for m in mus):
        raise ValueError("mu values must be nonnegative")
    if not mus:
        raise ValueError("empty mu list")

    base = replace(config, mu=0.0, snapshot_times=())
    ref = run(base, keep_states=True)
    floor = refinement_floor(config)

    errors: list[MuError] = []
    for mu in mus:
        states = run(replace(base, mu=mu), keep_states=True).states
        du, dh, drho = _sup_differences(ref.states, states)
        total = du + dh + drho
        errors.append(MuError(mu, du, dh, drho,
                              floor_ok=total >= FLOOR_FACTOR * floor))

    fit_points = [(e.mu, e.total) for e in errors
                  if e.floor_ok and e.mu > 0.0 and e.total > 0.0]
    if len(fit_points) >= 3:
        slope, intercept, r2 = fit_loglog(fit_points)
    else:
        slope = intercept = r2 = math.nan
    return ExperimentResult(mus, errors, slope, intercept, r2, floor)
