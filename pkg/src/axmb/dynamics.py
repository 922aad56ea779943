"""Right-hand side assembly, CFL control, SSP-RK3 stepping, run loop.

The evolved system (nu = kappa = 1, viscosity mu >= 0):

    dGamma/dt = -u.grad(Gamma)                          + mu * d_minus(Gamma)
    dOmega/dt = -u.grad(Omega) + d_z(q^2) - d_z(H^2)
                - (1/r) d_r(rho)                        + mu * d_plus(Omega)
    dH/dt     = -u.grad(H)                              + d_plus(H)
    drho/dt   = -u.grad(rho)                            + lap_cyl(rho)

with q = u_theta/r = Gamma/r^2.  Advection is flux-form on the staggered
face velocities (centered or donor-cell per the scheme), so a constant
field has zero tendency and every advective tendency integrates to zero.
The z-derivative sources are differentiated after squaring, preserving
their z-integral.  Diffusion of rho uses the zero-flux wall closure, so
the thermal mass integral is conserved to rounding.

Each Runge-Kutta stage re-solves the stream function, keeping the
staggered velocities exactly divergence-free throughout the step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels, elliptic
from .grid import Grid, ScalarField, cyl_integral, ddr_values, ddz_values
from .state import SimState, state_from_primaries

CFL_VELOCITY_FLOOR = 1e-14


@dataclass(frozen=True)
class SchemeConfig:
    advection: str = "centered2"       # centered2 | upwind1
    cfl_adv: float = 0.4
    cfl_diff: float = 0.2
    buoyancy: bool = True
    magnetic_source: bool = True
    swirl_source: bool = True

    def __post_init__(self):
        if self.advection not in ("centered2", "upwind1"):
            raise ValueError(f"unknown advection scheme {self.advection!r}")
        if not 0.0 < self.cfl_adv <= 1.0:
            raise ValueError(f"cfl_adv out of (0, 1]: {self.cfl_adv}")
        if not 0.0 < self.cfl_diff <= 0.5:
            raise ValueError(f"cfl_diff out of (0, 0.5]: {self.cfl_diff}")

    @property
    def upwind(self) -> bool:
        return self.advection == "upwind1"


def advect(f: ScalarField, ur: np.ndarray, uz: np.ndarray, grid: Grid,
           scheme: SchemeConfig) -> ScalarField:
    """Flux-form advection tendency -div(u f) for staggered (mr, uzf) faces.

    ur is r*u_r on the (Nr+1, Nz) radial faces, uz the (Nr, Nz) z-face
    axial velocity, as produced by the elliptic module.
    """
    out = np.empty(grid.shape)
    _kernels.advect(f.values, ur, uz, grid.r_centers, grid.dr, grid.dz,
                    scheme.upwind, out)
    return f.like(out)


def _stage_arrays(state: SimState, scheme: SchemeConfig, base: tuple | None,
                  ca: float, cb: float, dt_eff: float) -> tuple[np.ndarray, ...]:
    """out = ca*base + cb*state + dt_eff*L(state) for the four fields."""
    grid = state.grid
    outs = tuple(np.empty(grid.shape) for _ in range(4))
    if base is None:
        base = state.primary_arrays
    _kernels.fused_stage(*base, *state.primary_arrays,
                         state.mr_face, state.uz_face,
                         grid.r_centers, grid.dr, grid.dz, state.mu,
                         scheme.upwind,
                         1.0 if scheme.swirl_source else 0.0,
                         1.0 if scheme.magnetic_source else 0.0,
                         1.0 if scheme.buoyancy else 0.0,
                         ca, cb, dt_eff, *outs)
    return outs


def rhs(state: SimState, scheme: SchemeConfig
        ) -> tuple[ScalarField, ScalarField, ScalarField, ScalarField]:
    """Tendencies (dGamma, dOmega, dH, drho) for a derived-consistent state."""
    dg, do, dh, drho = _stage_arrays(state, scheme, None, 0.0, 0.0, 1.0)
    return (state.Gamma.like(dg), state.Omega.like(do),
            state.Hfield.like(dh), state.rho.like(drho))


def cfl_dt(state: SimState, grid: Grid, scheme: SchemeConfig) -> float:
    """dt = min(advective, diffusive) stability bound.

    The diffusive bound uses the unit magnetic/thermal diffusivities, so it
    is max(1, mu) that enters; the advective bound is guarded against the
    zero-velocity state by a fixed floor.
    """
    h = min(grid.dr, grid.dz)
    umax = max(float(np.abs(state.ur.values).max()),
               float(np.abs(state.uz.values).max()),
               float(np.abs(state.Gamma.values / grid.r_col).max()),
               CFL_VELOCITY_FLOOR)
    dt_adv = scheme.cfl_adv * h / umax
    dt_diff = scheme.cfl_diff * h * h / max(1.0, state.mu)
    return min(dt_adv, dt_diff)


def _check_finite(state: SimState) -> None:
    for name, arr in (("Gamma", state.Gamma.values), ("Omega", state.Omega.values),
                      ("H", state.Hfield.values), ("rho", state.rho.values)):
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(
                f"non-finite values in {name} at t = {state.t:.6g}")


def step(state: SimState, dt: float, scheme: SchemeConfig) -> SimState:
    """One three-stage strong-stability-preserving RK3 step (Shu-Osher form).

    The stream function and velocities are re-derived after every stage;
    aborts with the offending field name if anything goes non-finite.
    """
    grid, mu, solver = state.grid, state.mu, state.solver()
    base = state.primary_arrays
    # u1 = u + dt L(u)
    s1 = state_from_primaries(
        grid, state.t + dt, mu,
        *_stage_arrays(state, scheme, base, 0.0, 1.0, dt), solver=solver)
    # u2 = 3/4 u + 1/4 (u1 + dt L(u1))
    s2 = state_from_primaries(
        grid, state.t + 0.5 * dt, mu,
        *_stage_arrays(s1, scheme, base, 0.75, 0.25, 0.25 * dt), solver=solver)
    # u' = 1/3 u + 2/3 (u2 + dt L(u2))
    out = state_from_primaries(
        grid, state.t + dt, mu,
        *_stage_arrays(s2, scheme, base, 1.0 / 3.0, 2.0 / 3.0, (2.0 / 3.0) * dt),
        solver=solver)
    _check_finite(out)
    return out


@dataclass
class RunResult:
    records: list            # DiagnosticsRecord per output time
    snapshots: list[tuple[float, SimState]]   # states at requested times
    states: list[SimState] | None = None      # per-record states if kept


def run(config, keep_states: bool = False,
        on_record: Callable | None = None) -> RunResult:
    """Step the configured problem from t=0 to T with adaptive dt.

    config is duck-typed (io_cli.Config fits): it must provide grid
    parameters, a ProfileSet, SchemeConfig fields, mu, T, dt_out and
    snapshot_times.  A DiagnosticsRecord is emitted at t=0 and every
    dt_out; snapshots are captured at the requested times (the stepper
    lands on them exactly).  Deterministic for a fixed config.
    """
    from .diagnostics import SeriesBuilder   # local import to avoid a cycle
    from .state import init_from_profiles

    grid = config.make_grid()
    scheme = config.make_scheme()
    state = init_from_profiles(grid, config.make_profiles(), config.mu)

    T = float(config.T)
    dt_out = float(config.dt_out) if config.dt_out else (T if T > 0 else 1.0)
    snapshot_times = sorted(set(float(t) for t in config.snapshot_times))
    for t_snap in snapshot_times:
        if not 0.0 <= t_snap <= T:
            raise ValueError(f"snapshot time {t_snap} outside [0, {T}]")

    builder = SeriesBuilder(grid)
    records = [builder.sample(state, 0.0, div_max=_div(state, grid))]
    snapshots = [(0.0, state.copy())] if 0.0 in snapshot_times else []
    states = [state.copy()] if keep_states else None
    if on_record:
        on_record(records[0], state)

    n_out = 1
    next_out = min(n_out * dt_out, T)
    pending_snaps = [t for t in snapshot_times if t > 0.0]
    div_running = records[0].div_max

    while state.t < T - 1e-14 * max(T, 1.0):
        dt = cfl_dt(state, grid, scheme)
        t_event = next_out
        if pending_snaps and pending_snaps[0] < t_event:
            t_event = pending_snaps[0]
        dt = min(dt, t_event - state.t)
        state = step(state, dt, scheme)
        div_running = max(div_running, _div(state, grid))

        if pending_snaps and state.t >= pending_snaps[0] - 1e-12 * max(T, 1.0):
            snapshots.append((pending_snaps[0], state.copy()))
            pending_snaps.pop(0)
        if state.t >= next_out - 1e-12 * max(T, 1.0):
            rec = builder.sample(state, dt, div_max=div_running)
            records.append(rec)
            if keep_states:
                states.append(state.copy())
            if on_record:
                on_record(rec, state)
            div_running = 0.0
            n_out += 1
            next_out = min(n_out * dt_out, T)
    return RunResult(records, snapshots, states)


def _div(state: SimState, grid: Grid) -> float:
    scale = max(float(np.abs(state.ur.values).max()),
                float(np.abs(state.uz.values).max()), 1.0)
    return elliptic.max_divergence(state.mr_face, state.uz_face, grid) / scale


def thermal_mass(state: SimState) -> float:
    return cyl_integral(state.rho, state.grid)
