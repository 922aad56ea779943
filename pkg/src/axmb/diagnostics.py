"""Norms, criteria and inequality monitors evaluated on states and series.

Everything here is pure: nothing mutates the state.  The quantities follow
the reformulated variable set

    Omega = omega_theta/r,  J = omega_r/r,  N = (1/r) d_r rho,
    H = h_theta/r,          q = u_theta/r,

the swirl vorticity (omega_r, omega_z) = curl(u_theta e_theta), the
blow-up integrand max|curl(u_theta e_theta)|, the Yudovich norm
max(L2, L6), a Riesz-transform ratio |grad b|_p / |omega_theta|_p, an H^3
proxy (sum of squared cylindrical L2 norms of all mixed (d_r, d_z)
derivatives up to order 3 of u_r, u_theta, u_z, h_theta, rho), and the
energy balance

    d/dt 1/2(|u|^2 + |h|^2) = int(rho u_z) - |grad h|^2 - mu |grad u|^2,

whose residual is estimated per output interval with a trapezoid in time.
Gradient magnitudes of vector fields include the azimuthal curvature
terms (f/r for the e_r and e_theta components).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np

from .grid import (DIRICHLET0, EVEN, NEUMANN0, ODD, Grid, ScalarField,
                   cyl_integral, cyl_lp_norm, ddr_values, ddz_values)
from .state import SimState, derived_swirl, swirl_vorticity

SUPPORT_THRESHOLD = 1e-10
RIESZ_DENOM_FLOOR = 1e-14

CSV_COLUMNS = (
    "t", "dt", "l2_u", "l2_h", "l2_rho", "linf_rho", "linf_H", "l2_H",
    "linf_Gamma", "bkm_integrand", "bkm_integral", "linf_q",
    "half_linf_omega_z", "riesz_p2", "l2l6_Omega", "l2_J", "l2_N",
    "l2_gradH", "h3_proxy", "energy_residual", "div_max", "support_radius",
)


@dataclass
class DiagnosticsRecord:
    t: float
    dt: float
    l2_u: float
    l2_h: float
    l2_rho: float
    linf_rho: float
    linf_H: float
    l2_H: float
    linf_Gamma: float
    bkm_integrand: float
    bkm_integral: float
    linf_q: float
    half_linf_omega_z: float
    riesz_p2: float
    l2l6_Omega: float
    l2_J: float
    l2_N: float
    l2_gradH: float
    h3_proxy: float
    energy_residual: float
    div_max: float
    support_radius: float
    # monitored beyond the series columns (maximum-principle ledger)
    l4_H: float = math.nan
    l6_H: float = math.nan
    l4_rho: float = math.nan
    l6_rho: float = math.nan

    def csv_values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in CSV_COLUMNS)


RECORD_FIELDS = tuple(f.name for f in dataclass_fields(DiagnosticsRecord))


# ---------------------------------------------------------------------------
# pointwise quantities
# ---------------------------------------------------------------------------

def reformulated_quantities(state: SimState):
    """(Omega, J, N, (dH_dr, dH_dz)) per the reformulated variable set."""
    grid = state.grid
    rr = grid.r_col
    J = ScalarField(-ddz_values(state.Gamma.values, grid) / rr**2, EVEN, DIRICHLET0)
    drho = ddr_values(state.rho.values, grid, state.rho.parity, state.rho.boundary)
    N = ScalarField(drho / rr, EVEN, NEUMANN0)
    h = state.Hfield
    gradH = (ScalarField(ddr_values(h.values, grid, h.parity, h.boundary),
                         ODD, NEUMANN0),
             ScalarField(ddz_values(h.values, grid), EVEN, h.boundary))
    return state.Omega, J, N, gradH


def bkm_integrand(state: SimState) -> float:
    """max over the grid of |curl(u_theta e_theta)| = sqrt(omega_r^2 + omega_z^2)."""
    omega_r, omega_z = swirl_vorticity(state)
    return float(np.sqrt(omega_r.values**2 + omega_z.values**2).max())


def swirl_ratio_check(state: SimState, tol: float = 0.05
                      ) -> tuple[float, float, bool]:
    """Hardy-type swirl bound: max|u_theta/r| against half of max|omega_z|.

    tol covers discretization error; equality is attained by rigid rotation.
    """
    _, q = derived_swirl(state)
    _, omega_z = swirl_vorticity(state)
    lhs = float(np.abs(q.values).max())
    rhs = 0.5 * float(np.abs(omega_z.values).max())
    return lhs, rhs, lhs <= rhs * (1.0 + tol)


def riesz_ratio(state: SimState, p: float = 2.0) -> float:
    """|grad b|_Lp / |omega_theta|_Lp with grad b the four meridional
    derivatives; NaN (absent) when the denominator is below 1e-14."""
    if not (1.0 < p < math.inf):
        raise ValueError(f"riesz_ratio needs p in (1, inf), got {p}")
    grid = state.grid
    ur, uz = state.ur, state.uz
    comps = (
        ddr_values(ur.values, grid, ur.parity, ur.boundary),
        ddz_values(ur.values, grid),
        ddr_values(uz.values, grid, uz.parity, uz.boundary),
        ddz_values(uz.values, grid),
    )
    grad_mag = np.sqrt(sum(c * c for c in comps))
    omega_theta = grid.r_col * state.Omega.values
    denom = cyl_lp_norm(omega_theta, grid, p)
    if denom < RIESZ_DENOM_FLOOR:
        return math.nan
    return cyl_lp_norm(grad_mag, grid, p) / denom


def mixed_derivative(values: np.ndarray, grid: Grid, parity: str, boundary: str,
                     n_r: int, n_z: int) -> np.ndarray:
    """d_r^{n_r} d_z^{n_z} of a tagged field.

    The first radial derivative honours the wall tag; deeper ones fall back
    to the one-sided wall treatment (their trace at r=R is not constrained).
    """
    out = values
    par, bc = parity, boundary
    for _ in range(n_r):
        out = ddr_values(out, grid, par, bc)
        par = ODD if par == EVEN else EVEN
        bc = NEUMANN0
    for _ in range(n_z):
        out = ddz_values(out, grid)
    return out


def h3_proxy(state: SimState, order: int = 3) -> float:
    """Sum of squared cylindrical L2 norms of all mixed derivatives up to
    the given order of (u_r, u_theta, u_z, h_theta, rho).

    Equivalent to the squared H^3 norm up to axis-weight constants for
    axisymmetric fields; a proxy, not the Cartesian Sobolev norm.
    """
    grid = state.grid
    u_theta, _ = derived_swirl(state)
    h_theta = ScalarField(grid.r_col * state.Hfield.values, ODD, DIRICHLET0)
    total = 0.0
    for f in (state.ur, u_theta, state.uz, h_theta, state.rho):
        for n_r in range(order + 1):
            for n_z in range(order + 1 - n_r):
                d = mixed_derivative(f.values, grid, f.parity, f.boundary, n_r, n_z)
                total += float(np.sum(d * d * grid.cell_volumes))
    return total


def support_radius(state: SimState, threshold: float = SUPPORT_THRESHOLD) -> float:
    """Largest cell radius where any evolved field exceeds threshold times
    its own peak; 0 for an identically zero state."""
    out = 0.0
    r = state.grid.r_centers
    for arr in state.primary_arrays:
        peak = np.abs(arr).max()
        if peak == 0.0:
            continue
        rows = np.nonzero(np.abs(arr).max(axis=1) > threshold * peak)[0]
        if rows.size:
            out = max(out, float(r[rows[-1]]))
    return out


# ---------------------------------------------------------------------------
# energy balance
# ---------------------------------------------------------------------------

def _grad_sq_vector_component(f: ScalarField, grid: Grid, azimuthal_term: bool
                              ) -> np.ndarray:
    g2 = (ddr_values(f.values, grid, f.parity, f.boundary) ** 2
          + ddz_values(f.values, grid) ** 2)
    if azimuthal_term:
        g2 = g2 + (f.values / grid.r_col) ** 2
    return g2


def energy_terms(state: SimState) -> tuple[float, float]:
    """(E, S): kinetic+magnetic energy and its instantaneous balance rate.

    E = 1/2 (|u|^2 + |h|^2);  S = int(rho u_z) - |grad h|^2 - mu |grad u|^2,
    so that dE/dt = S for the continuum system.
    """
    grid = state.grid
    u_theta, _ = derived_swirl(state)
    h_theta = ScalarField(grid.r_col * state.Hfield.values, ODD, DIRICHLET0)
    usq = state.ur.values**2 + u_theta.values**2 + state.uz.values**2
    E = 0.5 * (cyl_integral(usq, grid) + cyl_integral(h_theta.values**2, grid))
    work = cyl_integral(state.rho.values * state.uz.values, grid)
    dh = cyl_integral(_grad_sq_vector_component(h_theta, grid, True), grid)
    du = (cyl_integral(_grad_sq_vector_component(state.ur, grid, True), grid)
          + cyl_integral(_grad_sq_vector_component(u_theta, grid, True), grid)
          + cyl_integral(_grad_sq_vector_component(state.uz, grid, False), grid))
    return E, work - dh - state.mu * du


# ---------------------------------------------------------------------------
# series assembly
# ---------------------------------------------------------------------------

class SeriesBuilder:
    """Accumulates the running blow-up integral and the energy residual
    while a run emits records."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self._prev: tuple[float, float, float, float] | None = None  # t, E, S, bkm
        self.bkm_integral = 0.0

    def sample(self, state: SimState, dt: float,
               div_max: float | None = None) -> DiagnosticsRecord:
        grid = self.grid
        if div_max is None:
            from . import elliptic
            scale = max(float(np.abs(state.ur.values).max()),
                        float(np.abs(state.uz.values).max()), 1.0)
            div_max = elliptic.max_divergence(state.mr_face, state.uz_face,
                                              grid) / scale

        u_theta, q = derived_swirl(state)
        _, omega_z = swirl_vorticity(state)
        Omega, J, N, (dHr, dHz) = reformulated_quantities(state)
        h_theta = grid.r_col * state.Hfield.values
        usq = state.ur.values**2 + u_theta.values**2 + state.uz.values**2

        E, S = energy_terms(state)
        bkm = bkm_integrand(state)
        if self._prev is None:
            residual = 0.0
        else:
            t0, E0, S0, bkm0 = self._prev
            span = state.t - t0
            residual = (E - E0) / span - 0.5 * (S + S0) if span > 0.0 else 0.0
            self.bkm_integral += 0.5 * (bkm + bkm0) * span
        self._prev = (state.t, E, S, bkm)

        rec = DiagnosticsRecord(
            t=state.t,
            dt=dt,
            l2_u=math.sqrt(cyl_integral(usq, grid)),
            l2_h=cyl_lp_norm(h_theta, grid, 2),
            l2_rho=cyl_lp_norm(state.rho, grid, 2),
            linf_rho=cyl_lp_norm(state.rho, grid, np.inf),
            linf_H=cyl_lp_norm(state.Hfield, grid, np.inf),
            l2_H=cyl_lp_norm(state.Hfield, grid, 2),
            linf_Gamma=cyl_lp_norm(state.Gamma, grid, np.inf),
            bkm_integrand=bkm,
            bkm_integral=self.bkm_integral,
            linf_q=float(np.abs(q.values).max()),
            half_linf_omega_z=0.5 * float(np.abs(omega_z.values).max()),
            riesz_p2=riesz_ratio(state, 2.0),
            l2l6_Omega=max(cyl_lp_norm(Omega, grid, 2), cyl_lp_norm(Omega, grid, 6)),
            l2_J=cyl_lp_norm(J, grid, 2),
            l2_N=cyl_lp_norm(N, grid, 2),
            l2_gradH=math.sqrt(cyl_integral(dHr.values**2 + dHz.values**2, grid)),
            h3_proxy=h3_proxy(state),
            energy_residual=residual,
            div_max=div_max,
            support_radius=support_radius(state),
            l4_H=cyl_lp_norm(state.Hfield, grid, 4),
            l6_H=cyl_lp_norm(state.Hfield, grid, 6),
            l4_rho=cyl_lp_norm(state.rho, grid, 4),
            l6_rho=cyl_lp_norm(state.rho, grid, 6),
        )
        return rec


def bkm_accumulate(series: list[DiagnosticsRecord]) -> float:
    """Trapezoidal time integral of the blow-up integrand over a series."""
    if len(series) < 2:
        return 0.0
    t = np.array([rec.t for rec in series])
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("series times must be strictly increasing")
    f = np.array([rec.bkm_integrand for rec in series])
    return float(np.trapezoid(f, t))


# ---------------------------------------------------------------------------
# energy / maximum-principle ledger
# ---------------------------------------------------------------------------

@dataclass
class LedgerReport:
    violations: list[str]
    max_lp_growth: float
    shape_ratio: float
    max_energy_residual: float

    @property
    def ok(self) -> bool:
        return not self.violations


_MONOTONE_COLUMNS = (
    ("linf_H", "|H|_inf"), ("l2_H", "|H|_2"), ("l4_H", "|H|_4"), ("l6_H", "|H|_6"),
    ("linf_rho", "|rho|_inf"), ("l2_rho", "|rho|_2"),
    ("l4_rho", "|rho|_4"), ("l6_rho", "|rho|_6"),
)


def energy_ledger(series: list[DiagnosticsRecord], lp_tol: float = 1e-10,
                  shape_factor: float = 2.0,
                  energy_tol: float | None = None) -> LedgerReport:
    """Check the fundamental estimates over a run.

    (a) every L^p norm of H and rho (p = 2, 4, 6, inf) non-increasing
        within lp_tol relative per record;
    (b) the quotient (|u|^2 + |h|^2)/(1+t)^2 never exceeds shape_factor
        times its maximum over the first tenth of the run (no invented
        growth constant is asserted, only the shape);
    (c) optionally, |energy_residual| below energy_tol at every record.

    Violations are reported; the caller decides what is fatal.
    """
    violations: list[str] = []
    max_growth = 0.0
    for attr, label in _MONOTONE_COLUMNS:
        vals = [getattr(rec, attr) for rec in series]
        for n in range(1, len(vals)):
            allowed = vals[n - 1] * (1.0 + lp_tol) + 1e-300
            if vals[n] > allowed:
                rel = (vals[n] - vals[n - 1]) / max(vals[n - 1], 1e-300)
                max_growth = max(max_growth, rel)
                violations.append(
                    f"{label} grew by {rel:.3e} rel at t={series[n].t:.6g}")
        if vals:
            max_growth = max(max_growth, 0.0)

    quotient = [(rec.l2_u**2 + rec.l2_h**2) / (1.0 + rec.t) ** 2 for rec in series]
    n_early = max(1, math.ceil(0.1 * len(quotient)))
    early = max(quotient[:n_early])
    peak = max(quotient)
    shape_ratio = peak / early if early > 0.0 else (0.0 if peak == 0.0 else math.inf)
    if shape_ratio > shape_factor:
        violations.append(
            f"energy quotient grew {shape_ratio:.3f}x over its early maximum")

    max_res = max((abs(rec.energy_residual) for rec in series), default=0.0)
    if energy_tol is not None and max_res > energy_tol:
        violations.append(
            f"max |energy residual| {max_res:.3e} exceeds {energy_tol:.3e}")
    return LedgerReport(violations, max_growth, shape_ratio, max_res)
