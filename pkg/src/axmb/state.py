"""Evolved field set and the library of analytic initial conditions.

The solver evolves four scalars, all even across the axis:

    Gamma = r * u_theta     angular momentum, pure transport when mu = 0
    Omega = omega_theta / r
    H     = h_theta / r     swirl magnetic component over r
    rho                     buoyancy scalar

Gamma, Omega, H vanish at r = R (Dirichlet-0); rho has zero wall flux.
The meridional velocity is derived from Omega through the stream function
at every update, so a SimState always carries self-consistent (psi, u_r,
u_z) plus the staggered face data the advection scheme uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import elliptic
from .grid import (DIRICHLET0, EVEN, NEUMANN0, ODD, Grid, ScalarField,
                   ddr_values, ddz_values)

PROFILE_KINDS = ("swirl-bump", "magnetic-bump", "thermal-bump", "vortex-ring", "zero")

# profile kind admitted for each evolved field
_FIELD_KINDS = {
    "swirl": ("swirl-bump", "zero"),
    "magnetic": ("magnetic-bump", "zero"),
    "thermal": ("thermal-bump", "zero"),
    "vortex": ("vortex-ring", "zero"),
}

SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class InitialProfile:
    """Gaussian bump description for one evolved field."""

    kind: str
    amplitude: float = 0.0
    sigma: float = 0.25
    z_center: float = 0.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not self.sigma > 0.0:
            raise ValueError(f"profile width must be positive, got {self.sigma}")


def zero_profile() -> InitialProfile:
    return InitialProfile("zero", 0.0)


@dataclass(frozen=True)
class ProfileSet:
    swirl: InitialProfile
    magnetic: InitialProfile
    thermal: InitialProfile
    vortex: InitialProfile

    def __post_init__(self):
        for name in ("swirl", "magnetic", "thermal", "vortex"):
            prof = getattr(self, name)
            if prof.kind not in _FIELD_KINDS[name]:
                raise ValueError(
                    f"profile kind {prof.kind!r} cannot initialize the {name} field")


@dataclass
class SimState:
    """All fields of one time instant, sharing one grid.

    The staggered arrays (mr_face = r*u_r on radial faces, uz_face = u_z on
    z faces) and chi = psi/r^2 are carried alongside the cell-center fields
    because the advection scheme and the divergence diagnostic live on the
    staggered locations.
    """

    grid: Grid
    t: float
    mu: float
    Gamma: ScalarField
    Omega: ScalarField
    Hfield: ScalarField
    rho: ScalarField
    psi: ScalarField = field(default=None)  # type: ignore[assignment]
    ur: ScalarField = field(default=None)   # type: ignore[assignment]
    uz: ScalarField = field(default=None)   # type: ignore[assignment]
    chi: np.ndarray = field(default=None, repr=False)      # type: ignore[assignment]
    mr_face: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    uz_face: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _solver: elliptic.StreamSolver = field(default=None, repr=False)  # type: ignore[assignment]

    def solver(self) -> elliptic.StreamSolver:
        if self._solver is None:
            self._solver = elliptic.StreamSolver(self.grid)
        return self._solver

    def copy(self) -> "SimState":
        return SimState(self.grid, self.t, self.mu,
                        self.Gamma.copy(), self.Omega.copy(),
                        self.Hfield.copy(), self.rho.copy(),
                        self.psi.copy(), self.ur.copy(), self.uz.copy(),
                        self.chi.copy(), self.mr_face.copy(), self.uz_face.copy(),
                        self._solver)

    @property
    def primary_arrays(self) -> tuple[np.ndarray, ...]:
        return (self.Gamma.values, self.Omega.values,
                self.Hfield.values, self.rho.values)


def refresh_derived(state: SimState) -> SimState:
    """Restore the derived-field invariant: psi from Omega, then u from psi."""
    grid = state.grid
    chi = state.solver().solve_chi(state.Omega.values)
    psic = elliptic.corner_stream(chi, grid, wall=DIRICHLET0)
    mr, uzf = elliptic.face_velocity(psic, grid)
    ur, uz = elliptic.center_velocity(mr, uzf, grid)
    state.chi = chi
    state.psi = ScalarField(grid.r_col**2 * chi, EVEN, DIRICHLET0)
    state.mr_face, state.uz_face = mr, uzf
    state.ur, state.uz = ur, uz
    return state


def state_from_primaries(grid: Grid, t: float, mu: float,
                         gamma: np.ndarray, omega: np.ndarray,
                         hfield: np.ndarray, rho: np.ndarray,
                         solver: elliptic.StreamSolver | None = None) -> SimState:
    """Build a derived-consistent state; the arrays are adopted, not copied,
    so callers must pass distinct buffers."""
    state = SimState(grid, t, mu,
                     ScalarField(gamma, EVEN, DIRICHLET0),
                     ScalarField(omega, EVEN, DIRICHLET0),
                     ScalarField(hfield, EVEN, DIRICHLET0),
                     ScalarField(rho, EVEN, NEUMANN0),
                     _solver=solver)
    return refresh_derived(state)


def _bump(grid: Grid, prof: InitialProfile, radial_power: int) -> np.ndarray:
    rr, zz = grid.r_col, grid.z_centers[None, :]
    if prof.kind == "zero" or prof.amplitude == 0.0:
        return np.zeros(grid.shape)
    envelope = np.exp(-(rr**2 + (zz - prof.z_center) ** 2) / prof.sigma**2)
    return prof.amplitude * rr**radial_power * envelope


def _check_support(name: str, values: np.ndarray, tol: float = SUPPORT_TOL) -> None:
    peak = np.abs(values).max()
    if peak == 0.0:
        return
    wall = np.abs(values[-1, :]).max()
    seam = max(np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max())
    if wall > tol * peak:
        raise ValueError(
            f"initial {name} touches the wall r=R: {wall / peak:.2e} of peak "
            f"(limit {tol:.0e}); shrink sigma or enlarge R")
    if seam > tol * peak:
        raise ValueError(
            f"initial {name} touches the z-period seam: {seam / peak:.2e} of "
            f"peak (limit {tol:.0e}); recenter z_center or enlarge Lz")


def init_from_profiles(grid: Grid, profiles: ProfileSet, mu: float) -> SimState:
    """Initial SimState from analytic Gaussian bumps.

    Gamma_0 = A r^2 exp(-(r^2 + (z-z_c)^2)/sigma^2) for a swirl bump (so
    u_theta is A r exp(...), odd in r); H, rho and Omega take the plain
    Gaussian envelope.  Raises if any bump has not decayed below 1e-12 of
    its peak at the wall or the z-period seam.
    """
    if mu < 0.0:
        raise ValueError(f"viscosity must be nonnegative, got {mu}")
    gamma = _bump(grid, profiles.swirl, radial_power=2)
    hfield = _bump(grid, profiles.magnetic, radial_power=0)
    rho = _bump(grid, profiles.thermal, radial_power=0)
    omega = _bump(grid, profiles.vortex, radial_power=0)
    for name, arr in (("swirl", gamma), ("magnetic", hfield),
                      ("thermal", rho), ("vortex", omega)):
        _check_support(name, arr)
    return state_from_primaries(grid, 0.0, float(mu), gamma, omega, hfield, rho)


def derived_swirl(state: SimState) -> tuple[ScalarField, ScalarField]:
    """(u_theta, q) = (Gamma/r, Gamma/r^2), finite since r >= dr/2."""
    rr = state.grid.r_col
    u_theta = ScalarField(state.Gamma.values / rr, ODD, DIRICHLET0)
    q = ScalarField(state.Gamma.values / rr**2, EVEN, DIRICHLET0)
    return u_theta, q


def swirl_vorticity(state: SimState) -> tuple[ScalarField, ScalarField]:
    """Curl of the swirl velocity u_theta e_theta:

        omega_r = -d_z(Gamma)/r,   omega_z = d_r(Gamma)/r,

    the latter algebraically identical to d_r u_theta + u_theta/r.
    """
    grid = state.grid
    rr = grid.r_col
    g = state.Gamma
    omega_r = ScalarField(-ddz_values(g.values, grid) / rr, ODD, DIRICHLET0)
    omega_z = ScalarField(ddr_values(g.values, grid, g.parity, g.boundary) / rr,
                          EVEN, NEUMANN0)
    return omega_r, omega_z


def max_swirl_speed(amplitude: float, sigma: float) -> float:
    """Peak of u_theta = A r exp(-r^2/sigma^2) over r, at r = sigma/sqrt(2)."""
    return abs(amplitude) * sigma / math.sqrt(2.0) * math.exp(-0.5)
