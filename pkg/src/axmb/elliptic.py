"""Stream-function recovery of the meridional velocity.

The Stokes stream function psi satisfies

    d_minus(psi) = d_rr psi - (1/r) d_r psi + d_zz psi = -r^2 Omega,
    psi(R) = 0,  psi even across the axis,  periodic in z,

with u_r = -(1/r) d_z psi and u_z = (1/r) d_r psi.  Solving for psi itself
is degenerate at the innermost cell (the mirror ghost annihilates the
radial stencil there), so the solver works in chi = psi / r^2, for which

    d_minus(r^2 chi) = r^2 * d_plus(chi)

turns the problem into d_plus(chi) = -Omega: a clean tridiagonal-in-r
five-point system after a discrete Fourier transform in the periodic z
direction.  chi is even and finite on the axis and inherits the
Dirichlet-0 wall from psi.

Velocities are built from corner values of psi = (jp*dr)^2 * chi_corner:

    r*u_r(face jp, cell k) = -(psic[jp,k+1] - psic[jp,k]) / dz
    u_z(cell j, face k)    =  (psic[j+1,k] - psic[j,k]) / (r_j dr)

The corner field is exactly zero along the axis and the wall, so no mass
crosses either, and the discrete divergence telescopes to rounding level
for any input.  Centered averages of the face values provide the
cell-center velocities used by the diagnostics.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .grid import (DIRICHLET0, EVEN, NEUMANN0, ODD, Grid, ScalarField)


class StreamSolver:
    """Factorized d_plus(chi) = -Omega solver for one grid.

    The z direction is diagonalized by a real FFT; each mode leaves a
    fixed real tridiagonal system in r whose LU sweep is precomputed.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        Nr, Nz = grid.Nr, grid.Nz
        dr, dz = grid.dr, grid.dz
        r = grid.r_centers
        sub = 1.0 / dr**2 - 3.0 / (2.0 * r * dr)      # coefficient of chi[j-1]
        sup = 1.0 / dr**2 + 3.0 / (2.0 * r * dr)      # coefficient of chi[j+1]
        diag = np.full(Nr, -2.0 / dr**2)
        diag[0] += sub[0]        # mirror-even axis ghost
        diag[-1] -= sup[-1]      # Dirichlet-0 wall ghost
        modes = np.arange(Nz // 2 + 1)
        lam = -(4.0 / dz**2) * np.sin(np.pi * modes / Nz) ** 2
        self._sub = sub
        self._cp = np.empty((Nr, lam.size))
        self._inv_den = np.empty((Nr, lam.size))
        _kernels.tridiag_factor(sub, diag, sup, lam, self._cp, self._inv_den)

    def solve_chi(self, omega_values: np.ndarray) -> np.ndarray:
        """chi = psi / r^2 for the azimuthal-vorticity-over-r source."""
        rhs = np.fft.rfft(-omega_values, axis=1)
        x = np.empty_like(rhs)
        _kernels.tridiag_solve(self._sub, self._cp, self._inv_den, rhs, x)
        return np.fft.irfft(x, n=self.grid.Nz, axis=1)


def solve_stream(Omega: ScalarField, grid: Grid) -> ScalarField:
    """Stream function psi with d_minus(psi) = -r^2 Omega and psi(R) = 0.

    Raises if the direct solve leaves a residual above the contract
    1e-10 * (max|r^2 Omega| + 1), which only happens on corrupt input.
    """
    chi = StreamSolver(grid).solve_chi(Omega.values)
    psi = grid.r_col**2 * chi
    res = residual_stream(psi, Omega.values, grid)
    scale = np.abs(grid.r_col**2 * Omega.values).max() + 1.0
    if res > 1e-10 * scale:
        raise RuntimeError(f"stream solve residual {res:.3e} exceeds contract")
    return ScalarField(psi, EVEN, DIRICHLET0)


def residual_stream(psi: np.ndarray, omega_values: np.ndarray, grid: Grid) -> float:
    """Max-norm residual of the five-point system the solver inverts,
    r^2 * d_plus(psi / r^2) + r^2 * Omega."""
    chi = psi / grid.r_col**2
    lhs = np.empty_like(chi)
    _kernels.second_order_op(chi, grid.r_centers, grid.dr, grid.dz, 3.0,
                             _kernels.WALL_DIRICHLET, lhs)
    return float(np.abs(grid.r_col**2 * (lhs + omega_values)).max())


def corner_stream(chi_values: np.ndarray, grid: Grid,
                  wall: str = DIRICHLET0) -> np.ndarray:
    """psi at cell corners, (Nr+1, Nz), from chi = psi/r^2 at centers."""
    chic = np.empty((grid.Nr + 1, grid.Nz))
    if wall == DIRICHLET0:
        _kernels.corner_interp(np.ascontiguousarray(chi_values), chic)
    else:
        _kernels.corner_interp_neumann(np.ascontiguousarray(chi_values), chic)
    return grid.r_faces[:, None] ** 2 * chic


def face_velocity(psic: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """(mr, uzf): r*u_r on radial faces and u_z on z faces."""
    mr = np.empty((grid.Nr + 1, grid.Nz))
    uzf = np.empty((grid.Nr, grid.Nz))
    _kernels.staggered_velocity(psic, grid.r_centers, grid.dr, grid.dz, mr, uzf)
    return mr, uzf


def center_velocity(mr: np.ndarray, uzf: np.ndarray, grid: Grid
                    ) -> tuple[ScalarField, ScalarField]:
    ur = np.empty(grid.shape)
    uz = np.empty(grid.shape)
    _kernels.center_velocity(mr, uzf, grid.dr, ur, uz)
    return ScalarField(ur, ODD, DIRICHLET0), ScalarField(uz, EVEN, NEUMANN0)


def velocity_from_stream(psi: ScalarField, grid: Grid
                         ) -> tuple[ScalarField, ScalarField]:
    """Cell-center (u_r, u_z) from a stream function.

    The staggered construction keeps the discrete cylindrical divergence at
    rounding level for any psi; the wall corner row follows psi.boundary
    (a Dirichlet-0 psi gives exactly zero wall flux).
    """
    mr, uzf = stagger_from_stream(psi, grid)
    return center_velocity(mr, uzf, grid)


def stagger_from_stream(psi: ScalarField, grid: Grid
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Staggered (mr, uzf) for a stream function given at cell centers."""
    chi = psi.values / grid.r_col**2
    psic = corner_stream(chi, grid, wall=psi.boundary)
    return face_velocity(psic, grid)


def max_divergence(mr: np.ndarray, uzf: np.ndarray, grid: Grid) -> float:
    """Max |discrete divergence| at the staggered locations."""
    out = np.empty(grid.shape)
    _kernels.divergence(mr, uzf, grid.r_centers, grid.dr, grid.dz, out)
    return float(np.abs(out).max())
