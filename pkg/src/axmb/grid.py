"""Cylindrical (r, z) cell-centered grid and discrete differential operators.

Geometry: axisymmetric fields f(r, z) sampled at cell centers

    r_j = (j + 1/2) * dr,  j = 0..Nr-1,   dr = R / Nr
    z_k = (k + 1/2) * dz,  k = 0..Nz-1,   dz = Lz / Nz

so no sample sits on the axis and every 1/r weight is finite.  The z
direction is periodic with period Lz.  Axis regularity enters purely
through mirror ghosts: an even field satisfies f(-r) = f(r), an odd one
f(-r) = -f(r).

Operators (all second-order centered in the interior):

    ddr, ddz      first derivatives
    lap_cyl       d_rr + (1/r) d_r + d_zz        (scalar Laplacian)
    d_plus        d_rr + (3/r) d_r + d_zz        (= Delta + (2/r) d_r)
    d_minus       d_rr - (1/r) d_r + d_zz        (= Delta - (2/r) d_r)

Wall r = R: a dirichlet0 field uses the linear ghost -f[-1] (zero at the
wall face); a neumann0 field uses one-sided second-order differences for
first derivatives and, in the second-order operators, a reflected ghost
f[-1] (zero wall flux, which keeps lap_cyl conservative).

Integration: midpoint rule with the cylindrical measure 2*pi*r dr dz, so
the cell volumes sum to pi R^2 Lz exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EVEN = "even"
ODD = "odd"
DIRICHLET0 = "dirichlet0"
NEUMANN0 = "neumann0"


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable cell-centered cylinder geometry."""

    Nr: int
    Nz: int
    R: float
    Lz: float
    dr: float = field(init=False)
    dz: float = field(init=False)
    r_centers: np.ndarray = field(init=False, repr=False)
    z_centers: np.ndarray = field(init=False, repr=False)
    r_faces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.Nr < 4 or self.Nz < 4:
            raise ValueError(f"grid too small: Nr={self.Nr}, Nz={self.Nz} (need >= 4)")
        if not (self.R > 0.0 and self.Lz > 0.0):
            raise ValueError(f"non-positive extent: R={self.R}, Lz={self.Lz}")
        dr = self.R / self.Nr
        dz = self.Lz / self.Nz
        object.__setattr__(self, "dr", dr)
        object.__setattr__(self, "dz", dz)
        object.__setattr__(self, "r_centers", (np.arange(self.Nr) + 0.5) * dr)
        object.__setattr__(self, "z_centers", (np.arange(self.Nz) + 0.5) * dz)
        object.__setattr__(self, "r_faces", np.arange(self.Nr + 1) * dr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nr, self.Nz)

    @property
    def r_col(self) -> np.ndarray:
        """Radii broadcast against (Nr, Nz) fields."""
        return self.r_centers[:, None]

    @property
    def cell_volumes(self) -> np.ndarray:
        """2*pi*r_j*dr*dz, shape (Nr, 1)."""
        return 2.0 * np.pi * self.r_centers[:, None] * self.dr * self.dz

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return self.r_centers[:, None] + 0.0 * self.z_centers[None, :], \
            0.0 * self.r_centers[:, None] + self.z_centers[None, :]


@dataclass
class ScalarField:
    """One axisymmetric scalar sampled at cell centers.

    parity tags the mirror ghost across r=0 (even or odd); boundary tags
    the behaviour at r=R.  z is always periodic.
    """

    values: np.ndarray
    parity: str = EVEN
    boundary: str = DIRICHLET0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("ScalarField values must be a 2D (Nr, Nz) array")
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"unknown parity {self.parity!r}")
        if self.boundary not in (DIRICHLET0, NEUMANN0):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    def like(self, values: np.ndarray, parity: str | None = None,
             boundary: str | None = None) -> "ScalarField":
        return ScalarField(values,
                           self.parity if parity is None else parity,
                           self.boundary if boundary is None else boundary)

    def copy(self) -> "ScalarField":
        return ScalarField(self.values.copy(), self.parity, self.boundary)


def build_grid(Nr: int, Nz: int, R: float, Lz: float) -> Grid:
    """Validated grid constructor (see Grid for the geometry)."""
    return Grid(int(Nr), int(Nz), float(R), float(Lz))


def constant_field(grid: Grid, value: float = 0.0, parity: str = EVEN,
                   boundary: str = DIRICHLET0) -> ScalarField:
    return ScalarField(np.full(grid.shape, float(value)), parity, boundary)


# ---------------------------------------------------------------------------
# ghost handling
# ---------------------------------------------------------------------------

def _axis_ghost(values: np.ndarray, parity: str) -> np.ndarray:
    """Row at r = -dr/2 from the mirror rule."""
    return values[0] if parity == EVEN else -values[0]


def _wall_ghost(values: np.ndarray, boundary: str) -> np.ndarray:
    """Row at r = R + dr/2: linear through 0 for dirichlet0, reflected for
    neumann0 (zero wall flux)."""
    return -values[-1] if boundary == DIRICHLET0 else values[-1]


def _padded_r(values: np.ndarray, parity: str, boundary: str) -> np.ndarray:
    g = np.empty((values.shape[0] + 2, values.shape[1]))
    g[1:-1] = values
    g[0] = _axis_ghost(values, parity)
    g[-1] = _wall_ghost(values, boundary)
    return g


# ---------------------------------------------------------------------------
# first derivatives
# ---------------------------------------------------------------------------

def ddr_values(values: np.ndarray, grid: Grid, parity: str, boundary: str) -> np.ndarray:
    """Centered d/dr with mirror axis ghost; dirichlet0 wall uses the linear
    ghost, neumann0 uses the one-sided second-order formula at the wall row."""
    dr = grid.dr
    g = _padded_r(values, parity, boundary)
    out = (g[2:] - g[:-2]) / (2.0 * dr)
    if boundary == NEUMANN0:
        # one-sided second order, grouped as differences so constants are exact
        out[-1] = (3.0 * (values[-1] - values[-2])
                   + (values[-3] - values[-2])) / (2.0 * dr)
    return out


def ddz_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2.0 * grid.dz)


def ddr(f: ScalarField, grid: Grid) -> ScalarField:
    """d/dr; the result has flipped parity."""
    out = ddr_values(f.values, grid, f.parity, f.boundary)
    return ScalarField(out, ODD if f.parity == EVEN else EVEN, NEUMANN0)


def ddz(f: ScalarField, grid: Grid) -> ScalarField:
    """d/dz (periodic); parity in r is unchanged."""
    return ScalarField(ddz_values(f.values, grid), f.parity, f.boundary)


# ---------------------------------------------------------------------------
# second-order operators
# ---------------------------------------------------------------------------

def _second_order(values: np.ndarray, grid: Grid, alpha: float,
                  parity: str, boundary: str) -> np.ndarray:
    """d_rr + (alpha/r) d_r + d_zz with ghost closures.

    dirichlet0 walls use the linear ghost through zero; neumann0 walls use
    one-sided second-order differences at the wall row (exact on
    quadratics), matching ddr.
    """
    dr, dz = grid.dr, grid.dz
    rr = grid.r_col
    g = _padded_r(values, parity, boundary)
    d2r = (g[2:] - 2.0 * values + g[:-2]) / (dr * dr)
    d1r = (g[2:] - g[:-2]) / (2.0 * dr)
    if boundary == NEUMANN0:
        v0, v1, v2, v3 = values[-1], values[-2], values[-3], values[-4]
        d2r[-1] = (2.0 * (v0 - v1) - 3.0 * (v1 - v2) + (v2 - v3)) / (dr * dr)
        d1r[-1] = (3.0 * (v0 - v1) + (v2 - v1)) / (2.0 * dr)
    d2z = (np.roll(values, -1, axis=1) - 2.0 * values + np.roll(values, 1, axis=1)) / (dz * dz)
    return d2r + (alpha / rr) * d1r + d2z


def lap_cyl(f: ScalarField, grid: Grid) -> ScalarField:
    """Scalar cylindrical Laplacian d_rr + (1/r) d_r + d_zz."""
    return f.like(_second_order(f.values, grid, 1.0, f.parity, f.boundary))


def d_plus(f: ScalarField, grid: Grid) -> ScalarField:
    """d_rr + (3/r) d_r + d_zz, the diffusion operator of h_theta / r."""
    return f.like(_second_order(f.values, grid, 3.0, f.parity, f.boundary))


def d_minus(f: ScalarField, grid: Grid) -> ScalarField:
    """d_rr - (1/r) d_r + d_zz, the diffusion operator of r * u_theta."""
    return f.like(_second_order(f.values, grid, -1.0, f.parity, f.boundary))


# ---------------------------------------------------------------------------
# integration and norms
# ---------------------------------------------------------------------------

def cyl_integral(f: ScalarField | np.ndarray, grid: Grid) -> float:
    """Integral over the cylinder with measure 2*pi*r dr dz."""
    values = f.values if isinstance(f, ScalarField) else np.asarray(f)
    return float(np.sum(values * grid.cell_volumes))


def cyl_lp_norm(f: ScalarField | np.ndarray, grid: Grid, p: float) -> float:
    """L^p norm in the cylindrical measure; p = inf returns max |f|."""
    values = f.values if isinstance(f, ScalarField) else np.asarray(f)
    if p == np.inf:
        return float(np.abs(values).max()) if values.size else 0.0
    if p < 1.0:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    return float(np.sum(np.abs(values) ** p * grid.cell_volumes) ** (1.0 / p))
