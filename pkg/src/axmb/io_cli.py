"""Config parsing, binary snapshots, series emission and the command line.

Config files are line-oriented ``key = value`` with ``[section]`` headers
and ``#`` comments.  Sections and keys:

    [grid]     Nr, Nz, R, Lz                      (required)
    [time]     T (required), dt_out, cfl_adv, cfl_diff
    [physics]  mu, buoyancy, magnetic_source, swirl_source
    [initial.swirl]    kind, amplitude, sigma, z_center
    [initial.magnetic] kind, amplitude, sigma, z_center
    [initial.thermal]  kind, amplitude, sigma, z_center
    [initial.vortex]   kind, amplitude, sigma, z_center
    [output]   directory, snapshot_times, scheme

Defaults: dt_out = T/100, cfl_adv = 0.4, cfl_diff = 0.2, mu = 0, all
source toggles on, scheme = centered2, directory = "out", no snapshots,
all initial profiles zero.  Unknown keys are rejected with their line
number.

Snapshots are bit-exact binary: magic ``AXMB``, format version (u32 LE,
currently 1), Nr and Nz (u64 LE), then R, Lz, t, mu (f64 LE), then the
four primary arrays Gamma, Omega, H, rho as Nr*Nz f64 LE values with the
r index fastest.  Derived fields are reconstructed on read.

The time series is CSV with one fixed header (see diagnostics.CSV_COLUMNS)
and 17-significant-digit values, so parsing a file back reproduces the
records exactly.
"""

from __future__ import annotations

import argparse
import math
import struct
import sys
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import diagnostics, dynamics, experiments
from .diagnostics import CSV_COLUMNS, DiagnosticsRecord, SeriesBuilder
from .grid import Grid, build_grid, cyl_integral, cyl_lp_norm
from .state import (InitialProfile, ProfileSet, SimState, state_from_primaries,
                    zero_profile)

SNAPSHOT_MAGIC = b"AXMB"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIQQdddd")
_MAX_CELLS = 1 << 28   # dimension overflow guard


class ConfigError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class Config:
    Nr: int
    Nz: int
    R: float
    Lz: float
    T: float
    dt_out: float = None  # type: ignore[assignment]  # defaults to T/100
    cfl_adv: float = 0.4
    cfl_diff: float = 0.2
    mu: float = 0.0
    buoyancy: bool = True
    magnetic_source: bool = True
    swirl_source: bool = True
    swirl: InitialProfile = field(default_factory=zero_profile)
    magnetic: InitialProfile = field(default_factory=zero_profile)
    thermal: InitialProfile = field(default_factory=zero_profile)
    vortex: InitialProfile = field(default_factory=zero_profile)
    directory: str = "out"
    snapshot_times: tuple = ()
    scheme: str = "centered2"

    def __post_init__(self):
        if self.dt_out is None:
            self.dt_out = self.T / 100.0 if self.T > 0 else 1.0

    def make_grid(self) -> Grid:
        return build_grid(self.Nr, self.Nz, self.R, self.Lz)

    def make_scheme(self) -> dynamics.SchemeConfig:
        return dynamics.SchemeConfig(self.scheme, self.cfl_adv, self.cfl_diff,
                                     self.buoyancy, self.magnetic_source,
                                     self.swirl_source)

    def make_profiles(self) -> ProfileSet:
        return ProfileSet(self.swirl, self.magnetic, self.thermal, self.vortex)


_REQUIRED = ("grid.Nr", "grid.Nz", "grid.R", "grid.Lz", "time.T")

_SCHEMA = {
    "grid.Nr": int, "grid.Nz": int, "grid.R": float, "grid.Lz": float,
    "time.T": float, "time.dt_out": float, "time.cfl_adv": float,
    "time.cfl_diff": float,
    "physics.mu": float, "physics.buoyancy": bool,
    "physics.magnetic_source": bool, "physics.swirl_source": bool,
    "output.directory": str, "output.snapshot_times": "floats",
    "output.scheme": str,
}
for _blk in ("swirl", "magnetic", "thermal", "vortex"):
    _SCHEMA[f"initial.{_blk}.kind"] = str
    _SCHEMA[f"initial.{_blk}.amplitude"] = float
    _SCHEMA[f"initial.{_blk}.sigma"] = float
    _SCHEMA[f"initial.{_blk}.z_center"] = float

_BOOL_WORDS = {"on": True, "true": True, "1": True, "yes": True,
               "off": False, "false": False, "0": False, "no": False}


def _convert(full_key: str, raw: str, lineno: int):
    want = _SCHEMA[full_key]
    try:
        if want is int:
            return int(raw)
        if want is float:
            return float(raw)
        if want is bool:
            return _BOOL_WORDS[raw.lower()]
        if want == "floats":
            raw = raw.strip()
            return tuple(float(tok) for tok in raw.split(",") if tok.strip()) \
                if raw else ()
        return raw
    except (ValueError, KeyError):
        raise ConfigError(
            f"line {lineno}: malformed value {raw!r} for key {full_key!r}")


def parse_config(text: str) -> Config:
    """Parse and fully validate a config (see the module docstring)."""
    section = None
    seen: dict[str, tuple[object, int]] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            valid = {k.rsplit(".", 1)[0] for k in _SCHEMA}
            if section not in valid:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (tok.strip() for tok in line.split("=", 1))
        if section is None:
            raise ConfigError(f"line {lineno}: key {key!r} before any [section]")
        full_key = f"{section}.{key}"
        if full_key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if full_key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]")
        seen[full_key] = (_convert(full_key, raw, lineno), lineno)

    for req in _REQUIRED:
        if req not in seen:
            raise ConfigError(f"missing required key {req.split('.', 1)[1]!r} "
                              f"in section [{req.split('.', 1)[0]}]")

    def get(full_key: str, default=None):
        return seen[full_key][0] if full_key in seen else default

    def line_of(full_key: str) -> int:
        return seen[full_key][1]

    profiles = {}
    for blk in ("swirl", "magnetic", "thermal", "vortex"):
        pref = f"initial.{blk}"
        if any(k.startswith(pref + ".") for k in seen):
            kind = get(f"{pref}.kind")
            if kind is None:
                raise ConfigError(f"section [initial.{blk}] needs a 'kind'")
            try:
                profiles[blk] = InitialProfile(
                    kind, get(f"{pref}.amplitude", 0.0),
                    get(f"{pref}.sigma", 0.25), get(f"{pref}.z_center", 0.0))
            except ValueError as exc:
                raise ConfigError(
                    f"line {line_of(pref + '.kind')}: {exc}") from exc
        else:
            profiles[blk] = zero_profile()

    mu = get("physics.mu", 0.0)
    if mu < 0.0:
        raise ConfigError(f"line {line_of('physics.mu')}: "
                          f"'mu' must be nonnegative, got {mu}")
    cfg = Config(
        Nr=get("grid.Nr"), Nz=get("grid.Nz"), R=get("grid.R"), Lz=get("grid.Lz"),
        T=get("time.T"), dt_out=get("time.dt_out"),
        cfl_adv=get("time.cfl_adv", 0.4), cfl_diff=get("time.cfl_diff", 0.2),
        mu=mu, buoyancy=get("physics.buoyancy", True),
        magnetic_source=get("physics.magnetic_source", True),
        swirl_source=get("physics.swirl_source", True),
        swirl=profiles["swirl"], magnetic=profiles["magnetic"],
        thermal=profiles["thermal"], vortex=profiles["vortex"],
        directory=get("output.directory", "out"),
        snapshot_times=get("output.snapshot_times", ()),
        scheme=get("output.scheme", "centered2"),
    )
    # trip the numeric validations now, with config context
    try:
        cfg.make_grid()
        cfg.make_scheme()
        cfg.make_profiles()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.T < 0.0:
        raise ConfigError(f"line {line_of('time.T')}: 'T' must be nonnegative")
    return cfg


def serialize_config(cfg: Config) -> str:
    """Emit a config text that parses back to an equal Config."""
    out = ["[grid]"]
    out += [f"Nr = {cfg.Nr}", f"Nz = {cfg.Nz}", f"R = {cfg.R!r}", f"Lz = {cfg.Lz!r}"]
    out += ["", "[time]", f"T = {cfg.T!r}", f"dt_out = {cfg.dt_out!r}",
            f"cfl_adv = {cfg.cfl_adv!r}", f"cfl_diff = {cfg.cfl_diff!r}"]
    out += ["", "[physics]", f"mu = {cfg.mu!r}",
            f"buoyancy = {'on' if cfg.buoyancy else 'off'}",
            f"magnetic_source = {'on' if cfg.magnetic_source else 'off'}",
            f"swirl_source = {'on' if cfg.swirl_source else 'off'}"]
    for name in ("swirl", "magnetic", "thermal", "vortex"):
        prof: InitialProfile = getattr(cfg, name)
        out += ["", f"[initial.{name}]", f"kind = {prof.kind}",
                f"amplitude = {prof.amplitude!r}", f"sigma = {prof.sigma!r}",
                f"z_center = {prof.z_center!r}"]
    snap = ",".join(repr(t) for t in cfg.snapshot_times)
    out += ["", "[output]", f"directory = {cfg.directory}",
            f"scheme = {cfg.scheme}"]
    if snap:
        out.append(f"snapshot_times = {snap}")
    return "\n".join(out) + "\n"


def load_config(path: str | Path) -> Config:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def write_snapshot(state: SimState, path: str | Path) -> None:
    """Bit-exact dump of the primary fields (see module docstring)."""
    grid = state.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.Nr, grid.Nz,
                          grid.R, grid.Lz, state.t, state.mu)
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in state.primary_arrays:
            fh.write(arr.astype("<f8", copy=False).tobytes(order="F"))


def read_snapshot(path: str | Path) -> SimState:
    """Read a snapshot and reconstruct the derived fields."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise SnapshotError(f"truncated snapshot: {len(blob)} bytes, "
                            f"need at least {_HEADER.size} for the header")
    magic, version, Nr, Nz, R, Lz, t, mu = _HEADER.unpack_from(blob)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {SNAPSHOT_MAGIC!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version} "
                            f"(reader supports {SNAPSHOT_VERSION})")
    if Nr * Nz > _MAX_CELLS or Nr < 4 or Nz < 4:
        raise SnapshotError(f"dimension overflow or undersize: Nr={Nr}, Nz={Nz}")
    expected = _HEADER.size + 4 * Nr * Nz * 8
    if len(blob) != expected:
        raise SnapshotError(f"truncated snapshot: expected {expected} bytes, "
                            f"got {len(blob)}")
    grid = build_grid(Nr, Nz, R, Lz)
    arrays = []
    offset = _HEADER.size
    count = Nr * Nz
    for _ in range(4):
        flat = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        arrays.append(flat.reshape((Nr, Nz), order="F").copy())
        offset += count * 8
    st = state_from_primaries(grid, t, mu, *arrays)
    return st


# ---------------------------------------------------------------------------
# time series
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def append_timeseries(record: DiagnosticsRecord, path: str | Path) -> None:
    """Append one CSV row, writing the header first on an empty file."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a") as fh:
        if fresh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.write(",".join(_fmt(v) for v in record.csv_values()) + "\n")


def read_timeseries(path: str | Path) -> list[DiagnosticsRecord]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        return []
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected series header in {path}")
    out = []
    for line in lines[1:]:
        vals = [float(tok) for tok in line.split(",")]
        out.append(DiagnosticsRecord(**dict(zip(CSV_COLUMNS, vals))))
    return out


# ---------------------------------------------------------------------------
# invariant suite (the `check` subcommand)
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def invariant_suite(cfg: Config) -> list[CheckResult]:
    """Fast structural checks on the configured problem: geometry identity,
    operator linearity, elliptic residual contract, exact solenoidality,
    finiteness, thermal-mass conservation and the maximum principle over a
    short run."""
    from dataclasses import replace
    from . import elliptic
    from .grid import ScalarField, ddr_values

    results: list[CheckResult] = []
    grid = cfg.make_grid()

    vol = float(np.sum(grid.cell_volumes)) * grid.Nz
    exact = math.pi * grid.R**2 * grid.Lz
    results.append(CheckResult(
        "grid volume identity", abs(vol - exact) <= 1e-12 * exact,
        f"sum(cells)={vol:.15e} vs pi R^2 Lz={exact:.15e}"))

    rng = np.random.default_rng(20240811)
    f = rng.standard_normal(grid.shape)
    g = rng.standard_normal(grid.shape)
    lin = ddr_values(2.0 * f - 3.0 * g, grid, "even", "dirichlet0") - (
        2.0 * ddr_values(f, grid, "even", "dirichlet0")
        - 3.0 * ddr_values(g, grid, "even", "dirichlet0"))
    scale = max(np.abs(ddr_values(f, grid, "even", "dirichlet0")).max(), 1.0)
    results.append(CheckResult(
        "operator linearity", np.abs(lin).max() <= 1e-12 * scale,
        f"max deviation {np.abs(lin).max():.3e}"))

    from .state import init_from_profiles
    state = init_from_profiles(grid, cfg.make_profiles(), cfg.mu)
    res = elliptic.residual_stream(state.psi.values, state.Omega.values, grid)
    bound = 1e-10 * (np.abs(grid.r_col**2 * state.Omega.values).max() + 1.0)
    results.append(CheckResult(
        "elliptic residual contract", res <= bound,
        f"residual {res:.3e} vs bound {bound:.3e}"))

    div0 = dynamics._div(state, grid)
    results.append(CheckResult(
        "discrete solenoidality (t=0)", div0 <= 1e-12,
        f"relative divergence {div0:.3e}"))

    h = min(grid.dr, grid.dz)
    dt0 = cfg.cfl_diff * h * h / max(1.0, cfg.mu)
    short = replace(cfg, T=20.0 * dt0, dt_out=5.0 * dt0, snapshot_times=())
    result = dynamics.run(short, keep_states=True)
    recs, states = result.records, result.states

    div_worst = max(rec.div_max for rec in recs)
    results.append(CheckResult(
        "discrete solenoidality (run)", div_worst <= 1e-12,
        f"max relative divergence {div_worst:.3e}"))

    finite = all(all(np.isfinite(v) or name in ("riesz_p2",)
                     for name, v in zip(CSV_COLUMNS, rec.csv_values()))
                 for rec in recs)
    results.append(CheckResult("record finiteness", finite,
                               "all diagnostics finite (riesz may be absent)"))

    mass = [cyl_integral(s.rho, grid) for s in states]
    drift = max(abs(m - mass[0]) for m in mass) / max(abs(mass[0]), 1e-300)
    results.append(CheckResult(
        "thermal mass conservation", drift <= 1e-11,
        f"relative drift {drift:.3e}"))

    overshoot = 1e-12 if cfg.scheme == "upwind1" else 0.005 * max(
        recs[0].linf_Gamma, recs[0].linf_H, recs[0].linf_rho, 1e-300)
    ok_max = True
    for attr in ("linf_Gamma", "linf_H", "linf_rho"):
        vals = [getattr(rec, attr) for rec in recs]
        tol = 1e-12 if cfg.scheme == "upwind1" else 0.005 * max(vals[0], 1e-300)
        if any(v > vals[0] + tol for v in vals):
            ok_max = False
    results.append(CheckResult(
        "maximum principle (short run)", ok_max,
        f"scheme {cfg.scheme}, overshoot allowance {overshoot:.3e}"))
    return results


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="axmb",
                     description="Axisymmetric MHD-Boussinesq solver")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="integrate a configured problem")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_diag = sub.add_parser("diagnose", help="print diagnostics of a snapshot")
    p_diag.add_argument("--snapshot", required=True)
    p_diag.add_argument("--p", default=None,
                        help="extra L^p norms of H and rho (comma list, inf ok)")
    p_inv = sub.add_parser("inviscid-limit", help="mu-ladder convergence study")
    p_inv.add_argument("--config", required=True)
    p_inv.add_argument("--mus", required=True)
    p_inv.add_argument("--out", default=None)
    p_check = sub.add_parser("check", help="run the invariant suites")
    p_check.add_argument("--suite", required=True, choices=["invariants"])
    p_check.add_argument("--config", required=True)
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out if args.out else cfg.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    series_path = out_dir / "series.csv"
    if series_path.exists():
        series_path.unlink()
    result = dynamics.run(cfg, on_record=lambda rec, _:
                          append_timeseries(rec, series_path))
    for idx, (t_snap, snap_state) in enumerate(result.snapshots):
        write_snapshot(snap_state, out_dir / f"snapshot_{idx:04d}.axmb")
    last = result.records[-1]
    print(f"run complete: t={last.t:.6g}, {len(result.records)} records, "
          f"{len(result.snapshots)} snapshots -> {out_dir}")
    return 0


def _cmd_diagnose(args) -> int:
    state = read_snapshot(args.snapshot)
    rec = SeriesBuilder(state.grid).sample(state, 0.0)
    for name in CSV_COLUMNS:
        print(f"{name} = {_fmt(getattr(rec, name))}")
    if args.p:
        for tok in args.p.split(","):
            p = math.inf if tok.strip().lower() in ("inf", "infinity") \
                else float(tok)
            print(f"lp_H(p={tok.strip()}) = "
                  f"{_fmt(cyl_lp_norm(state.Hfield, state.grid, p))}")
            print(f"lp_rho(p={tok.strip()}) = "
                  f"{_fmt(cyl_lp_norm(state.rho, state.grid, p))}")
    return 0


def _cmd_inviscid(args) -> int:
    cfg = load_config(args.config)
    mus = [float(tok) for tok in args.mus.split(",") if tok.strip()]
    if not mus:
        raise UsageError("--mus needs at least one value")
    result = experiments.inviscid_limit(cfg, mus)
    out_dir = Path(args.out if args.out else cfg.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = out_dir / "inviscid_limit.csv"
    with open(table, "w") as fh:
        fh.write("mu,err_u,err_h,err_rho,err_total,floor_ok\n")
        for mu, eu, eh, er, tot, ok in result.table_rows():
            fh.write(f"{_fmt(mu)},{_fmt(eu)},{_fmt(eh)},{_fmt(er)},"
                     f"{_fmt(tot)},{int(ok)}\n")
    loglog = out_dir / "inviscid_loglog.dat"
    with open(loglog, "w") as fh:
        fh.write("# mu  total_error   (log-log axes; floor "
                 f"{_fmt(result.floor)})\n")
        for e in result.errors:
            fh.write(f"{_fmt(e.mu)} {_fmt(e.total)}\n")
    print(f"floor = {_fmt(result.floor)}")
    print(f"slope = {_fmt(result.slope)}, intercept = {_fmt(result.intercept)}, "
          f"r^2 = {_fmt(result.r_squared)}")
    print(f"table -> {table}")
    return 0


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    results = invariant_suite(cfg)
    worst = 0
    for res in results:
        print(f"[{'PASS' if res.ok else 'FAIL'}] {res.name}: {res.detail}")
        if not res.ok:
            worst = 1
    return worst


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        if args.command == "inviscid-limit":
            return _cmd_inviscid(args)
        return _cmd_check(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, SnapshotError, OSError, ValueError, RuntimeError,
            FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
