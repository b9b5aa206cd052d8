"""Detuning-plane sweeps of the closed-form rates and dressed-state resonance curves."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, TextIO

import numpy as np

from . import kernels
from .errors import ValidationError
from .params import Pump, SystemParams, dressed_spectrum

__all__ = [
    "Axis",
    "SweepGrid",
    "SweepRecord",
    "SweepResult",
    "run_sweep",
    "resonance_curves",
    "write_sweep_csv",
    "write_resonance_csv",
    "format_number",
    "SWEEP_COLUMNS",
    "M_INF_SENTINEL",
]

M_INF_SENTINEL = -1.0
SWEEP_COLUMNS = (
    "delta_cav", "delta_atom", "s2", "a_plus", "a_minus", "gamma_cool", "m_inf",
    "r_kappa_plus", "r_kappa_minus", "r_gamma_plus", "r_gamma_minus", "flag",
)
_KERNEL_INDEX = {name: i for i, name in enumerate(kernels.COLUMNS)}
_MIN_CHUNK = 4096


def format_number(x: float) -> str:
    """12 significant digits in scientific notation."""
    return f"{x:.11e}"


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValidationError("axis count must be a positive integer")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError("axis bounds must be finite")
        if self.count == 1 and self.start != self.stop:
            raise ValidationError("a single-point axis needs start == stop")
        if self.count > 1 and not self.start < self.stop:
            raise ValidationError("axis needs start < stop")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.count))

    @classmethod
    def point(cls, value: float) -> Axis:
        return cls(value, value, 1)


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular grid in (delta_cav, delta_atom); other parameters come from ``base``."""

    delta_cav_axis: Axis
    delta_atom_axis: Axis
    base: SystemParams

    def __post_init__(self):
        for name in ("delta_cav_axis", "delta_atom_axis"):
            ax = getattr(self, name)
            if not isinstance(ax, Axis):
                object.__setattr__(self, name, Axis(*ax))

    @property
    def shape(self) -> tuple[int, int]:
        return self.delta_cav_axis.count, self.delta_atom_axis.count

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened coordinates, row-major with delta_cav as the outer index."""
        dc, da = np.meshgrid(self.delta_cav_axis.values, self.delta_atom_axis.values, indexing="ij")
        return dc.ravel(), da.ravel()


@dataclass(frozen=True)
class SweepRecord:
    delta_cav: float
    delta_atom: float
    s2: float
    a_plus: float
    a_minus: float
    gamma_cool: float
    m_inf: float
    r_kappa_plus: float
    r_kappa_minus: float
    r_gamma_plus: float
    r_gamma_minus: float
    flag: int

    def as_row(self) -> list[str]:
        return [format_number(getattr(self, c)) for c in SWEEP_COLUMNS[:-1]] + [str(self.flag)]


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Column table of a sweep; ``table[:, j]`` is ``SWEEP_COLUMNS[j]``."""

    grid: SweepGrid
    table: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.table[:, SWEEP_COLUMNS.index(name)]

    def as_grid(self, name: str) -> np.ndarray:
        return self.column(name).reshape(self.grid.shape)

    def __len__(self) -> int:
        return self.table.shape[0]

    def __iter__(self) -> Iterator[SweepRecord]:
        for row in self.table:
            yield SweepRecord(*row[:-1].tolist(), int(row[-1]))


def _assemble(dc, da, raw):
    col = lambda name: raw[:, _KERNEL_INDEX[name]]  # noqa: E731
    out = np.empty((dc.shape[0], len(SWEEP_COLUMNS)))
    out[:, 0], out[:, 1] = dc, da
    for j, name in enumerate(SWEEP_COLUMNS[2:7], start=2):
        out[:, j] = col(name)
    flagged = col("flag") != 0
    out[:, 6] = np.where(np.isnan(out[:, 6]) & ~flagged, M_INF_SENTINEL, out[:, 6])
    for j, (name, amp) in enumerate(
        [("r_kappa_plus", "a_kappa_plus"), ("r_kappa_minus", "a_kappa_minus"),
         ("r_gamma_plus", "a_gamma_plus"), ("r_gamma_minus", "a_gamma_minus")], start=7):
        # a channel with zero rate carries zero flux whether or not a steady state exists
        out[:, j] = np.where(col(amp) == 0.0, 0.0, col(name))
    out[:, 11] = col("flag")
    return out


def run_sweep(grid: SweepGrid, threads: int = 1, backend: str | None = None) -> SweepResult:
    """Evaluate the rate chain on every grid point.

    Rows are row-major in (delta_cav, delta_atom). ``m_inf`` holds
    ``M_INF_SENTINEL`` where the point heats; sideband fluxes are NaN there
    unless the channel rate is exactly zero. Points where a resonance
    denominator vanishes get ``flag = 1`` and NaN data but are still emitted.
    Each point is computed independently, so the result does not depend on
    ``threads``.
    """
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    p = grid.base
    core = kernels.get_backend(backend)
    dc, da = grid.points()

    def work(lo, hi):
        return core.rate_grid(p.g, p.kappa, p.gamma, p.chi, p.omega_drive,
                              p.pump is Pump.ATOM, dc[lo:hi], da[lo:hi])

    n = dc.shape[0]
    if threads == 1 or n < 2 * _MIN_CHUNK:
        raw = work(0, n)
    else:
        n_chunks = min(threads * 4, max(1, n // _MIN_CHUNK))
        bounds = np.linspace(0, n, n_chunks + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds[:-1], bounds[1:]))
        raw = np.vstack(parts)
    return SweepResult(grid, _assemble(dc, da, raw))


def resonance_curves(params: SystemParams, target: float, branch: str, delta_cav_axis,
                     tol: float = 1e-9) -> list[tuple[float, float]]:
    """Points ``(delta_cav, delta_atom)`` where the chosen dressed frequency equals ``target``.

    Squaring the radical leaves ``delta_atom (t + delta_cav) = g^2 - t (t + delta_cav)``,
    linear in ``delta_atom``. Each candidate is substituted back through
    :func:`dressed_spectrum`; candidates off the requested branch, and
    ``delta_cav`` values with no (or no unique) solution, are dropped.
    """
    if branch not in ("plus", "minus"):
        raise ValidationError("branch must be 'plus' or 'minus'")
    if not isinstance(delta_cav_axis, Axis) and not isinstance(delta_cav_axis, np.ndarray):
        delta_cav_axis = Axis(*delta_cav_axis) if len(delta_cav_axis) == 3 else np.asarray(delta_cav_axis)
    values = delta_cav_axis.values if isinstance(delta_cav_axis, Axis) else delta_cav_axis
    t, g2 = float(target), params.g**2
    out = []
    for dc in values:
        dc = float(dc)
        s = t + dc
        if s == 0.0:
            continue
        da = g2 / s - t
        spec = dressed_spectrum(params.replace(delta_cav=dc, delta_atom=da))
        omega = spec.omega_plus if branch == "plus" else spec.omega_minus
        if abs(omega - t) < tol * max(1.0, abs(t)):
            out.append((dc, da))
    return out


def _write_comments(stream, comments):
    for line in comments:
        stream.write(f"# {line}\n")


def write_sweep_csv(result: SweepResult, stream: TextIO, comments: list[str] | None = None) -> None:
    base = result.grid.base
    _write_comments(stream, [
        *(comments or []),
        "m_inf = -1 marks heating points (gamma_cool <= 0) with no steady state",
        "r_* are NaN where m_inf is absent; flag = 1 marks a vanishing resonance denominator",
        "base: " + ", ".join(f"{k}={v}" for k, v in base.as_dict().items()
                             if k not in ("delta_cav", "delta_atom")),
    ])
    stream.write(",".join(SWEEP_COLUMNS) + "\n")
    for rec in result:
        stream.write(",".join(rec.as_row()) + "\n")


def write_resonance_csv(curves: list[tuple[str, float, list[tuple[float, float]]]], stream: TextIO,
                        comments: list[str] | None = None) -> None:
    """``curves`` holds ``(branch, target, points)`` triples."""
    _write_comments(stream, comments or [])
    stream.write("branch,target,delta_cav,delta_atom\n")
    for branch, target, points in curves:
        for dc, da in points:
            stream.write(f"{branch},{format_number(target)},{format_number(dc)},{format_number(da)}\n")
