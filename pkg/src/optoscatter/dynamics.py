"""Phonon-number populations under the Raman ladder rates.

Level ``m`` is left upward at ``(m+1) a_plus`` and downward at
``m a_minus``. The ladder is truncated at ``M`` with a reflecting top so
probability is conserved; truncation adequacy is monitored through the top
population.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import kernels
from .errors import NoStationaryStateError, TruncationWarning, ValidationError
from .rates import RateSet

__all__ = [
    "PhononDistribution",
    "Trajectory",
    "evolve_populations",
    "population_trajectory",
    "stationary_distribution",
    "mean_phonon_trajectory",
    "adequate_truncation",
    "write_trajectory_csv",
]

NORM_TOL = 1e-9
TOP_TOL = 1e-6
STABILITY_BOUND = 0.1


@dataclass(frozen=True)
class PhononDistribution:
    """Populations ``p_0 .. p_M``; ``closed_form_mean`` carries ``A+/Gamma`` when known."""

    populations: np.ndarray
    closed_form_mean: float | None = None

    def __post_init__(self):
        p = np.array(self.populations, dtype=np.float64)
        if p.ndim != 1 or p.shape[0] < 2:
            raise ValidationError("need populations for at least m = 0, 1")
        if np.any(p < -NORM_TOL):
            raise ValidationError("populations must be non-negative")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise ValidationError(f"populations sum to {p.sum():.12g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "populations", p)

    @property
    def truncation(self) -> int:
        return self.populations.shape[0] - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.populations.shape[0]) @ self.populations)

    @property
    def top_population(self) -> float:
        return float(self.populations[-1])

    def is_adequate(self, tol: float = TOP_TOL) -> bool:
        return self.top_population < tol

    @classmethod
    def fock(cls, m: int, truncation: int) -> PhononDistribution:
        if not 0 <= m <= truncation:
            raise ValidationError(f"Fock level {m} outside 0..{truncation}")
        p = np.zeros(truncation + 1)
        p[m] = 1.0
        return cls(p)

    @classmethod
    def geometric(cls, ratio: float, truncation: int) -> PhononDistribution:
        """Normalized ``ratio**m`` on ``0..truncation`` (thermal state for ``ratio < 1``)."""
        if ratio < 0:
            raise ValidationError("ratio must be non-negative")
        p = ratio ** np.arange(truncation + 1, dtype=np.float64)
        return cls(p / p.sum())

    def total_variation(self, other: PhononDistribution) -> float:
        a, b = self.populations, other.populations
        n = max(a.shape[0], b.shape[0])
        a = np.pad(a, (0, n - a.shape[0]))
        b = np.pad(b, (0, n - b.shape[0]))
        return 0.5 * float(np.abs(a - b).sum())


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    populations: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.populations @ np.arange(self.populations.shape[1], dtype=np.float64)


def _ladder(rates) -> tuple[float, float]:
    if isinstance(rates, RateSet):
        a_plus, a_minus = rates.a_plus, rates.a_minus
    else:
        a_plus, a_minus = rates
    a_plus, a_minus = float(a_plus), float(a_minus)
    if not (math.isfinite(a_plus) and math.isfinite(a_minus)):
        raise ValidationError("ladder rates must be finite")
    if a_plus < 0 or a_minus < 0:
        raise ValidationError("ladder rates must be non-negative")
    return a_plus, a_minus


def _step_plan(a_plus, a_minus, M, t_final, dt, n_intervals=1):
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if t_final < 0:
        raise ValidationError("t_final must be non-negative")
    if dt * M * (a_plus + a_minus) >= STABILITY_BOUND:
        raise ValidationError(
            f"unstable step: dt*M*(A+ + A-) = {dt * M * (a_plus + a_minus):.3g} "
            f">= {STABILITY_BOUND}"
        )
    if t_final == 0:
        return 0, dt
    # round up so the samples fall on steps and t_final is hit exactly
    n_steps = max(1, math.ceil(t_final / dt - 1e-12))
    n_steps = n_intervals * math.ceil(n_steps / n_intervals)
    return n_steps, t_final / n_steps


def population_trajectory(rates, initial: PhononDistribution, t_final: float, dt: float,
                          n_samples: int = 101) -> Trajectory:
    """Integrate the ladder with fixed-step RK4, keeping ``n_samples`` equally spaced snapshots.

    ``rates`` is a :class:`RateSet` or an ``(a_plus, a_minus)`` pair. The
    step is shrunk so that samples land on steps and ``t_final`` is hit exactly.
    """
    if n_samples < 2:
        raise ValidationError("need at least 2 samples")
    a_plus, a_minus = _ladder(rates)
    n_steps, h = _step_plan(a_plus, a_minus, initial.truncation, t_final, dt, n_samples - 1)
    if n_steps == 0:
        return Trajectory(np.zeros(1), initial.populations[None, :].copy())
    every = n_steps // (n_samples - 1)
    samples = kernels.birth_death_rk4(a_plus, a_minus, initial.populations, h, n_steps, every)
    times = np.arange(n_samples, dtype=np.float64) * (every * h)
    times[-1] = t_final
    final = samples[-1]
    if final[-1] > TOP_TOL:
        warnings.warn(
            f"top level holds {final[-1]:.3g} > {TOP_TOL:g}; raise the truncation",
            TruncationWarning,
            stacklevel=2,
        )
    return Trajectory(times, samples)


def evolve_populations(rates, initial: PhononDistribution, t_final: float, dt: float) -> PhononDistribution:
    traj = population_trajectory(rates, initial, t_final, dt, n_samples=2)
    p = np.clip(traj.populations[-1], 0.0, None)
    return PhononDistribution(p / p.sum())


def stationary_distribution(rates, M: int) -> PhononDistribution:
    """Truncated geometric distribution with ratio ``A+/A-``.

    Exact stationary state of the reflecting ladder; the infinite-ladder mean
    ``A+/Gamma`` is attached as ``closed_form_mean``.
    """
    a_plus, a_minus = _ladder(rates)
    gamma_cool = a_minus - a_plus
    if not gamma_cool > 0:
        raise NoStationaryStateError(f"Gamma = {gamma_cool:g} <= 0: oscillator heats")
    if M < 1:
        raise ValidationError("truncation M must be >= 1")
    ratio = a_plus / a_minus
    p = ratio ** np.arange(M + 1, dtype=np.float64)
    return PhononDistribution(p / p.sum(), closed_form_mean=a_plus / gamma_cool)


def adequate_truncation(rates, tol: float = TOP_TOL, M_max: int = 100_000) -> int:
    """Smallest ``M`` whose stationary top population is below ``tol``."""
    a_plus, a_minus = _ladder(rates)
    if not a_minus > a_plus:
        raise NoStationaryStateError("no stationary state to size the truncation for")
    ratio = a_plus / a_minus
    if ratio == 0.0:
        return 1
    # p_M = r^M (1 - r) / (1 - r^(M+1)) < tol
    M = max(1, math.ceil(math.log(tol / (1.0 - ratio)) / math.log(ratio)))
    while M > 1 and ratio ** (M - 1) * (1 - ratio) / (1 - ratio ** M) < tol:
        M -= 1
    while ratio**M * (1 - ratio) / (1 - ratio ** (M + 1)) >= tol:
        M += 1
        if M > M_max:
            raise ValidationError(f"truncation above {M_max} required")
    return M


def mean_phonon_trajectory(rates, m0: float, t):
    """Closed-form ``<m>(t)`` from the first moment of the ladder equation.

    ``d<m>/dt = A+ - Gamma <m>``, solved as
    ``m0 e^{-Gamma t} + A+ (1 - e^{-Gamma t}) / Gamma``, which tends
    continuously to ``m0 + A+ t`` at ``Gamma = 0``. Accepts scalar or array ``t``.
    """
    a_plus, a_minus = _ladder(rates)
    gamma_cool = a_minus - a_plus
    t = np.asarray(t, dtype=np.float64)
    if gamma_cool == 0.0:
        out = m0 + a_plus * t
    else:
        out = m0 * np.exp(-gamma_cool * t) - a_plus * np.expm1(-gamma_cool * t) / gamma_cool
    return float(out) if out.ndim == 0 else out


def write_trajectory_csv(traj: Trajectory, stream: TextIO) -> None:
    """CSV with columns ``t, mean_m, p_0..p_M``, 12 significant digits."""
    M = traj.populations.shape[1] - 1
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["t", "mean_m"] + [f"p_{m}" for m in range(M + 1)])
    for t, mean, row in zip(traj.times, traj.mean, traj.populations):
        writer.writerow([f"{t:.11e}", f"{mean:.11e}"] + [f"{x:.11e}" for x in row])
