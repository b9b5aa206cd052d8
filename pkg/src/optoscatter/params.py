"""Physical parameters and the dressed spectrum of the atom-cavity pair.

All frequencies and rates are dimensionless multiples of the mechanical
frequency, which is therefore fixed to 1.
"""
from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import ValidationError

__all__ = [
    "Pump",
    "SystemParams",
    "DressedSpectrum",
    "ETA_MAX",
    "PARAM_KEYS",
    "validate",
    "dressed_spectrum",
    "params_from_mapping",
    "read_config",
    "load_params",
]

#: Default upper bound for chi/nu before rate results are flagged.
ETA_MAX = 0.3

#: Keys accepted in configuration files and as CLI overrides.
PARAM_KEYS = (
    "g",
    "kappa",
    "gamma",
    "chi",
    "omega_drive",
    "delta_cav",
    "delta_atom",
    "pump",
)

_NONNEGATIVE = ("g", "kappa", "gamma", "chi", "omega_drive")


class Pump(str, Enum):
    """Which subsystem the laser drives."""

    CAVITY = "cavity"
    ATOM = "atom"


@dataclass(frozen=True)
class SystemParams:
    """Rates and detunings of the driven atom-cavity-oscillator system.

    ``kappa`` is half the cavity energy loss rate, so the cavity field decays
    at ``kappa`` and the photon number at ``2 * kappa``. ``delta_cav`` is the
    laser-cavity detuning and ``delta_atom`` the laser-atom detuning.
    """

    g: float
    kappa: float
    gamma: float
    chi: float
    omega_drive: float
    delta_cav: float = 0.0
    delta_atom: float = 0.0
    pump: Pump = Pump.CAVITY

    def __post_init__(self):
        object.__setattr__(self, "pump", Pump(self.pump))
        for name in PARAM_KEYS[:-1]:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        _check_signs(self)

    @property
    def delta_ca(self) -> float:
        """Cavity-atom detuning, derived from the two laser detunings."""
        return self.delta_atom - self.delta_cav

    @property
    def eta(self) -> float:
        return self.chi

    def replace(self, **changes) -> SystemParams:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in PARAM_KEYS[:-1]}
        out["pump"] = self.pump.value
        return out


@dataclass(frozen=True)
class DressedSpectrum:
    omega_plus: float
    omega_minus: float
    theta: float


def _check_signs(params) -> None:
    bad = [k for k in _NONNEGATIVE if getattr(params, k) < 0]
    if bad:
        raise ValidationError(
            "rates must be non-negative: "
            + ", ".join(f"{k}={getattr(params, k)}" for k in bad)
        )


def validate(params: SystemParams, eta_max: float = ETA_MAX) -> list[str]:
    """Return human-readable warnings for parameters outside the model's regime.

    Negative rates raise :class:`ValidationError`; everything else is
    reported, never enforced, so breakdown can still be probed.
    """
    _check_signs(params)
    warnings = []
    if params.eta >= eta_max:
        warnings.append(
            f"perturbative regime violated: eta = chi/nu = {params.eta:g} >= {eta_max:g}"
        )
    if params.g == 0 and params.pump is Pump.ATOM:
        warnings.append("g = 0 with atom pump: light cannot reach the cavity")
    if params.kappa == 0 and params.gamma == 0:
        warnings.append("kappa = gamma = 0: no decay channel, scattering undefined")
    return warnings


def dressed_spectrum(params: SystemParams) -> DressedSpectrum:
    """Eigenfrequencies of the single-excitation atom-cavity doublet.

    The two roots of ``(w + delta_atom)(w + delta_cav) = g**2``. The root of
    larger magnitude is evaluated directly and the other one through the
    product of roots, which avoids cancellation when the detunings are large.
    """
    d, D, g = params.delta_atom, params.delta_cav, params.g
    half_sum = -0.5 * (d + D)
    radius = 0.5 * math.hypot(D - d, 2.0 * g)
    product = d * D - g * g
    if abs(product) < sys.float_info.min:
        # product underflowed, so dividing by it loses the root; both direct forms are exact enough
        w_plus, w_minus = half_sum + radius, half_sum - radius
    elif half_sum >= 0.0:
        w_plus = half_sum + radius
        w_minus = product / w_plus
    else:
        w_minus = half_sum - radius
        w_plus = product / w_minus
    # the division can misorder nearly degenerate roots by an ulp
    w_plus = max(w_plus, w_minus)
    theta = math.atan2(2.0 * g, D - d)
    return DressedSpectrum(w_plus, w_minus, theta)


def params_from_mapping(values: Mapping[str, object], base: SystemParams | None = None) -> SystemParams:
    """Build parameters from string or numeric values, on top of ``base``."""
    unknown = set(values) - set(PARAM_KEYS)
    if unknown:
        raise ValidationError(f"unknown parameter keys: {', '.join(sorted(unknown))}")
    fields = base.as_dict() if base is not None else {}
    for key, raw in values.items():
        if raw is None:
            continue
        if key == "pump":
            try:
                fields[key] = Pump(str(raw).strip().lower())
            except ValueError:
                raise ValidationError(f"pump must be 'cavity' or 'atom', got {raw!r}") from None
        else:
            try:
                fields[key] = float(raw)
            except (TypeError, ValueError):
                raise ValidationError(f"{key} must be a number, got {raw!r}") from None
    missing = [k for k in _NONNEGATIVE if k not in fields]
    if missing:
        raise ValidationError(f"missing parameters: {', '.join(missing)}")
    return SystemParams(**fields)


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file (``:`` also accepted, ``#`` comments)."""
    values = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        sep = "=" if "=" in line else ":"
        key, found, value = line.partition(sep)
        if not found:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip()] = value.strip().strip("'\"")
    return values


def load_params(path: str | Path | None = None, overrides: Mapping[str, object] | None = None) -> SystemParams:
    values = dict(read_config(path)) if path is not None else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return params_from_mapping(values)
