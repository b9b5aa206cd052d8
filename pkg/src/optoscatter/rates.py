"""Closed-form Raman heating and cooling rates in the weak-drive limit.

To lowest order in the drive and in ``chi``, every rate factorizes into the
probability ``s2`` of putting one photon into the cavity and a mechanical
part that depends on the decay channel (cavity ``kappa`` or atom
``gamma``) and on the sideband (Stokes ``+`` raises the phonon number,
anti-Stokes ``-`` lowers it).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateDenominatorError, ValidationError
from .params import Pump, SystemParams

__all__ = [
    "RateSet",
    "SidebandRates",
    "ThermalEnv",
    "ThermalRates",
    "denominator_d",
    "excitation_probability",
    "mechanical_amplitudes",
    "transition_rates",
    "sideband_rates",
    "thermal_rates",
    "optimal_detuning",
    "cooperativity",
    "cooperativity_limit",
]


@dataclass(frozen=True)
class RateSet:
    """Rates at one parameter point.

    ``a_kappa_plus`` etc. are the two additive channel contributions to
    ``a_plus``/``a_minus``. ``m_inf`` is ``None`` when ``gamma_cool <= 0``:
    the oscillator heats and has no stationary state.
    """

    s2: float
    a2_kappa_plus: float
    a2_kappa_minus: float
    a2_gamma_plus: float
    a2_gamma_minus: float
    a_kappa_plus: float
    a_kappa_minus: float
    a_gamma_plus: float
    a_gamma_minus: float
    a_plus: float
    a_minus: float
    gamma_cool: float
    m_inf: float | None

    @property
    def heating(self) -> bool:
        return self.m_inf is None

    @classmethod
    def from_rates(cls, a_plus: float, a_minus: float) -> RateSet:
        """Wrap bare ladder rates, e.g. for driving the rate equation directly.

        The channel split is attributed entirely to the cavity.
        """
        if a_plus < 0 or a_minus < 0:
            raise ValidationError("ladder rates must be non-negative")
        gamma_cool = a_minus - a_plus
        m_inf = a_plus / gamma_cool if gamma_cool > 0 else None
        nan = math.nan
        return cls(nan, nan, nan, nan, nan, a_plus, a_minus, 0.0, 0.0,
                   a_plus, a_minus, gamma_cool, m_inf)


@dataclass(frozen=True)
class SidebandRates:
    r_kappa_plus: float
    r_kappa_minus: float
    r_gamma_plus: float
    r_gamma_minus: float
    r_plus: float
    r_minus: float


@dataclass(frozen=True)
class ThermalEnv:
    """Mechanical bath: equilibrium occupation and damping rate."""

    m_th: float = 0.0
    gamma_th: float = 0.0

    def __post_init__(self):
        if not (self.m_th >= 0 and self.gamma_th >= 0):
            raise ValidationError(f"thermal bath needs m_th, gamma_th >= 0, got {self}")


@dataclass(frozen=True)
class ThermalRates:
    a_plus_prime: float
    a_minus_prime: float
    gamma_prime: float
    m_inf_prime: float | None


def denominator_d(params: SystemParams, upsilon: float) -> float:
    """Resonance denominator for a pump detuned by ``upsilon`` from the bare levels.

    ``|(delta_atom + u + i gamma/2)(delta_cav + u + i kappa) - g**2|**2``
    written out as real and imaginary parts. It nearly vanishes where a
    dressed frequency equals ``upsilon``.
    """
    d = params.delta_atom + upsilon
    D = params.delta_cav + upsilon
    re = d * D - params.g * params.g - 0.5 * params.gamma * params.kappa
    im = params.kappa * d + 0.5 * params.gamma * D
    return re * re + im * im


def _checked_d(params, upsilon):
    value = denominator_d(params, upsilon)
    if value == 0.0:
        raise DegenerateDenominatorError(
            f"scattering denominator vanishes at upsilon={upsilon:g} for {params}"
        )
    return value


def excitation_probability(params: SystemParams) -> float:
    """Single-photon cavity population ``|S|**2`` for the chosen pump."""
    quarter_drive = 0.25 * params.omega_drive * params.omega_drive
    if params.pump is Pump.CAVITY:
        num = params.delta_atom * params.delta_atom + 0.25 * params.gamma * params.gamma
    else:
        num = params.g * params.g
    if num == 0.0 or quarter_drive == 0.0:
        return 0.0
    return quarter_drive * num / _checked_d(params, 0.0)


def mechanical_amplitudes(params: SystemParams) -> tuple[float, float, float, float]:
    """``(|A_kappa,+|², |A_kappa,-|², |A_gamma,+|², |A_gamma,-|²)``.

    The Stokes amplitude is evaluated one phonon below the pump, i.e. with
    ``D(-1)`` and numerator ``(delta_atom - 1)**2 + gamma**2/4``; at
    ``delta_atom = 1`` and ``gamma = 0`` the cavity-channel Stokes path
    interferes away completely.
    """
    chi2 = params.chi * params.chi
    if chi2 == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    q_gamma = 0.25 * params.gamma * params.gamma
    g2 = params.g * params.g
    out = []
    for upsilon in (-1.0, 1.0):
        d_u = params.delta_atom + upsilon
        num_kappa = d_u * d_u + q_gamma
        if num_kappa == 0.0 and g2 == 0.0:
            out.append((0.0, 0.0))
            continue
        den = _checked_d(params, upsilon)
        out.append((chi2 * num_kappa / den, chi2 * g2 / den))
    (kp, gp), (km, gm) = out
    return kp, km, gp, gm


def transition_rates(params: SystemParams) -> RateSet:
    s2 = excitation_probability(params)
    kp, km, gp, gm = mechanical_amplitudes(params)
    two_kappa, gamma = 2.0 * params.kappa, params.gamma
    # per unit excitation; s2 cancels from m_inf, which is why m_inf
    # does not depend on the pump scheme
    x_plus = two_kappa * kp + gamma * gp
    x_minus = two_kappa * km + gamma * gm
    a_kappa_plus, a_gamma_plus = s2 * two_kappa * kp, s2 * gamma * gp
    a_kappa_minus, a_gamma_minus = s2 * two_kappa * km, s2 * gamma * gm
    gamma_cool = s2 * (x_minus - x_plus)
    m_inf = x_plus / (x_minus - x_plus) if gamma_cool > 0 else None
    return RateSet(
        s2=s2,
        a2_kappa_plus=kp,
        a2_kappa_minus=km,
        a2_gamma_plus=gp,
        a2_gamma_minus=gm,
        a_kappa_plus=a_kappa_plus,
        a_kappa_minus=a_kappa_minus,
        a_gamma_plus=a_gamma_plus,
        a_gamma_minus=a_gamma_minus,
        a_plus=s2 * x_plus,
        a_minus=s2 * x_minus,
        gamma_cool=gamma_cool,
        m_inf=m_inf,
    )


def sideband_rates(rates: RateSet, m_mean: float) -> SidebandRates:
    """Photon flux into the Stokes and anti-Stokes sidebands at mean phonon number ``m_mean``.

    Stokes emission carries the extra ``+1`` of spontaneous phonon creation.
    Pass ``rates.m_inf`` for the stationary fluxes, which then balance.
    """
    if not m_mean >= 0:
        raise ValidationError(f"m_mean must be non-negative, got {m_mean}")
    up = m_mean + 1.0
    r_kp = up * rates.a_kappa_plus
    r_gp = up * rates.a_gamma_plus
    r_km = m_mean * rates.a_kappa_minus
    r_gm = m_mean * rates.a_gamma_minus
    return SidebandRates(r_kp, r_km, r_gp, r_gm, r_kp + r_gp, r_km + r_gm)


def thermal_rates(rates: RateSet, env: ThermalEnv) -> ThermalRates:
    """Fold intrinsic mechanical damping into the ladder rates."""
    a_plus = rates.a_plus + env.m_th * env.gamma_th
    a_minus = rates.a_minus + (env.m_th + 1.0) * env.gamma_th
    gamma_prime = rates.gamma_cool + env.gamma_th
    m_inf = a_plus / gamma_prime if gamma_prime > 0 else None
    return ThermalRates(a_plus, a_minus, gamma_prime, m_inf)


def optimal_detuning(params: SystemParams) -> float:
    """Laser-cavity detuning minimising the phonon number at ``delta_atom = 1``."""
    return 0.5 * (0.5 * params.kappa * params.gamma + params.g * params.g) - 1.0


def cooperativity(params: SystemParams) -> float:
    kg = params.kappa * params.gamma
    if kg == 0.0:
        raise ValidationError("cooperativity undefined for kappa * gamma = 0")
    return 2.0 * params.g * params.g / kg


def cooperativity_limit(params: SystemParams) -> tuple[float, float]:
    """Approximate ``(m_inf, gamma_cool)`` at the optimal working point.

    Valid for ``kappa >> gamma`` with ``delta_atom = 1`` and ``delta_cav``
    at :func:`optimal_detuning`; not enforced. The cooling-rate estimate uses
    ``|S|**2`` at the supplied detunings.
    """
    c = cooperativity(params)
    if c == 0.0:
        raise ValidationError("cooperativity is zero (g = 0): no cooling floor")
    m_inf = 1.0 / c + (0.25 * params.gamma) ** 2
    gamma_cool = 2.0 * params.chi * params.chi / params.kappa * excitation_probability(params)
    return m_inf, gamma_cool
