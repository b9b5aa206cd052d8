"""Raman cooling of a mechanical oscillator through a cavity that hosts a two-level atom.

Closed-form weak-drive rates (:mod:`.rates`), the phonon rate equation
(:mod:`.dynamics`), a truncated-Fock master-equation oracle (:mod:`.oracle`)
and parameter sweeps (:mod:`.sweep`).
"""
from .errors import (
    DegenerateDenominatorError,
    NoStationaryStateError,
    NonConvergenceError,
    NumericalError,
    TraceDriftError,
    TruncationWarning,
    ValidationError,
)
from .params import DressedSpectrum, Pump, SystemParams, dressed_spectrum, load_params, validate
from .rates import (
    RateSet,
    SidebandRates,
    ThermalEnv,
    ThermalRates,
    cooperativity_limit,
    denominator_d,
    excitation_probability,
    mechanical_amplitudes,
    optimal_detuning,
    sideband_rates,
    thermal_rates,
    transition_rates,
)

__version__ = "0.1.0"
