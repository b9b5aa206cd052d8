"""Brute-force master-equation oracle on a truncated Fock space.

Builds the full atom ⊗ cavity ⊗ mechanics Hamiltonian with cavity loss,
spontaneous emission and an optional thermal mechanical bath, and extracts
the quantities the closed-form theory predicts: the steady phonon number
and the exponential cooling rate. Nothing here calls into :mod:`.rates`
except :func:`compare`, which puts the two side by side.

Tensor ordering is fixed as atom (slowest index) ⊗ cavity ⊗ mechanics, the
atom basis is ``(|g>, |e>)``, and density matrices are vectorized row-major,
so ``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import OptimizeWarning, curve_fit, minimize_scalar

from .errors import NonConvergenceError, NumericalError, TraceDriftError, ValidationError
from .params import Pump, SystemParams
from .rates import RateSet, ThermalEnv, thermal_rates, transition_rates

__all__ = [
    "Truncation",
    "OperatorSet",
    "QuantumState",
    "Evolution",
    "CoolingFit",
    "Comparison",
    "build_operators",
    "build_hamiltonian",
    "lindblad_rhs",
    "liouvillian",
    "evolve",
    "steady_state",
    "slow_rates",
    "fit_cooling_rate",
    "cutoff_changes",
    "compare",
    "write_series_csv",
    "summary_block",
]

MAX_DIM = 512


@dataclass(frozen=True)
class Truncation:
    n_cav_max: int = 2
    n_mech_max: int = 14
    max_dim: int = MAX_DIM

    def __post_init__(self):
        if self.n_cav_max < 1 or self.n_mech_max < 1:
            raise ValidationError("Fock cutoffs must be >= 1")
        if self.dim > self.max_dim:
            raise ValidationError(f"Hilbert space dimension {self.dim} exceeds limit {self.max_dim}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return 2, self.n_cav_max + 1, self.n_mech_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_cav_max + 1) * (self.n_mech_max + 1)

    def enlarged(self, d_cav: int = 1, d_mech: int = 4) -> Truncation:
        return Truncation(self.n_cav_max + d_cav, self.n_mech_max + d_mech,
                          max(self.max_dim, 2 * (self.n_cav_max + d_cav + 1) * (self.n_mech_max + d_mech + 1)))


@dataclass(frozen=True, eq=False)
class OperatorSet:
    trunc: Truncation
    a: np.ndarray
    ad: np.ndarray
    b: np.ndarray
    bd: np.ndarray
    sm: np.ndarray
    sp: np.ndarray
    eye: np.ndarray

    @property
    def n_cav(self) -> np.ndarray:
        return self.ad @ self.a

    @property
    def n_mech(self) -> np.ndarray:
        return self.bd @ self.b

    @property
    def p_excited(self) -> np.ndarray:
        return self.sp @ self.sm

    def basis_index(self, excited: bool, n_cav: int, n_mech: int) -> int:
        _, nc, nm = self.trunc.dims
        return (int(excited) * nc + n_cav) * nm + n_mech


def _lowering(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=np.float64)), 1)


def build_operators(trunc: Truncation) -> OperatorSet:
    na, nc, nm = trunc.dims
    i_a, i_c, i_m = np.eye(na), np.eye(nc), np.eye(nm)
    sigma_minus = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g><e|

    def embed(atom, cav, mech):
        return np.kron(np.kron(atom, cav), mech).astype(np.complex128)

    a = embed(i_a, _lowering(nc), i_m)
    b = embed(i_a, i_c, _lowering(nm))
    sm = embed(sigma_minus, i_c, i_m)
    return OperatorSet(trunc, a, a.conj().T, b, b.conj().T, sm, sm.conj().T,
                       np.eye(trunc.dim, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class QuantumState:
    rho: np.ndarray
    dims: tuple[int, int, int]

    def expect(self, op: np.ndarray) -> float:
        value = np.vdot(op.conj().T, self.rho)  # tr(op rho)
        return float(value.real)

    def violations(self, trace_tol=1e-9, herm_tol=1e-12, eig_tol=1e-9) -> list[str]:
        out = []
        tr = np.trace(self.rho)
        if abs(tr - 1.0) > trace_tol:
            out.append(f"trace {tr:.3e}")
        herm = np.abs(self.rho - self.rho.conj().T).max()
        if herm > herm_tol:
            out.append(f"non-Hermitian by {herm:.3e}")
        lo = np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min()
        if lo < -eig_tol:
            out.append(f"negative eigenvalue {lo:.3e}")
        return out

    @property
    def mechanical_populations(self) -> np.ndarray:
        na, nc, nm = self.dims
        r = self.rho.reshape(na * nc, nm, na * nc, nm)
        return np.real(np.einsum("imim->m", r))

    @classmethod
    def product(cls, trunc: Truncation, excited: bool = False, n_cav: int = 0, mech=0) -> QuantumState:
        """Product state of an atom level, a cavity Fock state and a mechanical state.

        ``mech`` is a Fock number or an array of phonon populations (diagonal
        mechanical state).
        """
        na, nc, nm = trunc.dims
        if not 0 <= n_cav < nc:
            raise ValidationError(f"cavity Fock state {n_cav} outside truncation")
        atom = np.zeros((na, na))
        atom[int(excited), int(excited)] = 1.0
        cav = np.zeros((nc, nc))
        cav[n_cav, n_cav] = 1.0
        if np.ndim(mech) == 0:
            if not 0 <= int(mech) < nm:
                raise ValidationError(f"mechanical Fock state {mech} outside truncation")
            pm = np.zeros(nm)
            pm[int(mech)] = 1.0
        else:
            pm = np.zeros(nm)
            src = np.asarray(mech, dtype=np.float64)[:nm]
            pm[: src.shape[0]] = src
            pm /= pm.sum()
        rho = np.kron(np.kron(atom, cav), np.diag(pm)).astype(np.complex128)
        return cls(rho, trunc.dims)


def thermal_populations(m_th: float, n: int) -> np.ndarray:
    if m_th == 0:
        p = np.zeros(n)
        p[0] = 1.0
        return p
    p = (m_th / (m_th + 1.0)) ** np.arange(n, dtype=np.float64)
    return p / p.sum()


def build_hamiltonian(params: SystemParams, trunc: Truncation, ops: OperatorSet | None = None) -> np.ndarray:
    """Hamiltonian in the laser frame, units of the mechanical frequency."""
    ops = ops or build_operators(trunc)
    n_cav = ops.ad @ ops.a
    h = (ops.bd @ ops.b + 0.5 * ops.eye
         - params.delta_atom * (ops.sp @ ops.sm)
         - params.delta_cav * n_cav
         + params.g * (ops.sp @ ops.a + ops.sm @ ops.ad)
         - params.chi * n_cav @ (ops.b + ops.bd))
    drive = ops.a if params.pump is Pump.CAVITY else ops.sm
    h = h + 0.5 * params.omega_drive * (drive + drive.conj().T)
    return 0.5 * (h + h.conj().T)


def _collapse_ops(params, env, ops):
    env = env or ThermalEnv()
    channels = [
        (2.0 * params.kappa, ops.a),
        (params.gamma, ops.sm),
        (env.gamma_th * (env.m_th + 1.0), ops.b),
        (env.gamma_th * env.m_th, ops.bd),
    ]
    return [math.sqrt(rate) * c for rate, c in channels if rate > 0]


class _Generator:
    """Lindblad generator with precomputed effective Hamiltonian."""

    def __init__(self, params, env, ops):
        self.ops = ops
        self.h = build_hamiltonian(params, ops.trunc, ops)
        self.cs = _collapse_ops(params, env, ops)
        k = sum((c.conj().T @ c for c in self.cs), np.zeros_like(self.h))
        self.h_eff = self.h - 0.5j * k
        self.h_eff_dag = self.h_eff.conj().T

    def rhs(self, rho):
        out = -1j * (self.h_eff @ rho - rho @ self.h_eff_dag)
        for c in self.cs:
            out += c @ rho @ c.conj().T
        return out

    def superoperator(self) -> sp.csc_matrix:
        n = self.h.shape[0]
        eye = sp.identity(n, dtype=np.complex128, format="csr")
        h_eff = sp.csr_matrix(self.h_eff)
        L = -1j * (sp.kron(h_eff, eye) - sp.kron(eye, h_eff.conj()))
        for c in self.cs:
            cs = sp.csr_matrix(c)
            L = L + sp.kron(cs, cs.conj())
        L = sp.csc_matrix(L)
        L.eliminate_zeros()
        return L


def lindblad_rhs(params: SystemParams, env: ThermalEnv | None, ops: OperatorSet,
                 rho: QuantumState | np.ndarray) -> np.ndarray:
    """Time derivative of ``rho``: Hamiltonian part plus cavity, atomic and bath dissipators."""
    rho = rho.rho if isinstance(rho, QuantumState) else rho
    return _Generator(params, env, ops).rhs(rho)


def liouvillian(params: SystemParams, env: ThermalEnv | None, trunc: Truncation) -> sp.csc_matrix:
    return _Generator(params, env, build_operators(trunc)).superoperator()


@dataclass(frozen=True, eq=False)
class Evolution:
    state: QuantumState
    times: np.ndarray
    n_cav: np.ndarray
    n_mech: np.ndarray
    p_excited: np.ndarray
    p_top_mech: np.ndarray
    dt: float
    method: str


class _Observer:
    def __init__(self, ops, check_positivity, herm_tol=1e-10, eig_tol=1e-7, trace_tol=1e-8):
        self.ops = ops
        self.obs = [ops.n_cav, ops.n_mech, ops.p_excited]
        self.check_positivity = check_positivity
        self.herm_tol, self.eig_tol, self.trace_tol = herm_tol, eig_tol, trace_tol
        self.rows = []

    def __call__(self, t, rho):
        tr = np.trace(rho)
        if abs(tr - 1.0) > self.trace_tol or not np.isfinite(tr):
            raise TraceDriftError(f"trace drifted to {tr:.3e} at t = {t:.6g}")
        herm = np.abs(rho - rho.conj().T).max()
        if herm > self.herm_tol * max(1.0, np.abs(rho).max()):
            raise NumericalError(f"density matrix lost Hermiticity ({herm:.2e}) at t = {t:.6g}")
        if self.check_positivity:
            lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
            if lo < -self.eig_tol:
                raise NumericalError(f"negative eigenvalue {lo:.2e} at t = {t:.6g}")
        values = [np.vdot(o.conj().T, rho) for o in self.obs]
        if any(abs(v.imag) > 1e-10 for v in values):
            raise NumericalError(f"complex expectation value at t = {t:.6g}")
        state = QuantumState(rho, self.ops.trunc.dims)
        self.rows.append([t] + [v.real for v in values] + [state.mechanical_populations[-1]])


def _rk4(gen, rho, h, n_steps, every, observe):
    rhs = gen.rhs
    observe(0.0, rho)
    for step in range(1, n_steps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % every == 0 or step == n_steps:
            if np.linalg.norm(rho) > 1.0 + 1e-6:
                raise TraceDriftError(f"explicit step unstable at dt = {h:g} (|rho| grew)")
            observe(step * h, rho)
    return rho


# Radau IIA (3 stages): its stability function is the (2,3) Pade approximant of
# exp, written as a sum over the poles q of P(z)/Q(z) with weights P(q)/Q'(q).
_RADAU_P = np.array([1.0 / 20.0, 2.0 / 5.0, 1.0])  # highest power first
_RADAU_Q = np.array([-1.0 / 60.0, 3.0 / 20.0, -3.0 / 5.0, 1.0])
_RADAU_POLES = np.roots(_RADAU_Q)
_RADAU_WEIGHTS = np.polyval(_RADAU_P, _RADAU_POLES) / np.polyval(np.polyder(_RADAU_Q), _RADAU_POLES)


def _stiff(gen, rho, h, n_steps, every, observe):
    L = gen.superoperator()
    n = L.shape[0]
    eye = sp.identity(n, dtype=np.complex128, format="csc")
    solvers = [spla.splu(sp.csc_matrix(h * L - q * eye)) for q in _RADAU_POLES]
    dim = rho.shape[0]
    x = rho.reshape(-1)
    observe(0.0, rho)
    for step in range(1, n_steps + 1):
        x = sum(w * lu.solve(x) for w, lu in zip(_RADAU_WEIGHTS, solvers))
        if step % every == 0 or step == n_steps:
            r = x.reshape(dim, dim)
            observe(step * h, 0.5 * (r + r.conj().T))
    r = x.reshape(dim, dim)
    return 0.5 * (r + r.conj().T)


def evolve(params: SystemParams, env: ThermalEnv | None, trunc: Truncation, rho0: QuantumState,
           t_final: float, dt: float, n_samples: int = 201, method: str = "rk4",
           max_halvings: int = 4, check_positivity: bool = True) -> Evolution:
    """Integrate the master equation and sample ``<a+a>``, ``<b+b>``, ``<s+s->``.

    ``method='rk4'`` is fixed-step explicit RK4; on trace drift or blow-up the
    step is halved (up to ``max_halvings`` times) before giving up with
    :class:`TraceDriftError`.

    ``method='stiff'`` applies the L-stable 3-stage Radau IIA propagator via
    sparse LU solves. It allows steps far beyond the optical time scales, as
    needed to follow cooling at rates of 1e-9; anything faster than ``1/dt``
    (optical transients, mechanical oscillation) is damped rather than
    resolved, so only slowly varying observables are meaningful.
    """
    if t_final < 0 or not dt > 0:
        raise ValidationError("need t_final >= 0 and dt > 0")
    ops = build_operators(trunc)
    gen = _Generator(params, env, ops)
    if method not in ("rk4", "stiff"):
        raise ValidationError(f"unknown method {method!r}")
    for attempt in range(max_halvings + 1 if method == "rk4" else 1):
        intervals = max(1, n_samples - 1)
        n_steps = intervals * math.ceil(max(1, math.ceil(t_final / dt - 1e-12)) / intervals) if t_final > 0 else 0
        h = t_final / n_steps if n_steps else dt
        every = n_steps // intervals if n_steps else 1
        observe = _Observer(ops, check_positivity)
        try:
            if method == "rk4":
                rho = _rk4(gen, rho0.rho.copy(), h, n_steps, every, observe)
            else:
                rho = _stiff(gen, rho0.rho.copy(), h, n_steps, every, observe)
            break
        except TraceDriftError:
            if method != "rk4" or attempt == max_halvings:
                raise
            dt *= 0.5
    rows = np.array(observe.rows)
    return Evolution(QuantumState(rho, trunc.dims), rows[:, 0], rows[:, 1], rows[:, 2],
                     rows[:, 3], rows[:, 4], h, method)


def _ground(trunc, env):
    mech = thermal_populations(env.m_th, trunc.n_mech_max + 1) if env is not None else 0
    return QuantumState.product(trunc, mech=mech)


def steady_state(params: SystemParams, env: ThermalEnv | None = None, trunc: Truncation | None = None,
                 rho0: QuantumState | None = None, method: str = "solve", tol: float = 1e-8,
                 max_iter: int = 30, dt: float = 0.01, max_time: float = 1e4) -> QuantumState:
    """Stationary state of the master equation.

    ``method='solve'`` runs shifted inverse iteration on the sparse generator,
    seeded with ``rho0`` (default: atom and cavity empty, mechanics in the
    bath state). A shift of ~1e-14 of the generator norm separates the null
    space from relaxation rates down to ~1e-12 while staying well-conditioned
    enough for the iteration. If the null space is degenerate (e.g. a
    decoupled undamped oscillator) the seed's projection onto it is returned.

    ``method='evolve'`` integrates with RK4 until the observables change by
    less than ``1e-9`` relative over one mechanical period; feasible only
    when the slowest relaxation rate is not tiny.
    """
    trunc = trunc or Truncation()
    rho0 = rho0 or _ground(trunc, env)
    if params.kappa == 0 and params.gamma == 0 and (env is None or env.gamma_th == 0):
        raise ValidationError("no dissipation: steady state not unique")
    ops = build_operators(trunc)
    gen = _Generator(params, env, ops)
    dim = trunc.dim

    if method == "solve":
        L = gen.superoperator()
        norm = abs(L).sum(axis=0).max()
        shift = 1e-14 * norm
        lu = spla.splu(sp.csc_matrix(shift * sp.identity(L.shape[0], format="csc") - L))
        x = rho0.rho.reshape(-1).astype(np.complex128)
        for _ in range(max_iter):
            y = lu.solve(x)
            y /= np.trace(y.reshape(dim, dim))
            change = np.abs(y - x).max()
            x = y
            if change < 1e-13:
                break
        else:
            raise NonConvergenceError(f"inverse iteration stalled (last change {change:.2e})")
        rho = x.reshape(dim, dim)
    elif method == "evolve":
        rho = rho0.rho.copy()
        period = 2.0 * math.pi
        n_steps = max(1, math.ceil(period / dt))
        h = period / n_steps
        obs = [ops.n_cav, ops.n_mech, ops.p_excited]
        prev = np.array([np.vdot(o.conj().T, rho).real for o in obs])
        t = 0.0
        noop = lambda t, r: None  # noqa: E731
        while True:
            rho = _rk4(gen, rho, h, n_steps, n_steps, noop)
            t += period
            cur = np.array([np.vdot(o.conj().T, rho).real for o in obs])
            if np.all(np.abs(cur - prev) <= 1e-9 * np.maximum(np.abs(cur), 1e-300)):
                break
            if t > max_time:
                raise NonConvergenceError(f"no stationarity after t = {t:g}")
            prev = cur
    else:
        raise ValidationError(f"unknown method {method!r}")

    rho = 0.5 * (rho + rho.conj().T)
    resid = np.linalg.norm(gen.rhs(rho))
    if resid > tol:
        raise NonConvergenceError(f"steady-state residual {resid:.2e} > {tol:g}")
    return QuantumState(rho, trunc.dims)


def slow_rates(params: SystemParams, env: ThermalEnv | None, trunc: Truncation, k: int = 6) -> np.ndarray:
    """The ``k`` generator eigenvalues closest to zero, sorted by magnitude."""
    L = liouvillian(params, env, trunc)
    shift = 1e-14 * abs(L).sum(axis=0).max()
    vals = spla.eigs(L, k=k, sigma=shift, which="LM", return_eigenvectors=False)
    return vals[np.argsort(np.abs(vals))]


@dataclass(frozen=True)
class CoolingFit:
    gamma: float
    m_inf: float
    m0: float
    residual: float
    flagged: bool
    message: str = ""


def _exp_model(t, m_inf, m0, rate):
    return m_inf + (m0 - m_inf) * np.exp(-rate * t)


def fit_cooling_rate(times, values, residual_threshold: float = 1e-3, min_efolds: float = 3.0) -> CoolingFit:
    """Least-squares fit of ``m_inf + (m0 - m_inf) exp(-gamma t)``.

    Uses variable projection (for fixed ``gamma`` the model is linear in
    ``m_inf`` and ``m0``) to locate ``gamma`` robustly over both signs, then
    polishes all three parameters jointly. ``residual`` is the rms misfit
    divided by the data range. The fit is flagged, not rejected, when the
    series is flat, the residual exceeds ``residual_threshold``, or the
    window covers fewer than ``min_efolds`` e-foldings without a plateau.
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if t.shape != y.shape or t.shape[0] < 4:
        raise ValidationError("need at least 4 matching samples")
    span_y = float(y.max() - y.min())
    if span_y <= 1e-12 * max(1.0, float(np.abs(y).max())):
        return CoolingFit(math.nan, float(y.mean()), float(y[0]), 0.0, True,
                          "constant series: rate indeterminate")
    t0, T = t[0], t[-1] - t[0]
    tau = (t - t0) / T

    def projected(k):
        basis = np.column_stack([np.ones_like(tau), np.exp(-k * tau)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return coef, float(np.sum((basis @ coef - y) ** 2))

    grid = np.concatenate([-np.logspace(1.5, -3, 60), np.logspace(-3, 2.5, 80)])
    costs = [projected(k)[1] for k in grid]
    i = int(np.argmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best = minimize_scalar(lambda k: projected(k)[1], bounds=(min(lo, hi), max(lo, hi)),
                           method="bounded", options={"xatol": 1e-10})
    k = best.x if best.fun <= costs[i] else grid[i]
    (c0, c1), _ = projected(k)
    p0 = (c0, c0 + c1, k)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_exp_model, tau, y, p0=p0, maxfev=5000)
    except RuntimeError:
        popt = p0
    m_inf, m0, k = (float(v) for v in popt)
    resid = float(np.sqrt(np.mean((_exp_model(tau, m_inf, m0, k) - y) ** 2)) / span_y)
    rate = k / T

    notes = []
    if resid > residual_threshold:
        notes.append(f"residual {resid:.2e} above {residual_threshold:g}")
    efolds = abs(k)
    plateau = k > 0 and abs(y[-1] - m_inf) <= 0.05 * span_y
    if efolds < min_efolds and not plateau:
        notes.append(f"window spans only {efolds:.2f} e-foldings")
    return CoolingFit(rate, m_inf, m0, resid, bool(notes), "; ".join(notes))


def cutoff_changes(params: SystemParams, env: ThermalEnv | None, trunc: Truncation,
                   base: QuantumState | None = None) -> dict[str, float]:
    """Relative change of steady observables when the cutoffs grow by (1, 4)."""
    base = base or steady_state(params, env, trunc)
    big_trunc = trunc.enlarged()
    big = steady_state(params, env, big_trunc)
    small_ops, big_ops = build_operators(trunc), build_operators(big_trunc)
    out = {}
    for name in ("n_cav", "n_mech", "p_excited"):
        a = base.expect(getattr(small_ops, name))
        b = big.expect(getattr(big_ops, name))
        out[name] = abs(b - a) / abs(b) if b != 0 else abs(b - a)
    return out


@dataclass(frozen=True)
class Comparison:
    params: SystemParams
    env: ThermalEnv | None
    rates: RateSet
    gamma_analytic: float
    m_inf_analytic: float | None
    fit: CoolingFit
    n_mech_ss: float | None
    n_cav_ss: float | None
    cutoff: dict = field(default_factory=dict)
    slowest_rate: float = math.nan
    series: Evolution | None = None

    @property
    def sign_agrees(self) -> bool:
        return math.copysign(1.0, self.fit.gamma) == math.copysign(1.0, self.gamma_analytic)

    @property
    def gamma_rel_err(self) -> float:
        return abs(self.fit.gamma - self.gamma_analytic) / abs(self.gamma_analytic)

    @property
    def m_inf_rel_err(self) -> float | None:
        if self.m_inf_analytic is None or self.n_mech_ss is None:
            return None
        return abs(self.n_mech_ss - self.m_inf_analytic) / self.m_inf_analytic

    @property
    def cutoff_ok(self) -> bool:
        return all(v < 0.01 for v in self.cutoff.values())

    def report(self) -> dict[str, object]:
        out = {
            "delta_cav": self.params.delta_cav,
            "delta_atom": self.params.delta_atom,
            "gamma_analytic": self.gamma_analytic,
            "gamma_fit": self.fit.gamma,
            "gamma_rel_err": self.gamma_rel_err,
            "sign_agrees": self.sign_agrees,
            "fit_residual": self.fit.residual,
            "fit_flagged": self.fit.flagged,
            "slowest_rate": self.slowest_rate,
        }
        if self.m_inf_analytic is not None:
            out["m_inf_analytic"] = self.m_inf_analytic
            out["n_mech_ss"] = self.n_mech_ss
            out["m_inf_rel_err"] = self.m_inf_rel_err
            out["n_cav_ss"] = self.n_cav_ss
            out["s2_analytic"] = self.rates.s2
            for k, v in self.cutoff.items():
                out[f"cutoff_change_{k}"] = v
        return out


def compare(params: SystemParams, env: ThermalEnv | None = None, trunc: Truncation | None = None,
            m0: int = 1, n_samples: int = 100, efolds: float = 6.0, check_cutoff: bool = True,
            top_limit: float = 1e-4) -> Comparison:
    """Run the oracle at one point and line it up against the closed-form rates.

    The cooling rate is fitted to ``<b+b>(t)`` from the mechanical Fock state
    ``m0`` with the stiff propagator; the window is ``efolds`` times the
    generator's slowest population-relaxation time, cut short while the
    ladder approaches the truncation (heating points). Steady observables are
    compared only where the closed form predicts cooling, and a cutoff
    dependence above 1 % raises :class:`NumericalError`.
    """
    trunc = trunc or Truncation()
    rates = transition_rates(params)
    if env is not None:
        th = thermal_rates(rates, env)
        gamma_an, m_inf_an = th.gamma_prime, th.m_inf_prime
    else:
        gamma_an, m_inf_an = rates.gamma_cool, rates.m_inf

    n_mech_ss = n_cav_ss = None
    cutoff = {}
    if m_inf_an is not None:
        ss = steady_state(params, env, trunc)
        ops = build_operators(trunc)
        n_mech_ss, n_cav_ss = ss.expect(ops.n_mech), ss.expect(ops.n_cav)
        if check_cutoff:
            cutoff = cutoff_changes(params, env, trunc, ss)
            if not all(v < 0.01 for v in cutoff.values()):
                raise NumericalError(f"steady observables depend on the cutoff: {cutoff}")

    vals = slow_rates(params, env, trunc)
    nonzero = [v for v in vals if abs(v) > 1e-9 * abs(vals).max() and abs(v.imag) < 0.5]
    if not nonzero:
        raise NumericalError("no slow relaxation mode found")
    slowest = min(abs(v.real) for v in nonzero)

    rho0 = QuantumState.product(trunc, mech=m0)
    cap = trunc.n_mech_max / 4.0
    t_final = efolds / slowest
    for _ in range(3):
        ev = evolve(params, env, trunc, rho0, t_final, t_final / n_samples,
                    n_samples=n_samples + 1, method="stiff")
        over = np.nonzero((ev.n_mech > cap) | (ev.p_top_mech > top_limit))[0]
        if over.size == 0 or over[0] >= n_samples // 2:
            break
        t_final = ev.times[max(over[0] - 1, 4)]
    keep = slice(None) if over.size == 0 else slice(0, over[0])
    if ev.times[keep].shape[0] < 8:
        raise NumericalError("trajectory leaves the truncation almost at once; raise n_mech_max")
    fit = fit_cooling_rate(ev.times[keep], ev.n_mech[keep])
    return Comparison(params, env, rates, gamma_an, m_inf_an, fit, n_mech_ss, n_cav_ss,
                      cutoff, slowest, ev)


def write_series_csv(ev: Evolution, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["t", "n_cav", "n_mech", "p_excited"])
    for row in zip(ev.times, ev.n_cav, ev.n_mech, ev.p_excited):
        writer.writerow([f"{x:.11e}" for x in row])


def summary_block(values: dict[str, object]) -> str:
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = f"{value:.11e}"
        elif value is None:
            text = "none"
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
