import io
import math

import numpy as np
import pytest

from optoscatter.errors import NonConvergenceError, NumericalError, TraceDriftError, ValidationError
from optoscatter.oracle import (
    QuantumState,
    Truncation,
    build_hamiltonian,
    build_operators,
    compare,
    cutoff_changes,
    evolve,
    fit_cooling_rate,
    lindblad_rhs,
    liouvillian,
    steady_state,
    summary_block,
    thermal_populations,
    write_series_csv,
)
from optoscatter.params import Pump, SystemParams, dressed_spectrum
from optoscatter.rates import ThermalEnv, excitation_probability

SMALL = Truncation(1, 3)


def random_state(trunc, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(trunc.dim, trunc.dim)) + 1j * rng.normal(size=(trunc.dim, trunc.dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def test_truncation_limits():
    assert Truncation(2, 14).dim == 90
    with pytest.raises(ValidationError):
        Truncation(0, 3)
    with pytest.raises(ValidationError):
        Truncation(10, 30)
    assert Truncation(10, 30, max_dim=1000).dim == 682


def test_operator_algebra():
    trunc = Truncation(2, 4)
    ops = build_operators(trunc)
    na, nc, nm = trunc.dims
    np.testing.assert_array_equal(ops.sm @ ops.sp + ops.sp @ ops.sm, ops.eye)
    for low, high, top in ((ops.a, ops.ad, "cav"), (ops.b, ops.bd, "mech")):
        comm = low @ high - high @ low - ops.eye
        keep = [i for i in range(trunc.dim)
                if (i // nm) % nc != nc - 1] if top == "cav" else [i for i in range(trunc.dim) if i % nm != nm - 1]
        assert np.abs(comm[np.ix_(keep, keep)]).max() < 1e-14
        assert np.abs(comm).max() > 1  # the cutoff artifact sits on the top level
    # atom is the slowest index
    assert ops.basis_index(True, 0, 0) == nc * nm
    assert (ops.sp @ ops.sm)[ops.basis_index(True, 1, 2), ops.basis_index(True, 1, 2)] == 1


def test_hamiltonian_diagonal_limit():
    trunc = Truncation(2, 3)
    p = SystemParams(0, 1, 1, 0, 0, delta_cav=0.7, delta_atom=-1.3)
    h = build_hamiltonian(p, trunc)
    expected = sorted(m + 0.5 - p.delta_atom * e - p.delta_cav * n
                      for e in (0, 1) for n in range(3) for m in range(4))
    np.testing.assert_allclose(np.linalg.eigvalsh(h), expected, atol=1e-13)


def test_hamiltonian_hermitian():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = SystemParams(*rng.uniform(0, 3, 5), *rng.uniform(-3, 3, 2), pump=rng.choice(["cavity", "atom"]))
        h = build_hamiltonian(p, Truncation(2, 4))
        assert np.abs(h - h.conj().T).max() == 0


def test_single_excitation_blocks():
    trunc = Truncation(1, 3)
    ops = build_operators(trunc)
    p = SystemParams(1.3, 1, 1, 0, 0, delta_cav=0.4, delta_atom=-0.9)
    h = build_hamiltonian(p, trunc, ops)
    s = dressed_spectrum(p)
    for m in range(4):
        idx = [ops.basis_index(True, 0, m), ops.basis_index(False, 1, m)]
        ev = np.linalg.eigvalsh(h[np.ix_(idx, idx)])
        np.testing.assert_allclose(ev, [s.omega_minus + m + 0.5, s.omega_plus + m + 0.5], atol=1e-10)


def test_rhs_examples():
    ops = build_operators(SMALL)
    p = SystemParams(2, 1, 0.5, 0.1, 0, delta_cav=1, delta_atom=2)
    ground = QuantumState.product(SMALL)
    assert np.abs(lindblad_rhs(p, None, ops, ground)).max() < 1e-15
    fock1 = QuantumState.product(SMALL, mech=1)
    assert np.abs(lindblad_rhs(p, ThermalEnv(), ops, fock1)).max() < 1e-15
    env = ThermalEnv(m_th=0.5, gamma_th=0.1)
    driven = p.replace(omega_drive=0.7)
    for seed in range(3):
        rho = random_state(SMALL, seed)
        assert abs(np.trace(lindblad_rhs(driven, env, ops, rho))) < 1e-10


def test_superoperator_matches_rhs():
    ops = build_operators(SMALL)
    p = SystemParams(2, 1, 0.5, 0.1, 0.3, delta_cav=1, delta_atom=2, pump=Pump.ATOM)
    env = ThermalEnv(m_th=0.5, gamma_th=0.1)
    rho = random_state(SMALL, 4)
    L = liouvillian(p, env, SMALL)
    np.testing.assert_allclose((L @ rho.reshape(-1)).reshape(rho.shape), lindblad_rhs(p, env, ops, rho), atol=1e-13)


def test_state_checks():
    s = QuantumState.product(SMALL, excited=True, n_cav=1, mech=2)
    assert s.violations() == []
    bad = QuantumState(2 * s.rho, s.dims)
    assert any("trace" in v for v in bad.violations())
    with pytest.raises(ValidationError):
        QuantumState.product(SMALL, mech=9)
    mixed = QuantumState.product(SMALL, mech=[0.5, 0.5])
    np.testing.assert_allclose(mixed.mechanical_populations, [0.5, 0.5, 0, 0])


def test_spontaneous_decay():
    p = SystemParams(0, 1, 0.8, 0, 0)
    ev = evolve(p, None, SMALL, QuantumState.product(SMALL, excited=True), 2.0, 0.01, n_samples=11)
    np.testing.assert_allclose(ev.p_excited, np.exp(-0.8 * ev.times), atol=1e-6)
    assert len(ev.times) == 11 and ev.times[-1] == pytest.approx(2.0)


def test_cavity_decay_uses_twice_kappa():
    p = SystemParams(0, 0.6, 0, 0, 0)
    ev = evolve(p, None, SMALL, QuantumState.product(SMALL, n_cav=1), 2.0, 0.01, n_samples=11)
    np.testing.assert_allclose(ev.n_cav, np.exp(-1.2 * ev.times), atol=1e-6)


def test_trace_drift_aborts():
    p = SystemParams(2, 300, 0.5, 0, 0.1)
    with pytest.raises(TraceDriftError):
        evolve(p, None, SMALL, QuantumState.product(SMALL), 1.0, 0.5, max_halvings=2)


def test_step_halving_recovers():
    p = SystemParams(2, 30, 0.5, 0, 0.1)
    ev = evolve(p, None, SMALL, QuantumState.product(SMALL), 1.0, 0.1, n_samples=3)
    assert ev.dt < 0.1


def test_stiff_matches_rk4():
    p = SystemParams(1.5, 0.8, 0.3, 0.1, 0.5, delta_cav=0.5, delta_atom=1.0)
    rho0 = QuantumState.product(SMALL, mech=1)
    a = evolve(p, None, SMALL, rho0, 4.0, 0.002, n_samples=5, method="rk4")
    b = evolve(p, None, SMALL, rho0, 4.0, 0.002, n_samples=5, method="stiff")
    for name in ("n_cav", "n_mech", "p_excited"):
        np.testing.assert_allclose(getattr(a, name), getattr(b, name), atol=1e-9)
    np.testing.assert_allclose(a.state.rho, b.state.rho, atol=1e-9)


def test_steady_state_without_drive_is_thermal():
    env = ThermalEnv(m_th=0.7, gamma_th=0.05)
    trunc = Truncation(1, 6)
    ss = steady_state(SystemParams(2, 1, 0.1, 0.05, 0, delta_cav=1, delta_atom=1), env, trunc)
    expected = np.kron(np.kron(np.diag([1.0, 0]), np.diag([1.0, 0])), np.diag(thermal_populations(0.7, 7)))
    np.testing.assert_allclose(ss.rho, expected, atol=1e-10)


def test_steady_state_methods_agree():
    p = SystemParams(2, 1, 0.1, 0, 0.2, delta_cav=0.5, delta_atom=-1.5)
    trunc = Truncation(2, 1)
    a = steady_state(p, None, trunc, method="solve")
    b = steady_state(p, None, trunc, method="evolve", dt=0.01)
    np.testing.assert_allclose(a.rho, b.rho, atol=1e-8)
    assert a.violations() == []


def test_steady_state_errors():
    p = SystemParams(2, 1, 0.1, 0, 0.2, delta_cav=0.5, delta_atom=-1.5)
    with pytest.raises(NonConvergenceError):
        steady_state(p, None, Truncation(2, 1), method="evolve", max_time=5)
    with pytest.raises(ValidationError):
        steady_state(p.replace(kappa=0, gamma=0), None, SMALL)


def test_weak_drive_population_matches_excitation_probability():
    p = SystemParams(2, 1, 0.1, 0, 0.05, delta_cav=1, delta_atom=-1)
    trunc = Truncation(2, 1)
    ss = steady_state(p, None, trunc)
    assert ss.expect(build_operators(trunc).n_cav) == pytest.approx(excitation_probability(p), rel=0.05)


def test_fit_recovers_exact_model():
    t = np.linspace(0, 20, 200)
    fit = fit_cooling_rate(t, 2 * np.exp(-0.5 * t) + 0.1)
    assert fit.gamma == pytest.approx(0.5, abs=1e-6)
    assert fit.m_inf == pytest.approx(0.1, abs=1e-6)
    assert fit.m0 == pytest.approx(2.1, abs=1e-6)
    assert not fit.flagged and fit.residual < 1e-9


def test_fit_heating_and_tiny_rates():
    t = np.linspace(0, 4e8, 100)
    y = 1 + 3 * np.expm1(4e-9 * t)
    fit = fit_cooling_rate(t, y)
    assert fit.gamma == pytest.approx(-4e-9, rel=1e-6)


def test_fit_flags():
    t = np.linspace(0, 10, 50)
    const = fit_cooling_rate(t, np.full(50, 0.3))
    assert const.flagged and math.isnan(const.gamma)
    wiggle = fit_cooling_rate(t, np.sin(3 * t))
    assert wiggle.flagged and wiggle.residual > 1e-3
    short = fit_cooling_rate(t, np.exp(-0.01 * t))
    assert short.flagged and "e-folding" in short.message
    assert short.gamma == pytest.approx(0.01, rel=1e-6)
    with pytest.raises(ValidationError):
        fit_cooling_rate([0, 1], [1, 2])


def test_csv_and_summary():
    ev = evolve(SystemParams(0, 1, 0.8, 0, 0), None, SMALL, QuantumState.product(SMALL, excited=True),
                1.0, 0.1, n_samples=3)
    buf = io.StringIO()
    write_series_csv(ev, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,n_cav,n_mech,p_excited" and len(lines) == 4
    assert summary_block({"a": 1.5, "b": True, "c": None, "d": "x"}) == (
        "a = 1.50000000000e+00\nb = true\nc = none\nd = x\n")


def test_cutoff_check_detects_small_truncation():
    p = SystemParams(2, 7, 0.05, 0.02, 0.1, delta_cav=0, delta_atom=1)
    env = ThermalEnv(m_th=3, gamma_th=1e-3)
    changes = cutoff_changes(p, env, Truncation(1, 4))
    assert changes["n_mech"] > 0.01


@pytest.mark.slow
def test_cooling_trajectory_from_fock_three(scaled):
    cmp = compare(scaled, m0=3, check_cutoff=False)
    assert cmp.series.n_mech[0] == pytest.approx(3)
    assert cmp.series.n_mech[-1] < 0.1
    assert np.all(np.diff(cmp.series.n_mech) < 0)
    assert cmp.gamma_rel_err < 0.10 and not cmp.fit.flagged


@pytest.mark.slow
def test_deviation_shrinks_with_coupling():
    base = SystemParams(2, 7, 0.05, 0.08, 0.025, delta_cav=0, delta_atom=1)
    errs = [compare(base.replace(chi=chi), check_cutoff=False).gamma_rel_err for chi in (0.08, 0.04)]
    assert errs[1] < errs[0] / 2


@pytest.mark.slow
def test_compare_rejects_cutoff_dependence():
    p = SystemParams(2, 7, 0.05, 0.02, 0.1, delta_cav=0, delta_atom=1)
    with pytest.raises(NumericalError, match="cutoff"):
        compare(p, ThermalEnv(m_th=3, gamma_th=1e-8), Truncation(1, 4))
