import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optoscatter.errors import ValidationError
from optoscatter.params import (
    Pump,
    SystemParams,
    dressed_spectrum,
    load_params,
    params_from_mapping,
    read_config,
    validate,
)

finite = st.floats(-50, 50, allow_nan=False)
positive = st.floats(0, 20, allow_nan=False)


def test_fig3_point_has_no_warnings(fig3):
    assert validate(fig3) == []


def test_strong_coupling_warns():
    p = SystemParams(g=2, kappa=7, gamma=0.05, chi=0.5, omega_drive=1)
    (w,) = validate(p, eta_max=0.3)
    assert "perturbative regime violated" in w


def test_threshold_is_configurable():
    p = SystemParams(g=2, kappa=7, gamma=0.05, chi=0.5, omega_drive=1)
    assert validate(p, eta_max=0.6) == []


def test_other_warnings():
    assert any("atom pump" in w for w in validate(SystemParams(0, 1, 1, 0.01, 1, pump="atom")))
    assert any("no decay" in w for w in validate(SystemParams(1, 0, 0, 0.01, 1)))


@pytest.mark.parametrize("field", ["g", "kappa", "gamma", "chi", "omega_drive"])
def test_negative_rates_rejected(field):
    values = dict(g=1, kappa=1, gamma=1, chi=0.1, omega_drive=1)
    values[field] = -1
    with pytest.raises(ValidationError):
        SystemParams(**values)


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        SystemParams(g=math.nan, kappa=1, gamma=1, chi=0.1, omega_drive=1)


def test_delta_ca_is_derived():
    p = SystemParams(g=2, kappa=1, gamma=0.1, chi=0, omega_drive=0.05, delta_cav=3, delta_atom=1)
    assert p.delta_ca == -2
    assert "delta_ca" not in p.as_dict()


def test_resonant_spectrum():
    s = dressed_spectrum(SystemParams(2, 1, 0.1, 0, 0))
    assert s.omega_plus == pytest.approx(2) and s.omega_minus == pytest.approx(-2)
    assert s.theta == pytest.approx(math.pi / 2)


def test_decoupled_spectrum():
    s = dressed_spectrum(SystemParams(0, 1, 0.1, 0, 0, delta_cav=1, delta_atom=3))
    assert (s.omega_plus, s.omega_minus) == (pytest.approx(-1), pytest.approx(-3))


def test_detuned_spectrum():
    s = dressed_spectrum(SystemParams(2, 1, 0.1, 0, 0, delta_cav=0, delta_atom=-2))
    assert s.omega_plus == pytest.approx(1 + math.sqrt(5), abs=1e-14)
    assert s.omega_minus == pytest.approx(1 - math.sqrt(5), abs=1e-14)


@settings(max_examples=300, deadline=None)
@given(g=positive, dc=finite, da=finite)
def test_root_invariants(g, dc, da):
    p = SystemParams(g, 1, 0.1, 0, 0, delta_cav=dc, delta_atom=da)
    s = dressed_spectrum(p)
    scale = max(1.0, abs(dc), abs(da), g) ** 2
    assert s.omega_plus >= s.omega_minus
    assert abs(s.omega_plus + s.omega_minus + dc + da) <= 1e-12 * max(1.0, abs(dc) + abs(da))
    assert abs(s.omega_plus * s.omega_minus - (da * dc - g * g)) <= 1e-12 * scale
    # the splitting is resolvable only down to the rounding of the roots themselves
    ulp = 4 * math.ulp(max(abs(s.omega_plus), abs(s.omega_minus)))
    assert s.omega_plus - s.omega_minus >= 2 * g * (1 - 1e-12) - ulp
    assert 0 <= s.theta <= math.pi
    assert dressed_spectrum(p) == s


def test_spectrum_stable_at_large_detuning():
    s = dressed_spectrum(SystemParams(1e-3, 1, 0.1, 0, 0, delta_cav=1e8, delta_atom=1e8 + 1))
    # small root must not be lost to cancellation
    assert s.omega_plus * s.omega_minus == pytest.approx(1e8 * (1e8 + 1) - 1e-6, rel=1e-12)


def test_config_file(tmp_path):
    path = tmp_path / "p.cfg"
    path.write_text("# comment\ng = 2\nkappa: 7\ngamma = 0.05  # inline\nchi = 0.1\nomega_drive = 1\n"
                    "delta_cav = 0\ndelta_atom = 1\npump = 'atom'\n")
    p = load_params(path)
    assert p == SystemParams(2, 7, 0.05, 0.1, 1, 0, 1, Pump.ATOM)
    assert read_config(path)["pump"] == "atom"
    q = load_params(path, {"delta_cav": "2.5", "pump": "cavity", "g": None})
    assert q.delta_cav == 2.5 and q.pump is Pump.CAVITY and q.g == 2


def test_config_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("g 2\n")
    with pytest.raises(ValidationError):
        read_config(path)
    with pytest.raises(ValidationError, match="unknown"):
        params_from_mapping({"g": 1, "nu": 1})
    with pytest.raises(ValidationError, match="missing"):
        params_from_mapping({"g": 1})
    with pytest.raises(ValidationError, match="pump"):
        params_from_mapping({"g": 1, "kappa": 1, "gamma": 1, "chi": 0, "omega_drive": 1, "pump": "both"})
    with pytest.raises(ValidationError):
        params_from_mapping({"g": "x", "kappa": 1, "gamma": 1, "chi": 0, "omega_drive": 1})
