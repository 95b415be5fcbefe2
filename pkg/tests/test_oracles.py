import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakage_control.errors import TruncationError
from leakage_control.oracles import (
    OracleSpec,
    displaced_oscillator_numeric,
    example1_exact,
    example1_leakage,
    example1_tcl2,
    example2_exact,
    example2_leakage,
    example2_tcl2,
    jc_numeric,
    jc_populations,
)

KINDS = ("ground", "first", "superposition")
OMEGA = 0.2


def spec1(kind, ratio=0.1):
    return OracleSpec("pure_leakage", ratio * OMEGA, OMEGA, kind)


def spec2(lam, eps, omega=1.0):
    return OracleSpec("spin_bath_rwa", lam, omega, epsilon=eps)


def test_spec_validation():
    with pytest.raises(ValueError):
        OracleSpec("nope", 0.1, 1.0)
    with pytest.raises(ValueError):
        OracleSpec("pure_leakage", 0.1, 1.0, "second")
    with pytest.raises(ValueError):
        OracleSpec("spin_bath_rwa", 0.1, 1.0)
    with pytest.raises(ValueError):
        example2_exact(spec1("ground"), 0.0)


@pytest.mark.parametrize("kind", KINDS)
def test_example1_origin(kind):
    assert example1_exact(spec1(kind), 0.0) == 1.0
    assert example1_tcl2(spec1(kind), 0.0) == 1.0


def test_example1_values():
    t = np.pi / OMEGA
    assert example1_exact(spec1("ground"), t) == pytest.approx(np.exp(-0.04), rel=1e-14)
    assert example1_exact(spec1("first"), 2 * np.pi / OMEGA) == pytest.approx(1.0, abs=1e-14)
    sup = example1_tcl2(spec1("superposition"), t)
    assert sup == pytest.approx(np.exp(-0.04 * 2), rel=1e-14)
    assert example1_tcl2(spec1("first"), t) == pytest.approx(np.exp(-0.12), rel=1e-14)


def test_example1_ground_tcl2_is_exact():
    t = np.linspace(0, 60, 301)
    np.testing.assert_allclose(example1_tcl2(spec1("ground", 0.3), t), example1_exact(spec1("ground", 0.3), t),
                               rtol=1e-15)


def test_example1_weak_coupling_limit():
    t = np.linspace(0, 100, 51)
    for kind in KINDS:
        np.testing.assert_allclose(example1_tcl2(spec1(kind, 1e-9), t), 1.0, atol=1e-15)


def test_example1_unknown_kind():
    with pytest.raises(ValueError):
        example1_leakage("third", OMEGA, 1.0)


@pytest.mark.parametrize("kind", ["first", "superposition"])
def test_example1_lambda4_scaling(kind):
    t = np.linspace(0, 2 * np.pi / OMEGA, 2001)
    gap = [np.max(np.abs(example1_tcl2(spec1(kind, r), t) - example1_exact(spec1(kind, r), t))) for r in (0.1, 0.05)]
    assert 12 <= gap[0] / gap[1] <= 20


@pytest.mark.parametrize("kind", KINDS)
def test_displaced_oracle_matches_closed_form(kind):
    t = np.linspace(0, 2 * np.pi / OMEGA, 97)
    num = displaced_oscillator_numeric(0.1 * OMEGA, OMEGA, t, kind)
    np.testing.assert_allclose(num, example1_exact(spec1(kind), t), atol=1e-8)


def test_displaced_oracle_revival_and_free():
    period = 2 * np.pi / OMEGA
    assert displaced_oscillator_numeric(0.1 * OMEGA, OMEGA, [period, 3 * period])[0] == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(displaced_oscillator_numeric(0.0, OMEGA, np.linspace(0, 40, 9)), 1.0, atol=1e-14)


def test_displaced_oracle_limits():
    with pytest.raises(ValueError):
        displaced_oscillator_numeric(0.1, 1.0, [1.0], dim=8)
    with pytest.raises(TruncationError):
        displaced_oscillator_numeric(30.0, 1.0, [np.pi], max_dim=32)


@pytest.mark.parametrize("lam,eps", [(0.05, 1.5), (0.1, 0.7), (0.3, 1.0), (0.02, 1.2)])
def test_jc_matches_rabi(lam, eps):
    t = np.linspace(0, 200, 401)
    np.testing.assert_allclose(jc_numeric(spec2(lam, eps), t), example2_exact(spec2(lam, eps), t), atol=1e-12)


def test_printed_sqrt_denominator_is_not_a_probability():
    spec = spec2(0.1, 1.5)
    w = np.sqrt((spec.detuning / 2) ** 2 + spec.lam**2)
    t = np.linspace(0, 200, 401)
    wrong = 1 - np.sin(w * t) ** 2 * spec.lam**2 / w
    assert np.max(np.abs(wrong - jc_numeric(spec, t))) > 1e-2


def test_rabi_resonance_and_decoupled():
    lam = 0.1
    res = spec2(lam, 1.0)
    t = np.linspace(0, 50, 11)
    np.testing.assert_allclose(example2_exact(res, t), 1 - np.sin(lam * t) ** 2, atol=1e-15)
    assert jc_numeric(res, np.pi / (2 * lam)) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_array_equal(example2_exact(spec2(0.0, 1.3), t), 1.0)
    assert example2_exact(spec2(0.0, 1.0), 3.0) == 1.0


def test_jc_decoupling_limit():
    t = np.linspace(0, 100, 501)
    gaps = [1 - np.min(jc_numeric(spec2(0.1, 1 + d), t)) for d in (1.0, 10.0, 100.0)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-5


def test_jc_probability_conservation():
    pops = jc_populations(spec2(0.2, 1.3), np.linspace(0, 80, 161))
    np.testing.assert_allclose(pops.sum(axis=-1), 1.0, atol=1e-12)
    np.testing.assert_allclose(pops[..., 0], jc_numeric(spec2(0.2, 1.3), np.linspace(0, 80, 161)), atol=1e-12)


def test_example2_tcl2_values():
    spec = spec2(0.05, 1.5)  # lam^2 / detuning^2 = 0.01
    t = np.linspace(0, 100, 201)
    b = example2_tcl2(spec, t)
    assert b[0] == 1.0
    assert np.all(b >= np.exp(-0.04) - 1e-15) and np.all(b <= 1)
    np.testing.assert_allclose(example2_leakage(spec, t), 4 * np.sin(0.25 * t) ** 2 / 0.25)


def test_example2_resonance_raises():
    with pytest.raises(ZeroDivisionError, match="jc_numeric"):
        example2_tcl2(spec2(0.1, 1.0), 1.0)


@pytest.mark.parametrize("eps", [1.5, 0.6])
def test_example2_lambda4_scaling(eps):
    detuning = eps - 1.0
    t = np.linspace(0, 4 * np.pi / abs(detuning), 2001)
    gaps = []
    for ratio in (0.1, 0.05):
        spec = spec2(ratio * abs(detuning), eps)
        gaps.append(np.max(np.abs(example2_tcl2(spec, t) - jc_numeric(spec, t))))
    assert 12 <= gaps[0] / gaps[1] <= 20


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(0, 2), eps=st.floats(0.1, 3), t=st.floats(0, 1e3))
def test_oracle_bounds(lam, eps, t):
    for value in (jc_numeric(spec2(lam, eps), t), example2_exact(spec2(lam, eps), t)):
        assert -1e-12 <= value <= 1 + 1e-12
    for kind in KINDS:
        spec = OracleSpec("pure_leakage", lam * 0.1, 1.0, kind)
        for value in (example1_exact(spec, t), example1_tcl2(spec, t)):
            assert 0 <= value <= 1 + 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_example1_periodic(kind):
    t = np.linspace(0, 50, 101)
    period = 2 * np.pi / OMEGA
    for fn in (example1_exact, example1_tcl2):
        np.testing.assert_allclose(fn(spec1(kind, 0.3), t + period), fn(spec1(kind, 0.3), t), atol=1e-10)
