import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from leakage_control.errors import DimensionError
from leakage_control.quantum import (
    adjoint,
    basis_state,
    build_annihilation,
    build_number,
    build_pauli,
    expectation,
    interaction_picture,
    is_hermitian,
    make_state,
)


def test_annihilation_dim2():
    np.testing.assert_array_equal(build_annihilation(2), [[0, 1], [0, 0]])


def test_annihilation_dim3_entries():
    a = build_annihilation(3)
    expected = np.zeros((3, 3))
    expected[0, 1] = 1
    expected[1, 2] = np.sqrt(2)
    np.testing.assert_array_equal(a, expected)


def test_creation_action():
    out = adjoint(build_annihilation(4)) @ basis_state(2, 4)
    np.testing.assert_allclose(out, np.sqrt(3) * basis_state(3, 4), atol=0)


@pytest.mark.parametrize("dim", [0, 1, 2.5])
def test_annihilation_rejects_bad_dim(dim):
    with pytest.raises(DimensionError):
        build_annihilation(dim)


def test_pauli_relations():
    plus, minus = build_pauli("plus"), build_pauli("minus")
    np.testing.assert_array_equal(plus @ minus, np.diag([1, 0]))
    np.testing.assert_array_equal(build_pauli("z"), np.diag([1, -1]))
    np.testing.assert_array_equal(plus + minus, build_pauli("x"))
    np.testing.assert_allclose((build_pauli("x") + 1j * build_pauli("y")) / 2, plus)
    with pytest.raises(ValueError):
        build_pauli("w")


def test_expectation_examples():
    a = build_annihilation(6)
    assert expectation(basis_state(0, 6), build_number(6)) == 0
    sup = make_state([1, 1], dim=6)
    assert expectation(sup, a + adjoint(a)) == pytest.approx(1, abs=1e-12)
    assert expectation(basis_state(1, 6), a @ adjoint(a)) == pytest.approx(2, abs=1e-12)
    with pytest.raises(DimensionError):
        expectation(basis_state(0, 3), a)


def test_interaction_picture_identity_at_zero():
    a = build_annihilation(5)
    np.testing.assert_array_equal(interaction_picture(a, np.arange(5) * 0.3, 0.0), a)


def test_interaction_picture_oscillator():
    omega, t, dim = 0.37, 2.9, 8
    a = build_annihilation(dim)
    s = interaction_picture(a + adjoint(a), omega * np.arange(dim), t)
    expected = np.exp(-1j * omega * t) * a + np.exp(1j * omega * t) * adjoint(a)
    np.testing.assert_allclose(s, expected, atol=1e-12)


def test_interaction_picture_spin_matches_matrix_exponential():
    eps, t = 0.8, 1.7
    h0 = eps * build_pauli("z")
    direct = expm(1j * h0 * t) @ build_pauli("plus") @ expm(-1j * h0 * t)
    np.testing.assert_allclose(direct, np.exp(2j * eps * t) * build_pauli("plus"), atol=1e-12)
    np.testing.assert_allclose(interaction_picture(build_pauli("plus"), [eps, -eps], t), direct, atol=1e-12)


def test_interaction_picture_dim_mismatch():
    with pytest.raises(DimensionError):
        interaction_picture(build_annihilation(3), [0, 1], 1.0)


finite = st.floats(-20, 20, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(t=finite, s=finite, seed=st.integers(0, 2**31))
def test_interaction_picture_group_property(t, s, seed):
    rng = np.random.default_rng(seed)
    op = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    energies = rng.uniform(-1, 1, size=5)
    lhs = interaction_picture(op, energies, t + s)
    rhs = interaction_picture(interaction_picture(op, energies, t), energies, s)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(op))) * 10


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), dim=st.integers(2, 8))
def test_hermitian_expectation_is_real(seed, dim):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = m + adjoint(m)
    state = make_state(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    assert abs(np.linalg.norm(state) - 1) <= 1e-12
    assert is_hermitian(h)
    assert abs(expectation(state, h).imag) <= 1e-12 * max(1.0, np.abs(h).max())


def test_adjoint_involution():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_array_equal(adjoint(adjoint(m)), m)
