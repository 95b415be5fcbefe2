"""Dense operators over truncated level spaces.

Operators are plain complex ``numpy`` arrays of shape ``(dim, dim)`` and states
are normalized complex vectors. Frequencies are angular, in fs^-1, with
hbar = 1.

Spin basis ordering: index 0 is the excited state (sigma_z = +1), index 1 the
ground state (sigma_z = -1).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError

DEFAULT_FOCK_DIM = 12

Operator = NDArray[np.complex128]
StateVector = NDArray[np.complex128]


def build_annihilation(dim: int) -> Operator:
    """Bosonic lowering operator truncated to ``dim`` Fock levels."""
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"annihilation operator needs dim >= 2, got {dim}")
    dim = int(dim)
    op = np.zeros((dim, dim), dtype=complex)
    n = np.arange(1, dim)
    op[n - 1, n] = np.sqrt(n)
    return op


def build_creation(dim: int) -> Operator:
    return adjoint(build_annihilation(dim))


def build_number(dim: int) -> Operator:
    if int(dim) != dim or dim < 1:
        raise DimensionError(f"number operator needs dim >= 1, got {dim}")
    return np.diag(np.arange(int(dim), dtype=float)).astype(complex)


_PAULI = {
    "x": [[0, 1], [1, 0]],
    "y": [[0, -1j], [1j, 0]],
    "z": [[1, 0], [0, -1]],
    "plus": [[0, 1], [0, 0]],
    "minus": [[0, 0], [1, 0]],
}


def build_pauli(kind: str) -> Operator:
    """Pauli matrix ``x``, ``y``, ``z`` or ladder ``plus``/``minus``.

    ``plus`` raises |down> (index 1) to |up> (index 0).
    """
    try:
        return np.array(_PAULI[kind], dtype=complex)
    except KeyError:
        raise ValueError(f"unknown Pauli kind {kind!r}; expected one of {sorted(_PAULI)}") from None


def adjoint(op: ArrayLike) -> Operator:
    return np.conj(np.asarray(op)).T


def is_hermitian(op: ArrayLike, atol: float = 1e-12) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and bool(np.allclose(op, adjoint(op), rtol=0, atol=atol))


def make_state(amplitudes: ArrayLike, dim: int | None = None) -> StateVector:
    """Normalized complex state from raw amplitudes, zero-padded to ``dim``."""
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if dim is not None:
        if dim < amps.size:
            raise DimensionError(f"{amps.size} amplitudes do not fit in dim {dim}")
        amps = np.concatenate([amps, np.zeros(dim - amps.size, dtype=complex)])
    norm = np.linalg.norm(amps)
    if amps.size == 0 or norm == 0.0:
        raise ValueError("state has zero norm")
    return amps / norm


def basis_state(index: int, dim: int) -> StateVector:
    state = np.zeros(dim, dtype=complex)
    state[index] = 1.0
    return state


def _check_square(op: NDArray, dim: int, what: str) -> None:
    if op.shape != (dim, dim):
        raise DimensionError(f"{what}: operator shape {op.shape} does not match dim {dim}")


def expectation(state: ArrayLike, op: ArrayLike) -> complex:
    """<state| op |state>."""
    state = np.asarray(state)
    op = np.asarray(op)
    _check_square(op, state.shape[0], "expectation")
    return complex(np.vdot(state, op @ state))


def interaction_picture(op: ArrayLike, energies: ArrayLike, t: float) -> Operator:
    """Conjugate ``op`` by the free evolution of a diagonal Hamiltonian.

    Entry (m, n) is multiplied by exp(i (E_m - E_n) t).
    """
    op = np.asarray(op, dtype=complex)
    energies = np.asarray(energies, dtype=float)
    _check_square(op, energies.shape[0], "interaction_picture")
    return op * phase_matrix(energies, t)


def phase_matrix(levels: NDArray, phase: float) -> NDArray[np.complex128]:
    """exp(i (levels_m - levels_n) * phase) as a matrix."""
    return np.exp(1j * np.subtract.outer(levels, levels) * phase)
