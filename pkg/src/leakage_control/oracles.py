"""Reference solutions for two solvable leakage models.

``pure_leakage``: oscillator ``H = omega a^dagger a + lam (a + a^dagger)`` with
no bath; the stored state is |0>, |1> or (|0> + |1>)/sqrt 2 and ``b(t)`` is
the interaction-picture survival probability.

``spin_bath_rwa``: spin with level splitting ``epsilon`` coupled to a single
mode (frequency ``omega``, one photon) by ``lam (sigma^+ a + sigma^- a^dagger)``;
``b(t)`` is the spin-down probability.

The Rabi formula for the spin model carries the squared generalized Rabi
frequency in the denominator. The second-order coefficient is 4, i.e.
``b = exp(-4 lam^2/detuning^2 sin^2(detuning t / 2))``; both were fixed by the
brute-force oracle :func:`jc_numeric` and the leakage engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import TruncationError
from .quantum import build_annihilation

StateKind = Literal["ground", "first", "superposition"]
STATE_KINDS = ("ground", "first", "superposition")

EXAMPLE2_TCL2_COEFF = 4.0


@dataclass(frozen=True)
class OracleSpec:
    model: Literal["pure_leakage", "spin_bath_rwa"]
    lam: float
    omega: float
    kind: StateKind = "ground"
    epsilon: float | None = None

    def __post_init__(self):
        if self.model not in ("pure_leakage", "spin_bath_rwa"):
            raise ValueError(f"unknown oracle model {self.model!r}")
        if self.model == "pure_leakage" and self.kind not in STATE_KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}; expected one of {STATE_KINDS}")
        if self.model == "spin_bath_rwa" and self.epsilon is None:
            raise ValueError("spin_bath_rwa needs epsilon")

    @property
    def detuning(self) -> float:
        return self.epsilon - self.omega

    def stored_state(self, dim: int) -> NDArray[np.complex128]:
        state = np.zeros(dim, dtype=complex)
        if self.kind == "ground":
            state[0] = 1
        elif self.kind == "first":
            state[1] = 1
        else:
            state[:2] = 1 / np.sqrt(2)
        return state


def _require(spec: OracleSpec, model: str) -> None:
    if spec.model != model:
        raise ValueError(f"oracle needs model {model!r}, got {spec.model!r}")


def example1_exact(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    _require(spec, "pure_leakage")
    x = spec.lam**2 / spec.omega**2
    s2 = np.sin(spec.omega * np.asarray(t, dtype=float) / 2) ** 2
    envelope = np.exp(-4 * x * s2)
    if spec.kind == "ground":
        return envelope
    if spec.kind == "first":
        return (1 - 4 * x * s2) ** 2 * envelope
    return (1 - 4 * x * (1 - x) * s2**2) * envelope


def example1_leakage(kind: StateKind, omega: float, t: ArrayLike) -> NDArray[np.float64]:
    """Second-order leakage function per lam^2."""
    s2 = np.sin(omega * np.asarray(t, dtype=float) / 2) ** 2
    if kind == "ground":
        return 4 * s2 / omega**2
    if kind == "first":
        return 12 * s2 / omega**2
    if kind == "superposition":
        return 4 * (s2 + s2**2) / omega**2
    raise ValueError(f"unknown state kind {kind!r}")


def example1_tcl2(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    _require(spec, "pure_leakage")
    return np.exp(-spec.lam**2 * example1_leakage(spec.kind, spec.omega, t))


def example2_exact(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    """Rabi formula 1 - lam^2/W^2 sin^2(W t), W^2 = (detuning/2)^2 + lam^2."""
    _require(spec, "spin_bath_rwa")
    w2 = (spec.detuning / 2) ** 2 + spec.lam**2
    t = np.asarray(t, dtype=float)
    if w2 == 0:
        return np.ones_like(t)
    return 1 - np.sin(np.sqrt(w2) * t) ** 2 * spec.lam**2 / w2


def example2_leakage(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    """Second-order leakage function per lam^2 for the spin model."""
    _require(spec, "spin_bath_rwa")
    delta = spec.detuning
    if delta == 0:
        raise ZeroDivisionError("second-order closed form is singular at resonance; use jc_numeric")
    s2 = np.sin(delta * np.asarray(t, dtype=float) / 2) ** 2
    return EXAMPLE2_TCL2_COEFF * s2 / delta**2


def example2_tcl2(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    return np.exp(-spec.lam**2 * example2_leakage(spec, t))


def jc_numeric(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    """Spin-down probability from exact evolution in span{|down,1>, |up,0>}."""
    _require(spec, "spin_bath_rwa")
    eps, omega, lam = spec.epsilon, spec.omega, spec.lam
    h = np.array([[omega - eps / 2, lam], [lam, eps / 2]], dtype=float)
    evals, evecs = np.linalg.eigh(h)
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t, evals))
    amp = phases @ (np.abs(evecs[0]) ** 2)
    return np.abs(amp) ** 2


def jc_populations(spec: OracleSpec, t: ArrayLike) -> NDArray[np.float64]:
    """Populations of |down,1> and |up,0>, shape ``t.shape + (2,)``."""
    _require(spec, "spin_bath_rwa")
    eps, omega, lam = spec.epsilon, spec.omega, spec.lam
    h = np.array([[omega - eps / 2, lam], [lam, eps / 2]], dtype=float)
    evals, evecs = np.linalg.eigh(h)
    t = np.asarray(t, dtype=float)
    psi = np.einsum("ik,...k,k->...i", evecs, np.exp(-1j * np.multiply.outer(t, evals)), evecs[0].conj())
    return np.abs(psi) ** 2


def _displaced_survival(lam: float, omega: float, t: NDArray, dim: int, phi: NDArray) -> NDArray:
    a = build_annihilation(dim)
    levels = omega * np.arange(dim)
    h = np.diag(levels).astype(complex) + lam * (a + a.conj().T)
    evals, evecs = np.linalg.eigh(h)
    coeffs = evecs.conj().T @ phi
    # interaction picture: <phi| e^{i H0 t} e^{-i H t} |phi>
    psi = np.einsum("ik,tk->ti", evecs, np.exp(-1j * np.multiply.outer(t, evals)) * coeffs)
    psi_int = np.exp(1j * np.multiply.outer(t, levels)) * psi
    return np.abs(psi_int @ phi.conj()) ** 2


def displaced_oscillator_numeric(lam: float, omega: float, t: ArrayLike, kind: StateKind = "ground",
                                 dim: int = 16, tol: float = 1e-10, max_dim: int = 256) -> NDArray[np.float64]:
    """Brute-force survival probability of the stored state in a driven oscillator.

    The Fock space is doubled from ``dim`` until successive results agree to ``tol``.
    """
    if dim < 16:
        raise ValueError("displaced oscillator oracle needs dim >= 16")
    spec = OracleSpec("pure_leakage", lam, omega, kind)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    prev = _displaced_survival(lam, omega, t, dim, spec.stored_state(dim))
    while dim < max_dim:
        dim *= 2
        cur = _displaced_survival(lam, omega, t, dim, spec.stored_state(dim))
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
    raise TruncationError(f"displaced oscillator did not converge to {tol} by dim={max_dim}")
