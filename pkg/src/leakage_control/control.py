"""Pulse-train control of an oscillator frequency.

The controlled system Hamiltonian is ``(Omega + f(t)) a^dagger a`` where
``f`` is a periodic train of rectangular pulses (period ``tau``, width
``delta``, area ``phi0``) or of impulsive phase kicks (``delta = 0``).
Because the Hamiltonian stays diagonal, the control enters only through the
accumulated phase ``theta(t) = int_0^t f``.

Window convention: pulse ``n >= 1`` occupies the half-open interval
``[n*tau - delta, n*tau)``. An impulse at ``n*tau`` is counted for all
``t >= n*tau``.

The phase is evaluated as ``Omega_c * t + ripple(t)`` with
``Omega_c = phi0 / tau`` and a tau-periodic ``ripple``. For ``delta == tau``
the ripple is exactly zero, so a full-duty train reproduces an uncontrolled
run at ``Omega + Omega_c`` bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import UnsupportedQueryError
from .quantum import Operator, build_annihilation

Shape = Literal["rectangular", "impulse"]


@dataclass(frozen=True)
class PulseTrain:
    """Periodic control pulses.

    ``shape`` may be omitted; it is then inferred from ``delta``
    (``impulse`` iff ``delta == 0``).
    """

    tau: float
    delta: float
    phi0: float
    shape: Shape | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0 <= self.delta <= self.tau:
            raise ValueError(f"need 0 <= delta <= tau, got delta={self.delta}, tau={self.tau}")
        inferred = "impulse" if self.delta == 0 else "rectangular"
        if self.shape is None:
            object.__setattr__(self, "shape", inferred)
        elif self.shape not in ("rectangular", "impulse"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        elif self.shape != inferred:
            raise ValueError(f"shape {self.shape!r} inconsistent with delta={self.delta}")

    @property
    def mean_shift(self) -> float:
        """Average frequency shift Omega_c = phi0 / tau."""
        return self.phi0 / self.tau


def _period_split(tau: float, t: NDArray) -> tuple[NDArray, NDArray]:
    n = np.floor(t / tau)
    u = t - n * tau
    # guard against t/tau rounding across an integer
    n = np.where(u < 0, n - 1, np.where(u >= tau, n + 1, n))
    return n, t - n * tau


def phase_ripple(train: PulseTrain, t: ArrayLike) -> NDArray[np.float64]:
    """Periodic part ``theta(t) - Omega_c * t`` of the accumulated phase."""
    t = np.asarray(t, dtype=float)
    _, u = _period_split(train.tau, t)
    drift = train.mean_shift * u
    if train.shape == "impulse":
        return -drift
    start = train.tau - train.delta
    inside = np.where(u >= start, (train.phi0 / train.delta) * (u - start), 0.0)
    return inside - drift


def accumulated_phase(train: PulseTrain, t: ArrayLike) -> NDArray[np.float64] | float:
    """theta(t) = int_0^t f(t') dt' in closed form."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("accumulated phase is defined for t >= 0")
    theta = train.mean_shift * t_arr + phase_ripple(train, t_arr)
    return float(theta) if theta.ndim == 0 else theta


def control_field(train: PulseTrain, t: ArrayLike) -> NDArray[np.float64] | float:
    """Instantaneous frequency shift f(t) of a rectangular train (fs^-1)."""
    if train.shape == "impulse":
        raise UnsupportedQueryError("impulse trains have no pointwise field; use accumulated_phase")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("control field is defined for t >= 0")
    _, u = _period_split(train.tau, t_arr)
    f = np.where(u >= train.tau - train.delta, train.phi0 / train.delta, 0.0)
    return float(f) if f.ndim == 0 else f


@dataclass(frozen=True)
class PhaseProfile:
    """Total oscillator phase ``Omega*t + theta(t)`` under an optional train."""

    omega: float
    train: PulseTrain | None = None

    @property
    def rate(self) -> float:
        if self.train is None:
            return self.omega
        return self.omega + self.train.mean_shift

    def ripple(self, t: ArrayLike) -> NDArray[np.float64]:
        if self.train is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return phase_ripple(self.train, t)

    def __call__(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        return self.rate * t + self.ripple(t)


def controlled_system_operator(omega: float, train: PulseTrain | None, t: float, dim: int) -> Operator:
    """S(t) = e^{-i phi(t)} a + e^{+i phi(t)} a^dagger with phi(t) = Omega t + theta(t)."""
    a = build_annihilation(dim)
    phi = float(PhaseProfile(omega, train)(t))
    return np.exp(-1j * phi) * a + np.exp(1j * phi) * a.conj().T
