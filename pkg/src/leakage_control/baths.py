"""Bath models and their two-time correlation functions.

Every bath yields a :class:`CorrelationKernel` giving
``Phi[a, b](t, s) = tr_B[B_a(t) B_b(s) rho_B]`` in fs^-2, with the coupling
strength lambda factored out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

HBAR_EV_FS = 0.6582119
K_B_EV_PER_K = 8.617333e-5

# 1 - e^-5: the spectrum is sampled on ln-spaced points that stop at 2.5 * omega_d
_SPECTRUM_SPAN = -np.expm1(-5.0)


def beta_from_temperature(kelvin: float) -> float:
    """Inverse temperature hbar/(k_B T) in fs."""
    if kelvin <= 0:
        raise ValueError(f"temperature must be positive, got {kelvin} K")
    return HBAR_EV_FS / (K_B_EV_PER_K * kelvin)


@dataclass(frozen=True)
class BathMode:
    omega: float
    alpha: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"bath mode frequency must be positive, got {self.omega}")
        if self.alpha < 0:
            raise ValueError(f"bath mode coupling must be nonnegative, got {self.alpha}")


def discretize_spectrum(ell: int, omega_d: float) -> tuple[BathMode, ...]:
    """Discrete bath of ``ell`` modes with cutoff scale ``omega_d`` (fs^-1).

    omega_j = -(omega_d/2) ln(1 - j (1 - e^-5)/ell) and
    alpha_j = sqrt(omega_j omega_d (1 - e^-5) / (40 pi ell)), j = 1..ell.
    Note that the last mode sits at 2.5 * omega_d.
    """
    if ell < 1 or int(ell) != ell:
        raise ValueError(f"ell must be a positive integer, got {ell}")
    if not omega_d > 0:
        raise ValueError(f"omega_d must be positive, got {omega_d}")
    j = np.arange(1, int(ell) + 1)
    omegas = -0.5 * omega_d * np.log1p(-j * _SPECTRUM_SPAN / ell)
    alphas = np.sqrt(omegas * omega_d * _SPECTRUM_SPAN / (40 * np.pi * ell))
    return tuple(BathMode(float(w), float(a)) for w, a in zip(omegas, alphas))


def thermal_occupation(omega: ArrayLike, beta: float) -> NDArray[np.float64] | float:
    """Bose-Einstein occupation 1/(exp(beta*omega) - 1); 0 when the exponent overflows."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0) or not beta > 0:
        raise ValueError("thermal_occupation needs omega > 0 and beta > 0")
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(beta * omega)
    return float(n) if n.ndim == 0 else n


@dataclass(frozen=True)
class DiscreteThermalBath:
    modes: tuple[BathMode, ...]
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("thermal bath needs at least one mode")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if np.any(np.diff(self.omegas) <= 0):
            raise ValueError("bath mode frequencies must be strictly increasing")

    @property
    def omegas(self) -> NDArray[np.float64]:
        return np.array([m.omega for m in self.modes])

    @property
    def alphas(self) -> NDArray[np.float64]:
        return np.array([m.alpha for m in self.modes])

    @classmethod
    def from_spectrum(cls, ell: int, omega_d: float, beta: float) -> "DiscreteThermalBath":
        return cls(discretize_spectrum(ell, omega_d), beta)


@dataclass(frozen=True)
class SingleModeFockBath:
    omega: float
    occupation: int = 1

    def __post_init__(self):
        if self.occupation < 0 or int(self.occupation) != self.occupation:
            raise ValueError(f"occupation must be a nonnegative integer, got {self.occupation}")


@dataclass(frozen=True)
class TrivialBath:
    pass


@dataclass(frozen=True, eq=False)
class CorrelationKernel:
    """Two-time bath correlation matrix ``Phi[a, b](t, s)``.

    Parameters
    ----------
    n_terms : int
        Number of bath coupling operators.
    stationary : bool
        If true, ``lag_fn`` is used and the value depends on ``t - s`` only.
    lag_fn : callable
        ``lag_fn(tau) -> array (n_terms, n_terms, *tau.shape)`` for stationary kernels.
    two_time_fn : callable, optional
        ``two_time_fn(t, s) -> array (n_terms, n_terms, *shape)`` for
        non-stationary kernels.
    adjoint_index : tuple of int, optional
        ``adjoint_index[a]`` is the index of ``B_a^dagger``. Defaults to the
        identity (Hermitian coupling operators).
    """

    n_terms: int
    stationary: bool
    lag_fn: Callable[[NDArray], NDArray] | None = None
    two_time_fn: Callable[[NDArray, NDArray], NDArray] | None = None
    adjoint_index: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.adjoint_index is None:
            object.__setattr__(self, "adjoint_index", tuple(range(self.n_terms)))
        if self.stationary and self.lag_fn is None:
            raise ValueError("stationary kernel needs lag_fn")
        if not self.stationary and self.two_time_fn is None:
            raise ValueError("non-stationary kernel needs two_time_fn")

    def matrix(self, t: ArrayLike, s: ArrayLike) -> NDArray[np.complex128]:
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        if self.stationary:
            return self.lag_fn(t - s)
        return self.two_time_fn(t, s)

    def __call__(self, alpha: int, beta: int, t: ArrayLike, s: ArrayLike):
        return self.matrix(t, s)[alpha, beta]

    def lags(self, tau: ArrayLike) -> NDArray[np.complex128]:
        if not self.stationary:
            raise ValueError("lag evaluation requires a stationary kernel")
        return self.lag_fn(np.asarray(tau, dtype=float))

    def on_grid(self, dt: float, n_points: int) -> NDArray[np.complex128]:
        """Lag values at ``k*dt`` for ``k < n_points``, cached per grid."""
        key = (float(dt), int(n_points))
        if key not in self._cache:
            values = self.lags(np.arange(n_points) * dt)
            values.setflags(write=False)
            self._cache[key] = values
        return self._cache[key]


def thermal_kernel(bath: DiscreteThermalBath) -> CorrelationKernel:
    """Phi(tau) = sum_j alpha_j^2 [(1 + n_j) e^{-i w_j tau} + n_j e^{+i w_j tau}]."""
    omegas = bath.omegas
    weights = bath.alphas**2
    nbar = thermal_occupation(omegas, bath.beta)
    even = weights * (2 * nbar + 1)

    def lag_fn(tau):
        tau = np.asarray(tau, dtype=float)
        flat = tau.reshape(-1)
        arg = np.multiply.outer(flat, omegas)
        re = np.sum(np.cos(arg) * even, axis=-1)
        im = -np.sum(np.sin(arg) * weights, axis=-1)
        return (re + 1j * im).reshape((1, 1) + tau.shape)

    return CorrelationKernel(n_terms=1, stationary=True, lag_fn=lag_fn)


def fock_kernel(bath: SingleModeFockBath) -> CorrelationKernel:
    """Two-term kernel for coupling operators B_0 = a, B_1 = a^dagger in an m-photon state."""
    omega = bath.omega
    m = bath.occupation

    def lag_fn(tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros((2, 2) + tau.shape, dtype=complex)
        out[0, 1] = (m + 1) * np.exp(-1j * omega * tau)
        out[1, 0] = m * np.exp(1j * omega * tau)
        return out

    return CorrelationKernel(n_terms=2, stationary=True, lag_fn=lag_fn, adjoint_index=(1, 0))


def trivial_kernel() -> CorrelationKernel:
    """Identity bath: Phi = 1 for all times."""

    def lag_fn(tau):
        tau = np.asarray(tau, dtype=float)
        return np.ones((1, 1) + tau.shape, dtype=complex)

    return CorrelationKernel(n_terms=1, stationary=True, lag_fn=lag_fn)


def kernel_for(bath) -> CorrelationKernel:
    if isinstance(bath, DiscreteThermalBath):
        return thermal_kernel(bath)
    if isinstance(bath, SingleModeFockBath):
        return fock_kernel(bath)
    if isinstance(bath, TrivialBath):
        return trivial_kernel()
    raise TypeError(f"unsupported bath type {type(bath).__name__}")


def modes_from_arrays(omegas: Sequence[float], alphas: Sequence[float]) -> tuple[BathMode, ...]:
    return tuple(BathMode(float(w), float(a)) for w, a in zip(omegas, alphas))
