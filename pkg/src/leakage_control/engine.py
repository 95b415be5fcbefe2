"""Second-order leakage of a stored state.

For a stored state ``phi`` and coupling ``H_I = sum_a S_a B_a`` the leakage
function per lambda^2 is

    L(t) = int_0^t ds C(s),
    C(s) = int_0^s ds' sum_ab [K_ab(s, s - s') Phi_ab(s, s - s') + h.c.],

with ``K_ab(s, u) = <phi| dS_a(s) dS_b(u) |phi>`` the system covariance and
``Phi`` the bath correlation. The stored-state fidelity is ``b = exp(-lambda^2 L)``.

Both integrals use the composite trapezoid rule on one uniform grid. The
double integral is evaluated for every grid point at once in row chunks of
fixed size, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .baths import CorrelationKernel
from .control import PhaseProfile, PulseTrain
from .errors import DimensionError, DomainError, ProjectionError, UnsupportedQueryError
from .quantum import build_annihilation, build_pauli

ROW_CHUNK = 128


@dataclass(frozen=True)
class SimulationGrid:
    t_max: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    @property
    def times(self) -> NDArray[np.float64]:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True, eq=False)
class InteractionTerm:
    """System coupling operator in the interaction picture.

    ``S(t)[m, n] = operator[m, n] * exp(i (levels[m] - levels[n]) * phase(t))``
    with ``phase(t) = rate * t + ripple(t)``. For a bare diagonal Hamiltonian
    use ``levels = energies`` and ``rate = 1``.
    """

    operator: NDArray[np.complex128]
    levels: NDArray[np.float64]
    rate: float = 1.0
    ripple: Callable[[NDArray], NDArray] | None = None
    bath_index: int = 0

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        levels = np.asarray(self.levels, dtype=float)
        if op.ndim != 2 or op.shape != (levels.size, levels.size):
            raise DimensionError(f"operator shape {op.shape} does not match {levels.size} levels")
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "levels", levels)

    @property
    def dim(self) -> int:
        return self.levels.size

    def phase(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        if self.ripple is None:
            return self.rate * t
        return self.rate * t + self.ripple(t)

    def at(self, t: ArrayLike) -> NDArray[np.complex128]:
        """S(t), stacked over the shape of ``t``."""
        theta = self.phase(t)
        gaps = np.subtract.outer(self.levels, self.levels)
        return self.operator * np.exp(1j * gaps * theta[..., None, None])

    def rotations(self, t: ArrayLike) -> NDArray[np.complex128]:
        """exp(i levels * phase(t)), shape ``t.shape + (dim,)``."""
        return np.exp(1j * np.multiply.outer(self.phase(t), self.levels))


@dataclass(frozen=True, eq=False)
class LeakageModel:
    """Stored state, coupling terms and bath kernel."""

    state: NDArray[np.complex128]
    terms: tuple[InteractionTerm, ...]
    kernel: CorrelationKernel
    partners: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        state = np.asarray(self.state, dtype=complex)
        terms = tuple(self.terms)
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("at least one interaction term is required")
        if abs(np.linalg.norm(state) - 1.0) > 1e-12:
            raise ValueError("stored state must be normalized")
        for term in terms:
            if term.dim != state.size:
                raise DimensionError(f"term dim {term.dim} does not match state dim {state.size}")
            if not 0 <= term.bath_index < self.kernel.n_terms:
                raise ValueError(f"bath index {term.bath_index} outside kernel with {self.kernel.n_terms} terms")
        object.__setattr__(self, "partners", _adjoint_partners(terms, self.kernel))

    @property
    def dim(self) -> int:
        return self.state.size


def _adjoint_partners(terms: Sequence[InteractionTerm], kernel: CorrelationKernel) -> tuple[int, ...]:
    """Index of the term carrying S_a^dagger B_a^dagger for every term a."""
    partners = []
    for a, term in enumerate(terms):
        want_bath = kernel.adjoint_index[term.bath_index]
        for b, other in enumerate(terms):
            if (
                other.bath_index == want_bath
                and np.array_equal(other.levels, term.levels)
                and other.rate == term.rate
                and other.ripple is term.ripple
                and np.allclose(other.operator, term.operator.conj().T, rtol=0, atol=1e-14)
            ):
                partners.append(b)
                break
        else:
            raise ValueError(f"interaction term {a} has no Hermitian-conjugate partner; H_I would not be Hermitian")
    return tuple(partners)


# -- model builders -----------------------------------------------------------


def oscillator_model(state: ArrayLike, kernel: CorrelationKernel, omega: float,
                     train: PulseTrain | None = None) -> LeakageModel:
    """Oscillator coupled through S = a + a^dagger, optionally pulse controlled."""
    state = np.asarray(state, dtype=complex)
    dim = state.size
    a = build_annihilation(dim)
    profile = PhaseProfile(omega, train)
    term = InteractionTerm(
        operator=a + a.conj().T,
        levels=np.arange(dim, dtype=float),
        rate=profile.rate,
        ripple=None if train is None else profile.ripple,
    )
    return LeakageModel(state, (term,), kernel)


def spin_rwa_model(epsilon: float, kernel: CorrelationKernel, state: ArrayLike | None = None) -> LeakageModel:
    """Spin with level splitting ``epsilon`` coupled via sigma^+ B_0 + sigma^- B_1.

    Levels are (+epsilon/2, -epsilon/2) in the (up, down) basis; the default
    stored state is spin down.
    """
    if state is None:
        state = np.array([0.0, 1.0], dtype=complex)
    levels = np.array([epsilon / 2, -epsilon / 2])
    terms = (
        InteractionTerm(build_pauli("plus"), levels, bath_index=0),
        InteractionTerm(build_pauli("minus"), levels, bath_index=1),
    )
    return LeakageModel(np.asarray(state, dtype=complex), terms, kernel)


# -- pointwise kernels ---------------------------------------------------------


def system_kernel(phi: ArrayLike, terms: Sequence[InteractionTerm], s: float, sprime: float) -> NDArray[np.complex128]:
    """Covariance matrix <phi| dS_a(s) dS_b(sprime) |phi> over term pairs."""
    phi = np.asarray(phi, dtype=complex)
    for term in terms:
        if term.dim != phi.size:
            raise DimensionError(f"term dim {term.dim} does not match state dim {phi.size}")
    left = [term.at(s).conj().T @ phi for term in terms]
    right = [term.at(sprime) @ phi for term in terms]
    mean_left = np.array([np.vdot(phi, term.at(s) @ phi) for term in terms])
    mean_right = np.array([np.vdot(phi, r) for r in right])
    second = np.array([[np.vdot(u, v) for v in right] for u in left])
    return second - np.outer(mean_left, mean_right)


def _pair_sum(model: LeakageModel, s: float, u: float) -> complex:
    """sum_ab K_ab(s, u) Phi_ab(s, u)."""
    cov = system_kernel(model.state, model.terms, s, u)
    phi = model.kernel.matrix(s, u)
    total = 0j
    for a, ta in enumerate(model.terms):
        for b, tb in enumerate(model.terms):
            total += cov[a, b] * phi[ta.bath_index, tb.bath_index]
    return total


def integrand_terms(s: float, sprime: float, model: LeakageModel) -> tuple[complex, complex]:
    """Direct term and its explicitly evaluated Hermitian-conjugate partner."""
    if sprime > s or sprime < 0:
        raise DomainError(f"need 0 <= sprime <= s, got sprime={sprime}, s={s}")
    u = s - sprime
    direct = _pair_sum(model, s, u)
    # h.c. of S_a(s) S_b(u) B_a(s) B_b(u) is S_b'(u) S_a'(s) B_b'(u) B_a'(s), primes = adjoint partners
    cov = system_kernel(model.state, model.terms, u, s)
    phi = model.kernel.matrix(u, s)
    partner = 0j
    for a, ta in enumerate(model.terms):
        for b, tb in enumerate(model.terms):
            pa, pb = model.partners[a], model.partners[b]
            partner += cov[pb, pa] * phi[model.terms[pb].bath_index, model.terms[pa].bath_index]
    return direct, partner


def integrand(s: float, sprime: float, model: LeakageModel) -> float:
    """2 Re sum_ab K_ab(s, s - s') Phi_ab(s, s - s') in fs^-2 per lambda^2."""
    if sprime > s or sprime < 0:
        raise DomainError(f"need 0 <= sprime <= s, got sprime={sprime}, s={s}")
    return 2.0 * _pair_sum(model, s, s - sprime).real


def trapezoid_weights(n_points: int, dt: float) -> NDArray[np.float64]:
    w = np.full(n_points, dt)
    if n_points == 1:
        return np.zeros(1)
    w[0] = w[-1] = dt / 2
    return w


def compute_C(s: float, model: LeakageModel, dt: float) -> float:
    """C(s) by the trapezoid rule with step ``dt`` over s' in [0, s] (pointwise path)."""
    if s < 0:
        raise DomainError("C(s) needs s >= 0")
    n = int(round(s / dt))
    if n == 0:
        return 0.0
    if abs(n * dt - s) > 1e-9 * max(1.0, s):
        raise DomainError(f"s={s} is not on the grid with dt={dt}")
    sprimes = np.arange(n + 1) * dt
    values = np.array([integrand(s, min(sp, s), model) for sp in sprimes])
    return float(np.sum(values * trapezoid_weights(n + 1, dt)))


# -- grid evaluation ---------------------------------------------------------


@dataclass(frozen=True)
class LeakageSeries:
    """C, L (per lambda^2) and optionally b on a uniform grid."""

    times: NDArray[np.float64]
    C: NDArray[np.float64]
    L: NDArray[np.float64]
    imag_residue: float
    lam: float | None = None

    @property
    def b(self) -> NDArray[np.float64] | None:
        if self.lam is None:
            return None
        return np.exp(-self.lam**2 * self.L)

    def fidelity(self, lam: float) -> NDArray[np.float64]:
        return np.exp(-lam**2 * self.L)


@dataclass
class _GridCache:
    U: list  # S_a(t_k)^dagger phi, pruned to support
    V: list  # S_a(t_k) phi, pruned to support
    mean: list  # <phi|S_a(t_k)|phi>
    support: list
    phi_fwd: NDArray | None  # stationary: Phi at lags +k dt
    phi_bwd: NDArray | None  # stationary: Phi at lags -k dt


def _grid_cache(model: LeakageModel, times: NDArray) -> _GridCache:
    phi = model.state
    U, V, means, supports = [], [], [], []
    for term in model.terms:
        rot = term.rotations(times)
        inner = np.conj(rot) * phi
        v = rot * (inner @ term.operator.T)
        u = rot * (inner @ term.operator.conj())
        means.append(v @ np.conj(phi))
        U.append(u)
        V.append(v)
        supports.append((np.any(u != 0, axis=0), np.any(v != 0, axis=0)))
    phi_fwd = phi_bwd = None
    if model.kernel.stationary:
        dt = times[1] - times[0] if times.size > 1 else 1.0
        phi_fwd = model.kernel.on_grid(dt, times.size)
        phi_bwd = model.kernel.on_grid(-dt, times.size)
    return _GridCache(U, V, means, supports, phi_fwd, phi_bwd)


def _covariance_block(cache: _GridCache, a: int, b: int, rows: slice, cols: slice) -> NDArray:
    """K_ab(t_k, t_j) for k in rows, j in cols."""
    u_a, v_b = cache.U[a], cache.V[b]
    cols_used = cache.support[a][0] & cache.support[b][1]
    block = -np.multiply.outer(cache.mean[a][rows], cache.mean[b][cols])
    for n in np.flatnonzero(cols_used):
        block += np.multiply.outer(np.conj(u_a[rows, n]), v_b[cols, n])
    return block


def _covariance_block_T(cache: _GridCache, a: int, b: int, rows: slice, cols: slice) -> NDArray:
    """K_ab(t_j, t_k) laid out as [k, j] for k in rows, j in cols."""
    u_a, v_b = cache.U[a], cache.V[b]
    cols_used = cache.support[a][0] & cache.support[b][1]
    block = -np.multiply.outer(cache.mean[b][rows], cache.mean[a][cols])
    for n in np.flatnonzero(cols_used):
        block += np.multiply.outer(v_b[rows, n], np.conj(u_a[cols, n]))
    return block


def _chunk_integrals(model: LeakageModel, cache: _GridCache, times: NDArray, dt: float,
                     k0: int, k1: int) -> tuple[NDArray, NDArray]:
    rows, cols = slice(k0, k1), slice(0, k1)
    k_idx = np.arange(k0, k1)[:, None]
    j_idx = np.arange(k1)[None, :]
    lag = np.clip(k_idx - j_idx, 0, None)
    kernel = model.kernel
    if not kernel.stationary:
        phi_fwd = kernel.matrix(times[rows][:, None], times[cols][None, :])
        phi_bwd = kernel.matrix(times[cols][None, :], times[rows][:, None])
    total = np.zeros((k1 - k0, k1), dtype=complex)
    for a, ta in enumerate(model.terms):
        for b, tb in enumerate(model.terms):
            ia, ib = ta.bath_index, tb.bath_index
            if kernel.stationary:
                fwd = cache.phi_fwd[ia, ib][lag]
            else:
                fwd = phi_fwd[ia, ib]
            total += _covariance_block(cache, a, b, rows, cols) * fwd
            pa, pb = model.partners[a], model.partners[b]
            qa, qb = model.terms[pa].bath_index, model.terms[pb].bath_index
            if kernel.stationary:
                bwd = cache.phi_bwd[qb, qa][lag]
            else:
                bwd = phi_bwd[qb, qa]
            total += _covariance_block_T(cache, pb, pa, rows, cols) * bwd
    weights = np.where(j_idx < k_idx, dt, np.where(j_idx == k_idx, dt / 2, 0.0))
    weights[:, 0] = np.where(k_idx[:, 0] > 0, dt / 2, 0.0)
    integral = np.sum(total * weights, axis=1)
    return integral.real + 0.0, integral.imag


def compute_L(grid: SimulationGrid, model: LeakageModel, lam: float | None = None,
              workers: int = 1) -> LeakageSeries:
    """C, L and b on every grid point.

    Row chunks of ``C`` may be evaluated by ``workers`` threads; the output
    is bit-identical for any worker count.
    """
    times = grid.times
    dt = grid.dt
    cache = _grid_cache(model, times)
    n = times.size
    bounds = [(k0, min(k0 + ROW_CHUNK, n)) for k0 in range(0, n, ROW_CHUNK)]

    def run(bound):
        return _chunk_integrals(model, cache, times, dt, *bound)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(bound) for bound in bounds]
    C = np.concatenate([p[0] for p in parts])
    residue = float(np.max(np.abs(np.concatenate([p[1] for p in parts]))))
    L = np.zeros(n)
    if n > 1:
        L[1:] = np.cumsum(0.5 * dt * (C[:-1] + C[1:]))
    return LeakageSeries(times=times, C=C, L=L, imag_residue=residue, lam=lam)


# -- stationary ("dominant") part ---------------------------------------------


def dominant_integrand(model: LeakageModel, sprime: ArrayLike) -> NDArray[np.float64]:
    """Integrand of C built from the (s - s')-only part of the system covariance.

    Keeps the components of <phi|S_a(s) S_b(u)|phi> whose phase depends on
    ``s - u`` alone and subtracts the product of the static parts of the
    means. Pulse ripples are ignored; only the mean phase rate enters.
    """
    if not model.kernel.stationary:
        raise UnsupportedQueryError("the dominant part needs a stationary bath kernel")
    ref = model.terms[0]
    for term in model.terms[1:]:
        if not np.array_equal(term.levels, ref.levels) or term.rate != ref.rate:
            raise UnsupportedQueryError("dominant part needs terms sharing one system spectrum")
    lag = np.asarray(sprime, dtype=float)
    phi = model.state
    levels, rate = ref.levels, ref.rate
    same = np.equal.outer(levels, levels)
    weight = np.where(same, np.outer(np.conj(phi), phi), 0.0)  # [m, n]
    static_mean = [np.sum(weight * t.operator) for t in model.terms]
    # phase e^{i (l_m - l_k) rate lag} for intermediate level k
    gap_phase = np.exp(1j * rate * np.multiply.outer(lag, levels[:, None] - levels[None, :]))  # [.., m, k]
    bath = model.kernel.lags(lag)
    total = np.zeros(lag.shape, dtype=complex)
    for a, ta in enumerate(model.terms):
        for b, tb in enumerate(model.terms):
            # sum_{m,n: l_m = l_n} phi_m* phi_n sum_k A_mk B_kn e^{i (l_m - l_k) rate lag}
            mk = np.einsum("mn,mk,kn->mk", weight, ta.operator, tb.operator)
            second = np.sum(gap_phase * mk, axis=(-2, -1))
            cov = second - static_mean[a] * static_mean[b]
            total += cov * bath[ta.bath_index, tb.bath_index]
    return 2.0 * total.real


def stationary_rate(model: LeakageModel, grid: SimulationGrid,
                    transient_cut: float | None = None) -> tuple[float, NDArray[np.float64]]:
    """Asymptotic leakage rate R (fs^-1 per lambda^2) and the line L_dom(t) = R t.

    R is the trapezoid integral of :func:`dominant_integrand` over
    ``[0, transient_cut]`` with the grid step (default: the whole grid).
    """
    cut = grid.t_max if transient_cut is None else transient_cut
    n = int(math.floor(cut / grid.dt + 1e-9))
    lags = np.arange(n + 1) * grid.dt
    values = dominant_integrand(model, lags)
    rate = float(np.sum(values * trapezoid_weights(n + 1, grid.dt)))
    return rate, rate * grid.times


# -- d-dimensional subspace propagation -------------------------------------------


@dataclass(frozen=True)
class SubspaceSeries:
    times: NDArray[np.float64]
    eta: NDArray[np.complex128]  # (n_times, d, d)
    basis: NDArray[np.complex128]  # (dim, d)

    @property
    def trace(self) -> NDArray[np.float64]:
        return np.real(np.trace(self.eta, axis1=1, axis2=2))


def _subspace_basis(basis, dim: int) -> NDArray[np.complex128]:
    arr = np.asarray(basis)
    if arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer):
        q = np.zeros((dim, arr.size), dtype=complex)
        q[arr, np.arange(arr.size)] = 1.0
        return q
    q = np.asarray(basis, dtype=complex)
    if q.ndim == 1:
        q = q[:, None]
    if q.shape[0] != dim:
        raise DimensionError(f"subspace basis has {q.shape[0]} rows, expected {dim}")
    if not np.allclose(q.conj().T @ q, np.eye(q.shape[1]), atol=1e-12):
        raise ValueError("subspace basis must be orthonormal")
    return q


def _generator(model: LeakageModel, q: NDArray, t: float, s_nodes: NDArray, weights: NDArray,
               s_ops: list) -> NDArray[np.complex128]:
    """Superoperator (row-major vec) of d eta/dt at time t, per lambda^2."""
    d = q.shape[1]
    eye = np.eye(d)
    phi_ts = model.kernel.matrix(t, s_nodes)  # Phi_ab(t, s_j)
    phi_st = model.kernel.matrix(s_nodes, t)  # Phi_ab(s_j, t)
    gen = np.zeros((d * d, d * d), dtype=complex)
    for a, ta in enumerate(model.terms):
        s_t = ta.at(t)
        row_t = q.conj().T @ s_t  # P S_a(t), (d, dim)
        col_t = s_t @ q  # S_a(t) P, (dim, d)
        sp_t = q.conj().T @ col_t
        for b, tb in enumerate(model.terms):
            cols_s, rows_s, pp_s = s_ops[b]
            c1 = weights * phi_ts[ta.bath_index, tb.bath_index]
            c2 = weights * phi_st[tb.bath_index, ta.bath_index]
            y1 = np.tensordot(c1, cols_s, axes=(0, 0))  # sum_j c1_j S_b(s_j) P
            z1 = np.tensordot(c1, pp_s, axes=(0, 0))
            y2 = np.tensordot(c2, rows_s, axes=(0, 0))  # sum_j c2_j P S_b(s_j)
            z2 = np.tensordot(c2, pp_s, axes=(0, 0))
            gen += np.kron(row_t @ y1, eye)
            gen -= np.kron(z1, sp_t.T)
            gen += np.kron(eye, (y2 @ col_t).T)
            gen -= np.kron(sp_t, z2.T)
    return -gen


def propagate_subspace(model: LeakageModel, basis, eta0: ArrayLike, grid: SimulationGrid,
                       lam: float = 1.0) -> SubspaceSeries:
    """Integrate the second-order time-local equation for eta = P rho_S P.

    ``basis`` is a list of level indices or an orthonormal (dim, d) matrix
    spanning the protected subspace. ``eta0`` is either d x d in that basis
    or dim x dim and supported on it. Fixed-step RK4 on the grid; the memory
    integral uses the trapezoid rule over grid nodes (plus a half panel for
    the RK4 midpoint stages) with eta frozen at the current time.
    """
    q = _subspace_basis(basis, model.dim)
    d = q.shape[1]
    eta0 = np.asarray(eta0, dtype=complex)
    if eta0.shape == (model.dim, model.dim):
        proj = q @ q.conj().T
        if np.max(np.abs(eta0 - proj @ eta0 @ proj)) > 1e-12:
            raise ProjectionError("initial density has weight outside the protected subspace")
        eta0 = q.conj().T @ eta0 @ q
    elif eta0.shape != (d, d):
        raise DimensionError(f"eta0 shape {eta0.shape} matches neither d={d} nor dim={model.dim}")
    if abs(np.trace(eta0) - 1.0) > 1e-12:
        raise ValueError("initial subspace density must have unit trace")

    times = grid.times
    dt = grid.dt
    n = times.size
    mids = times[:-1] + dt / 2

    def ops_at(t):
        stack = []
        for term in model.terms:
            s = term.at(t)
            stack.append((s @ q, q.conj().T @ s, q.conj().T @ s @ q))
        return stack

    grid_ops = ops_at(times)
    mid_ops = ops_at(mids)

    def gen_at_grid(k):
        nodes = times[: k + 1]
        w = trapezoid_weights(k + 1, dt)
        ops = [tuple(x[: k + 1] for x in trio) for trio in grid_ops]
        return _generator(model, q, times[k], nodes, w, ops)

    def gen_at_mid(k):
        nodes = np.append(times[: k + 1], mids[k])
        w = np.append(trapezoid_weights(k + 1, dt), dt / 4)
        w[k] += dt / 4
        ops = [tuple(np.concatenate([x[: k + 1], m[k : k + 1]]) for x, m in zip(trio, mtrio))
               for trio, mtrio in zip(grid_ops, mid_ops)]
        return _generator(model, q, mids[k], nodes, w, ops)

    scale = lam**2
    out = np.empty((n, d, d), dtype=complex)
    vec = eta0.reshape(-1)
    out[0] = eta0
    g_now = gen_at_grid(0) * scale
    for k in range(n - 1):
        g_mid = gen_at_mid(k) * scale
        g_next = gen_at_grid(k + 1) * scale
        k1 = g_now @ vec
        k2 = g_mid @ (vec + 0.5 * dt * k1)
        k3 = g_mid @ (vec + 0.5 * dt * k2)
        k4 = g_next @ (vec + dt * k3)
        vec = vec + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = vec.reshape(d, d)
        g_now = g_next
    return SubspaceSeries(times=times, eta=out, basis=q)
