"""Minimization of the leakage at a protection horizon over pulse-train parameters.

The constraint surface is a box on (tau, delta, phi0) together with
``delta <= tau``. Search is a deterministic compass (coordinate pattern)
search: derivative free, since L(T) is only piecewise smooth in tau and delta.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .control import PulseTrain
from .engine import compute_L
from .errors import ConfigurationError
from .scenario import Scenario

DEFAULT_HORIZON = 700.0
DEFAULT_BUDGET = 200
PARAMS = ("tau", "delta", "phi0")


@dataclass(frozen=True)
class ParameterBox:
    tau: tuple[float, float]
    delta: tuple[float, float]
    phi0: tuple[float, float]

    def __post_init__(self):
        for name in PARAMS:
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ConfigurationError(f"empty range [{lo}, {hi}]", field=name)
        if not self.tau[0] > 0:
            raise ConfigurationError("lower bound must be positive", field="tau")
        if self.delta[0] < 0:
            raise ConfigurationError("lower bound must be nonnegative", field="delta")
        if self.delta[0] > self.tau[1]:
            raise ConfigurationError("no point satisfies delta <= tau", field="delta")

    @property
    def lower(self) -> np.ndarray:
        return np.array([getattr(self, p)[0] for p in PARAMS], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([getattr(self, p)[1] for p in PARAMS], dtype=float)

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clamp(self, x: Sequence[float]) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        if x[1] > x[0]:
            x[1] = x[0]
        return x

    def center(self) -> np.ndarray:
        return self.clamp((self.lower + self.upper) / 2)


def train_from(x: Sequence[float]) -> PulseTrain:
    tau, delta, phi0 = (float(v) for v in x)
    return PulseTrain(tau, delta, phi0)


def objective(params: PulseTrain | None, scenario: Scenario, horizon: float, workers: int = 1) -> float:
    """L(horizon) per lambda^2 under the given control (full cumulative history)."""
    run = scenario.with_control(params)
    series = compute_L(run.horizon_grid(horizon), run.model(), workers=workers)
    return float(series.L[-1])


@dataclass
class OptimizationResult:
    best: PulseTrain
    value: float
    n_evals: int
    trace: list[tuple[tuple[float, float, float], float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "best": {"tau": self.best.tau, "delta": self.best.delta, "phi0": self.best.phi0,
                     "shape": self.best.shape},
            "L_per_lambda2": self.value,
            "evaluations": self.n_evals,
            "trace": [{"tau": p[0], "delta": p[1], "phi0": p[2], "L_per_lambda2": v} for p, v in self.trace],
        }


def minimize(box: ParameterBox, scenario: Scenario | None, horizon: float = DEFAULT_HORIZON,
             budget: int = DEFAULT_BUDGET, *, fn: Callable[[PulseTrain], float] | None = None,
             workers: int = 1, initial_fraction: float = 0.25, min_fraction: float = 1e-4) -> OptimizationResult:
    """Compass search for the smallest L(horizon) inside ``box``.

    Starts at the box center, polls +/- step along tau, delta, phi0 in that
    order, moves to the first improving poll point and halves a coordinate's
    step when neither direction improves. Stops when the budget is spent or
    every step is below ``min_fraction`` of its range. ``fn`` replaces the
    engine objective (used for testing the search itself).
    """
    if budget < 1:
        raise ConfigurationError("budget must be at least 1", field="budget")
    if fn is None:
        if scenario is None:
            raise ConfigurationError("either a scenario or an objective function is required")

        def fn(train):
            return objective(train, scenario, horizon)

    trace: list[tuple[tuple[float, float, float], float]] = []

    def evaluate(points: list[np.ndarray]) -> list[float]:
        if workers > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(lambda p: fn(train_from(p)), points))
        else:
            values = [fn(train_from(p)) for p in points]
        for p, v in zip(points, values):
            trace.append((tuple(float(c) for c in p), float(v)))
        return values

    x = box.center()
    fx = evaluate([x])[0]
    span = box.span
    steps = initial_fraction * span
    floor = min_fraction * span
    active = [i for i in range(3) if span[i] > 0]

    while len(trace) < budget:
        live = [i for i in active if steps[i] >= floor[i]]
        if not live:
            break
        for i in live:
            if len(trace) >= budget:
                break
            polls = []
            for sign in (1.0, -1.0):
                cand = x.copy()
                cand[i] += sign * steps[i]
                cand = box.clamp(cand)
                if not np.array_equal(cand, x) and not any(np.array_equal(cand, p) for p in polls):
                    polls.append(cand)
            polls = polls[: budget - len(trace)]
            values = evaluate(polls) if polls else []
            for cand, value in zip(polls, values):
                if value < fx:
                    x, fx = cand, value
                    break
            else:
                steps[i] /= 2

    best_params, best_value = min(trace, key=lambda item: item[1])
    return OptimizationResult(train_from(best_params), best_value, len(trace), trace)


def sweep(param: str, values: Iterable[float], scenario: Scenario, horizon: float | None = None,
          workers: int = 1) -> list[tuple[float, float]]:
    """L(horizon) for each value of one pulse parameter, others from the scenario's control.

    ``phi0 = 0`` encodes an absent control.
    """
    if param not in PARAMS:
        raise ConfigurationError(f"unknown parameter {param!r}; expected one of {PARAMS}", field="param")
    values = list(values)
    if not values:
        raise ConfigurationError("no sweep values", field="values")
    base = scenario.control
    horizon = scenario.grid.t_max if horizon is None else horizon
    rows = []
    for value in values:
        if base is None:
            if param != "phi0" or value != 0:
                raise ConfigurationError("sweeping tau or delta needs a [control] section", field="control")
            train = None
        else:
            settings = {"tau": base.tau, "delta": base.delta, "phi0": base.phi0}
            settings[param] = float(value)
            if param == "phi0" and value == 0:
                train = None
            else:
                try:
                    train = PulseTrain(**settings)
                except ValueError as exc:
                    raise ConfigurationError(str(exc), field=param) from None
        rows.append((float(value), objective(train, scenario, horizon, workers=workers)))
    return rows
