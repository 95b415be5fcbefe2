"""Scenario description and its sectioned key-value config format.

Example::

    [system]
    kind = oscillator        # oscillator | spin
    dim = 12
    omega = 0.01 / 1.5       # fs^-1 (angular, no 2*pi)
    coupling = 1.0           # prefactor of S; L is reported per lambda^2

    [state]
    amplitudes = 1, 1        # complex allowed, e.g. 1, 0.5+0.5j

    [bath]
    kind = thermal           # thermal | fock | trivial
    ell = 1000
    omega_d = 0.01
    temperature = 300        # K; or give beta in fs

    [control]                # optional; absent means f = 0
    tau = pi / (10 * 0.01 / 1.5)
    delta = 0                # 0 selects impulsive kicks
    phi0 = pi

    [grid]
    t_max = 1500
    n_steps = 1500

    [output]
    path = run.csv
    format = csv             # csv | json

Numeric values accept arithmetic on literals and ``pi``.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field, replace

import numpy as np

from .baths import (
    DiscreteThermalBath,
    SingleModeFockBath,
    TrivialBath,
    beta_from_temperature,
    kernel_for,
)
from .control import PulseTrain
from .engine import LeakageModel, SimulationGrid, oscillator_model, spin_rwa_model
from .errors import ConfigurationError
from .quantum import DEFAULT_FOCK_DIM

FIG1_OMEGA_D = 0.01
FIG1_OMEGA = FIG1_OMEGA_D / 1.5
FIG1_ELL = 1000
FIG1_TEMPERATURE = 300.0
FIG1_T_MAX = 1500.0
FIG1_N_STEPS = 1500

_SCHEMA = {
    "system": {"kind", "dim", "omega", "epsilon", "coupling"},
    "state": {"amplitudes"},
    "bath": {"kind", "ell", "omega_d", "temperature", "beta", "omega", "occupation"},
    "control": {"shape", "tau", "delta", "phi0"},
    "grid": {"t_max", "n_steps"},
    "output": {"path", "format"},
}
_REQUIRED_SECTIONS = ("system", "state", "bath", "grid")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def eval_number(text: str) -> complex | float:
    """Evaluate arithmetic over numeric literals and ``pi``."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return walk(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot evaluate {text!r}: {exc}") from None


@dataclass(frozen=True)
class BathConfig:
    kind: str
    ell: int | None = None
    omega_d: float | None = None
    temperature: float | None = None
    beta: float | None = None
    omega: float | None = None
    occupation: int | None = None

    @property
    def inverse_temperature(self) -> float:
        if self.beta is not None:
            return self.beta
        return beta_from_temperature(self.temperature)

    def build(self):
        if self.kind == "thermal":
            return DiscreteThermalBath.from_spectrum(self.ell, self.omega_d, self.inverse_temperature)
        if self.kind == "fock":
            return SingleModeFockBath(self.omega, self.occupation)
        return TrivialBath()


@dataclass(frozen=True)
class Scenario:
    """Full description of one leakage run."""

    system_kind: str
    dim: int
    omega: float | None
    epsilon: float | None
    amplitudes: tuple[complex, ...]
    bath: BathConfig
    grid: SimulationGrid
    control: PulseTrain | None = None
    coupling: float = 1.0
    output_path: str | None = None
    output_format: str = "csv"
    norm_factor: float = 1.0
    _kernel: list = field(default_factory=list, compare=False, repr=False)

    def state(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    def kernel(self):
        # shared across derived scenarios so the bath grid cache is reused
        if not self._kernel:
            self._kernel.append(kernel_for(self.bath.build()))
        return self._kernel[0]

    def model(self) -> LeakageModel:
        kernel = self.kernel()
        if self.system_kind == "spin":
            model = spin_rwa_model(self.epsilon, kernel, self.state())
        else:
            model = oscillator_model(self.state(), kernel, self.omega, self.control)
        if self.coupling != 1.0:
            terms = tuple(replace(t, operator=self.coupling * t.operator) for t in model.terms)
            model = LeakageModel(model.state, terms, model.kernel)
        return model

    def with_control(self, train: PulseTrain | None) -> "Scenario":
        if train is not None and self.system_kind != "oscillator":
            raise ConfigurationError("pulse control applies to the oscillator system only", field="control")
        return replace(self, control=train)

    def with_grid(self, grid: SimulationGrid) -> "Scenario":
        return replace(self, grid=grid)

    def horizon_grid(self, horizon: float) -> SimulationGrid:
        """Grid ending at ``horizon`` with (about) this scenario's step."""
        return SimulationGrid(horizon, max(1, int(round(horizon / self.grid.dt))))

    def to_text(self) -> str:
        """Echo in the config format (normalized amplitudes)."""
        lines = ["[system]", f"kind = {self.system_kind}", f"dim = {self.dim}"]
        if self.omega is not None:
            lines.append(f"omega = {self.omega!r}")
        if self.epsilon is not None:
            lines.append(f"epsilon = {self.epsilon!r}")
        lines.append(f"coupling = {self.coupling!r}")
        amps = ", ".join(_fmt_complex(a) for a in self.amplitudes)
        lines += ["", "[state]", f"amplitudes = {amps}", "", "[bath]", f"kind = {self.bath.kind}"]
        for key in ("ell", "omega_d", "temperature", "beta", "omega", "occupation"):
            value = getattr(self.bath, key)
            if value is not None:
                lines.append(f"{key} = {value!r}")
        if self.control is not None:
            c = self.control
            lines += ["", "[control]", f"shape = {c.shape}", f"tau = {c.tau!r}",
                      f"delta = {c.delta!r}", f"phi0 = {c.phi0!r}"]
        lines += ["", "[grid]", f"t_max = {self.grid.t_max!r}", f"n_steps = {self.grid.n_steps}"]
        if self.output_path is not None:
            lines += ["", "[output]", f"path = {self.output_path}", f"format = {self.output_format}"]
        return "\n".join(lines) + "\n"


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    return repr(z).strip("()")


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else {}

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str) -> str:
        if key not in self.data:
            raise ConfigurationError("missing required key", field=f"{self.name}.{key}")
        return self.data[key]

    def number(self, key: str, default=None, positive=False, nonneg=False) -> float | None:
        if key not in self.data:
            if default is None:
                return None
            return default
        try:
            value = eval_number(self.data[key])
        except ValueError as exc:
            raise ConfigurationError(str(exc), field=f"{self.name}.{key}") from None
        if isinstance(value, complex):
            raise ConfigurationError("expected a real number", field=f"{self.name}.{key}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigurationError("value must be finite", field=f"{self.name}.{key}")
        if positive and not value > 0:
            raise ConfigurationError(f"must be positive, got {value}", field=f"{self.name}.{key}")
        if nonneg and value < 0:
            raise ConfigurationError(f"must be nonnegative, got {value}", field=f"{self.name}.{key}")
        return value

    def require_number(self, key: str, **kw) -> float:
        value = self.number(key, **kw)
        if value is None:
            raise ConfigurationError("missing required key", field=f"{self.name}.{key}")
        return value

    def integer(self, key: str, default=None, minimum=None) -> int | None:
        value = self.number(key, default=default)
        if value is None:
            return None
        if value != int(value):
            raise ConfigurationError(f"expected an integer, got {value}", field=f"{self.name}.{key}")
        if minimum is not None and value < minimum:
            raise ConfigurationError(f"must be >= {minimum}, got {int(value)}", field=f"{self.name}.{key}")
        return int(value)

    def choice(self, key: str, options: tuple[str, ...], default: str | None = None) -> str:
        if key not in self.data:
            if default is None:
                raise ConfigurationError("missing required key", field=f"{self.name}.{key}")
            return default
        value = self.data[key].strip()
        if value not in options:
            raise ConfigurationError(f"expected one of {options}, got {value!r}", field=f"{self.name}.{key}")
        return value


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario config."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigurationError("expected a [section] header", line=exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigurationError(exc.message.split(":", 1)[-1].strip(), line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigurationError("malformed line", line=lineno) from None

    for name in parser.sections():
        if name not in _SCHEMA:
            raise ConfigurationError(f"unknown section [{name}]", field=name)
        unknown = set(parser[name]) - _SCHEMA[name]
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigurationError("unknown key", field=f"{name}.{key}")
    for name in _REQUIRED_SECTIONS:
        if not parser.has_section(name):
            raise ConfigurationError(f"missing section [{name}]", field=name)

    system = _Section(parser, "system")
    kind = system.choice("kind", ("oscillator", "spin"), default="oscillator")
    if kind == "spin":
        dim = system.integer("dim", default=2)
        if dim != 2:
            raise ConfigurationError("spin system has dim 2", field="system.dim")
        epsilon = system.require_number("epsilon")
        omega = None
    else:
        dim = system.integer("dim", default=DEFAULT_FOCK_DIM, minimum=2)
        omega = system.require_number("omega", positive=True)
        epsilon = None
        if system.has("epsilon"):
            raise ConfigurationError("epsilon applies to the spin system only", field="system.epsilon")
    coupling = system.number("coupling", default=1.0)

    state = _Section(parser, "state")
    amps = _parse_amplitudes(state.raw("amplitudes"))
    if len(amps) > dim:
        raise ConfigurationError(f"{len(amps)} amplitudes exceed dim {dim}", field="state.amplitudes")
    amps = np.concatenate([amps, np.zeros(dim - len(amps), dtype=complex)])
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise ConfigurationError("state has zero norm", field="state.amplitudes")
    amps = amps / norm

    bath_sec = _Section(parser, "bath")
    bath_kind = bath_sec.choice("kind", ("thermal", "fock", "trivial"))
    allowed = {
        "thermal": {"kind", "ell", "omega_d", "temperature", "beta"},
        "fock": {"kind", "omega", "occupation"},
        "trivial": {"kind"},
    }[bath_kind]
    for key in bath_sec.data:
        if key not in allowed:
            raise ConfigurationError(f"not valid for a {bath_kind} bath", field=f"bath.{key}")
    if bath_kind == "thermal":
        if bath_sec.has("temperature") == bath_sec.has("beta"):
            raise ConfigurationError("give exactly one of temperature or beta", field="bath.temperature")
        bath = BathConfig(
            "thermal",
            ell=bath_sec.integer("ell", minimum=1) or _missing("bath.ell"),
            omega_d=bath_sec.require_number("omega_d", positive=True),
            temperature=bath_sec.number("temperature", positive=True),
            beta=bath_sec.number("beta", positive=True),
        )
    elif bath_kind == "fock":
        bath = BathConfig("fock", omega=bath_sec.require_number("omega"),
                          occupation=bath_sec.integer("occupation", default=1, minimum=0))
    else:
        bath = BathConfig("trivial")
    if (kind == "spin") != (bath_kind == "fock"):
        raise ConfigurationError("the spin system pairs with the fock bath only", field="bath.kind")

    control = None
    if parser.has_section("control"):
        if kind != "oscillator":
            raise ConfigurationError("pulse control applies to the oscillator system only", field="control")
        ctl = _Section(parser, "control")
        tau = ctl.require_number("tau", positive=True)
        delta = ctl.require_number("delta", nonneg=True)
        phi0 = ctl.require_number("phi0")
        if delta > tau:
            raise ConfigurationError(f"delta={delta} exceeds tau={tau}", field="control.delta")
        shape = ctl.choice("shape", ("rectangular", "impulse"), default="impulse" if delta == 0 else "rectangular")
        try:
            control = PulseTrain(tau, delta, phi0, shape)
        except ValueError as exc:
            raise ConfigurationError(str(exc), field="control.shape") from None

    grid_sec = _Section(parser, "grid")
    t_max = grid_sec.require_number("t_max", positive=True)
    n_steps = grid_sec.integer("n_steps", minimum=1)
    if n_steps is None:
        raise ConfigurationError("missing required key", field="grid.n_steps")

    out = _Section(parser, "output")
    path = out.data["path"].strip() if out.has("path") else None
    fmt = out.choice("format", ("csv", "json"), default="csv")

    return Scenario(
        system_kind=kind, dim=dim, omega=omega, epsilon=epsilon,
        amplitudes=tuple(complex(a) for a in amps), bath=bath,
        grid=SimulationGrid(t_max, n_steps), control=control, coupling=coupling,
        output_path=path, output_format=fmt, norm_factor=1.0 / norm,
    )


def _missing(field_name: str):
    raise ConfigurationError("missing required key", field=field_name)


def _parse_amplitudes(text: str) -> np.ndarray:
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise ConfigurationError("empty amplitude", field="state.amplitudes")
        try:
            values.append(complex(eval_number(item)))
        except ValueError as exc:
            raise ConfigurationError(str(exc), field="state.amplitudes") from None
    return np.array(values, dtype=complex)


def fig1_scenario(t_max: float = FIG1_T_MAX, n_steps: int = FIG1_N_STEPS, dim: int = DEFAULT_FOCK_DIM,
                  ell: int = FIG1_ELL, temperature: float = FIG1_TEMPERATURE) -> Scenario:
    """Oscillator in (|0> + |1>)/sqrt 2 coupled to a 300 K discrete bath."""
    amps = np.zeros(dim, dtype=complex)
    amps[:2] = 1 / np.sqrt(2)
    return Scenario(
        system_kind="oscillator", dim=dim, omega=FIG1_OMEGA, epsilon=None,
        amplitudes=tuple(complex(a) for a in amps),
        bath=BathConfig("thermal", ell=ell, omega_d=FIG1_OMEGA_D, temperature=temperature),
        grid=SimulationGrid(t_max, n_steps),
    )
