"""Curve sets of the four pulse-control panels.

Panel D uses tau_0 = pi / (10 Omega).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import PulseTrain
from .scenario import Scenario

PANELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class Curve:
    name: str
    train: PulseTrain | None
    dominant: bool = False


def panel_curves(panel: str, omega: float) -> list[Curve]:
    pi = np.pi
    if panel == "A":
        curves = [Curve("uncontrolled", None), Curve("dominant", None, dominant=True)]
        for k in (20, 10, 5):
            curves.append(Curve(f"impulse_tau_pi_over_{k}Omega", PulseTrain(pi / (k * omega), 0.0, pi)))
        return curves
    tau = pi / (10 * omega)
    if panel == "B":
        return [Curve(f"delta_tau_over_{k}", PulseTrain(tau, tau / k, pi)) for k in (5, 2, 1)]
    if panel == "C":
        return [Curve(f"phi0_pi_over_{k}", PulseTrain(tau, tau / 2, pi / k)) for k in (10, 5, 2)]
    if panel == "D":
        curves = []
        for sign, label in ((1, "pos"), (-1, "neg")):
            for k in (100, 10):
                t = tau / k
                curves.append(Curve(f"{label}_phi0_pi_over_{k}", PulseTrain(t, t / 2, sign * pi / k)))
        return curves
    raise ValueError(f"unknown panel {panel!r}; expected one of {PANELS}")


def panel_scenarios(panel: str, base: Scenario) -> list[tuple[Curve, Scenario]]:
    return [(c, base.with_control(c.train)) for c in panel_curves(panel, base.omega)]


def check_panel(panel: str, final: dict[str, float]) -> tuple[bool, str]:
    """Qualitative property of a panel, from L(t_max) per curve name."""
    if panel == "A":
        seq = [final["uncontrolled"]] + [final[f"impulse_tau_pi_over_{k}Omega"] for k in (5, 10, 20)]
        ok = all(a > b for a, b in zip(seq, seq[1:])) and seq[-1] > 0
        return ok, "uncontrolled > tau=pi/5W > pi/10W > pi/20W > 0"
    if panel == "B":
        vals = list(final.values())
        ratio = max(vals) / min(vals)
        return ratio <= 2, f"max/min over widths = {ratio:.3f} (<= 2)"
    if panel == "C":
        seq = [final[f"phi0_pi_over_{k}"] for k in (10, 5, 2)]
        return all(a > b for a, b in zip(seq, seq[1:])), "strictly decreasing with intensity"
    pairs = []
    for label in ("pos", "neg"):
        a, b = final[f"{label}_phi0_pi_over_100"], final[f"{label}_phi0_pi_over_10"]
        pairs.append(abs(a - b) / max(a, b))
    flips = [max(final[f"pos_phi0_pi_over_{k}"], final[f"neg_phi0_pi_over_{k}"])
             / min(final[f"pos_phi0_pi_over_{k}"], final[f"neg_phi0_pi_over_{k}"]) for k in (100, 10)]
    ok = max(pairs) <= 0.2 and max(flips) <= 2
    return ok, f"same-Omega_c gap {max(pairs):.3f} (<= 0.2), sign-flip ratio {max(flips):.3f} (<= 2)"
