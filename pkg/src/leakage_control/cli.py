"""Command-line interface.

Exit codes: 0 success, 1 tolerance failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baths import SingleModeFockBath, fock_kernel, trivial_kernel
from .engine import LeakageSeries, SimulationGrid, compute_L, oscillator_model, spin_rwa_model, stationary_rate
from .errors import ConfigurationError, LeakageError
from .figure import PANELS, check_panel, panel_scenarios
from .optimize import DEFAULT_BUDGET, DEFAULT_HORIZON, ParameterBox, minimize, sweep
from .oracles import (
    STATE_KINDS,
    OracleSpec,
    example1_exact,
    example1_leakage,
    example2_exact,
    example2_leakage,
    jc_numeric,
)
from .scenario import Scenario, eval_number, fig1_scenario, parse_scenario

CSV_HEADER = ("t_fs", "C_per_lambda2", "L_per_lambda2", "b_at_lambda1")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

ENGINE_REL_TOL = 1e-3
VALIDITY_GAP_TOL = 0.02


def _fmt(x: float) -> str:
    return f"{x + 0.0:.11e}"


def series_rows(series: LeakageSeries) -> list[tuple[float, float, float, float]]:
    b = series.fidelity(1.0)
    return list(zip(series.times, series.C, series.L, b))


def render_series(series: LeakageSeries, fmt: str = "csv") -> bytes:
    """Byte-exact rendering (12 significant digits, LF line endings)."""
    rows = series_rows(series)
    if fmt == "json":
        doc = {"columns": list(CSV_HEADER), "rows": [[float(_fmt(v)) for v in row] for row in rows]}
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode("ascii")
    lines = [",".join(CSV_HEADER)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return ("\n".join(lines) + "\n").encode("ascii")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def metadata_path(data_path: Path) -> Path:
    data_path = Path(data_path)
    return data_path.with_name(data_path.name + ".meta.json")


def write_run(path: Path, series: LeakageSeries, scenario: Scenario, fmt: str, workers: int,
              wall_time: float, extra: dict | None = None) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_bytes(render_series(series, fmt))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    digest = sha256_file(path)
    meta = {
        "config": scenario.to_text(),
        "state_norm_factor": scenario.norm_factor,
        "engine_version": __version__,
        "grid": {"t_max": scenario.grid.t_max, "n_steps": scenario.grid.n_steps, "dt": scenario.grid.dt},
        "workers": workers,
        "wall_time_s": wall_time,
        "data_file": path.name,
        "format": fmt,
        "sha256": digest,
        "imag_residue": series.imag_residue,
    }
    if extra:
        meta.update(extra)
    metadata_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return digest


def verify_checksum(data_path: Path) -> bool:
    meta = json.loads(metadata_path(data_path).read_text(encoding="utf-8"))
    return meta["sha256"] == sha256_file(data_path)


def run_scenario(scenario: Scenario, workers: int = 1) -> tuple[LeakageSeries, float]:
    start = time.perf_counter()
    series = compute_L(scenario.grid, scenario.model(), workers=workers)
    return series, time.perf_counter() - start


# -- commands -------------------------------------------------------------------


def _load(config: str) -> Scenario:
    path = Path(config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


def _default_out(config: str, scenario: Scenario, suffix: str) -> Path:
    if scenario.output_path:
        out = Path(scenario.output_path)
        return out if out.is_absolute() else Path(config).parent / out
    return Path(Path(config).stem + suffix)


def cmd_run(args) -> int:
    scenario = _load(args.config)
    fmt = args.format or scenario.output_format
    out = Path(args.out) if args.out else _default_out(args.config, scenario, "." + fmt)
    series, wall = run_scenario(scenario, args.workers)
    digest = write_run(out, series, scenario, fmt, args.workers, wall)
    print(f"wrote {out} ({len(series.times)} rows, sha256 {digest[:16]}...)")
    print(f"L(t_max) per lambda^2 = {_fmt(series.L[-1])}")
    return EXIT_OK


def cmd_fig1(args) -> int:
    base = fig1_scenario(t_max=args.t_max, n_steps=args.n_steps, dim=args.dim, ell=args.ell)
    out_dir = Path(args.out)
    fmt = args.format or "csv"
    final = {}
    for curve, scenario in panel_scenarios(args.panel, base):
        start = time.perf_counter()
        extra = {"panel": args.panel, "curve": curve.name}
        if curve.dominant:
            rate, line = stationary_rate(scenario.model(), scenario.grid)
            series = LeakageSeries(scenario.grid.times, np.full(line.size, rate), line, 0.0)
            extra["dominant_rate_per_lambda2"] = rate
        else:
            series = compute_L(scenario.grid, scenario.model(), workers=args.workers)
            final[curve.name] = float(series.L[-1])
        path = out_dir / f"fig1{args.panel}_{curve.name}.{fmt}"
        write_run(path, series, scenario, fmt, args.workers, time.perf_counter() - start, extra)
        print(f"{curve.name:32s} L(t_max) = {_fmt(series.L[-1])}  -> {path}")
    ok, text = check_panel(args.panel, final)
    print(f"panel {args.panel} property: {'holds' if ok else 'VIOLATED'} ({text})")
    return EXIT_OK if ok else EXIT_FAIL


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else float("inf")


def cmd_oracle(args) -> int:
    if args.model == "spin_bath_rwa" and args.epsilon == args.omega:
        raise ConfigurationError("second-order closed form is singular at resonance (epsilon == omega); "
                                 "compare against jc_numeric directly", field="epsilon")
    grid = SimulationGrid(args.periods * 2 * np.pi / _oracle_scale(args), args.n_steps)
    t = grid.times
    lines, ok = [], True
    if args.model == "pure_leakage":
        kinds = STATE_KINDS if args.kind == "all" else (args.kind,)
        small = args.lam**2 / args.omega**2 < 0.1
        for kind in kinds:
            spec = OracleSpec("pure_leakage", args.lam, args.omega, kind)
            model = oscillator_model(spec.stored_state(args.dim), trivial_kernel(), args.omega)
            series = compute_L(grid, model, workers=args.workers)
            ref = example1_leakage(kind, args.omega, t)
            gaps = []
            for lam in (args.lam, args.lam / 2):
                s = OracleSpec("pure_leakage", lam, args.omega, kind)
                gaps.append(np.max(np.abs(series.fidelity(lam) - example1_exact(s, t))))
            ok &= _report(lines, kind, series.L, ref, gaps, small)
    else:
        spec = OracleSpec("spin_bath_rwa", args.lam, args.omega, epsilon=args.epsilon)
        small = args.lam**2 / spec.detuning**2 < 0.1
        model = spin_rwa_model(args.epsilon, fock_kernel(SingleModeFockBath(args.omega, 1)))
        series = compute_L(grid, model, workers=args.workers)
        ref = example2_leakage(spec, t)
        gaps = []
        for lam in (args.lam, args.lam / 2):
            s = OracleSpec("spin_bath_rwa", lam, args.omega, epsilon=args.epsilon)
            gaps.append(np.max(np.abs(series.fidelity(lam) - jc_numeric(s, t))))
        rabi = np.max(np.abs(jc_numeric(spec, t) - example2_exact(spec, t)))
        lines.append(f"jc_numeric vs Rabi closed form: max |diff| = {rabi:.3e}")
        ok &= rabi <= 1e-12
        ok &= _report(lines, "spin_down", series.L, ref, gaps, small)
    for line in lines:
        print(line)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def _oracle_scale(args) -> float:
    if args.model == "pure_leakage":
        return abs(args.omega)
    return abs(args.epsilon - args.omega)


def _report(lines: list[str], label: str, L, ref, gaps, small: bool) -> bool:
    abs_err = float(np.max(np.abs(L - ref)))
    rel_err = abs_err / float(np.max(np.abs(ref)))
    engine_ok = rel_err <= ENGINE_REL_TOL
    gap_ok = gaps[0] <= VALIDITY_GAP_TOL
    lines.append(f"[{label}] engine vs second-order closed form: max |dL| = {abs_err:.3e}, "
                 f"rel = {rel_err:.3e} ({'ok' if engine_ok else 'FAIL'}, tol {ENGINE_REL_TOL:g})")
    verdict = ("ok" if gap_ok else "FAIL") if small else ("ok" if gap_ok else "disagree (outside validity window)")
    lines.append(f"[{label}] engine b vs exact: max |db| = {gaps[0]:.3e} ({verdict}); "
                 f"lambda^4 ratio e(lam)/e(lam/2) = {_ratio(gaps[0], gaps[1]):.2f}")
    return engine_ok and (gap_ok or not small)


def _range(text: list[str], name: str) -> tuple[float, float]:
    try:
        return float(eval_number(text[0]).real), float(eval_number(text[1]).real)
    except ValueError as exc:
        raise ConfigurationError(str(exc), field=name) from None


def cmd_optimize(args) -> int:
    scenario = _load(args.config)
    if scenario.system_kind != "oscillator":
        raise ConfigurationError("optimization needs the oscillator system", field="system.kind")
    w = scenario.omega
    box = ParameterBox(
        tau=_range(args.tau, "tau") if args.tau else (np.pi / (20 * w), np.pi / (5 * w)),
        delta=_range(args.delta, "delta") if args.delta else (0.0, np.pi / (5 * w)),
        phi0=_range(args.phi0, "phi0") if args.phi0 else (np.pi / 10, np.pi),
    )
    result = minimize(box, scenario, args.horizon, args.budget, workers=args.workers)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    report = {"horizon_fs": args.horizon, "budget": args.budget,
              "box": {"tau": box.tau, "delta": box.delta, "phi0": box.phi0}, **result.as_dict()}
    report_path = prefix.with_name(prefix.name + ".optimize.json")
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    best = scenario.with_control(result.best).with_grid(scenario.horizon_grid(args.horizon))
    series, wall = run_scenario(best, args.workers)
    fmt = args.format or "csv"
    data_path = prefix.with_name(prefix.name + "_best." + fmt)
    write_run(data_path, series, best, fmt, args.workers, wall)
    b = result.best
    print(f"best tau={b.tau:.6g} fs delta={b.delta:.6g} fs phi0={b.phi0:.6g} rad "
          f"L({args.horizon:g} fs) = {_fmt(result.value)} after {result.n_evals} evaluations")
    print(f"wrote {report_path} and {data_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _load(args.config)
    try:
        values = [float(eval_number(v).real) for v in args.values.split(",")]
    except ValueError as exc:
        raise ConfigurationError(str(exc), field="values") from None
    rows = sweep(args.param, values, scenario, args.horizon, workers=args.workers)
    text = f"{args.param},L_T_per_lambda2\n" + "".join(f"{_fmt(v)},{_fmt(L)}\n" for v, L in rows)
    if args.out:
        Path(args.out).write_bytes(text.encode("ascii"))
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS
    parser.add_argument("--workers", type=int, default=default if suppress else 1,
                        help="threads for the engine's outer loop (output is independent of this)")
    parser.add_argument("--format", choices=("csv", "json"), default=default if suppress else None,
                        help="data file format (default: config's output.format, else csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leakage-control", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="compute C, L, b for a scenario config")
    p.add_argument("config")
    p.add_argument("--out", help="data file path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fig1", parents=[common], help="reproduce one pulse-control panel")
    p.add_argument("panel", choices=PANELS)
    p.add_argument("--out", default="fig1_out", help="output directory")
    p.add_argument("--t-max", type=float, default=1500.0)
    p.add_argument("--n-steps", type=int, default=1500)
    p.add_argument("--dim", type=int, default=12)
    p.add_argument("--ell", type=int, default=1000)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("oracle", parents=[common], help="check the engine against solvable models")
    p.add_argument("model", choices=("pure_leakage", "spin_bath_rwa"))
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--omega", type=float, default=None, help="oscillator / bath mode frequency")
    p.add_argument("--epsilon", type=float, default=1.0, help="spin level splitting")
    p.add_argument("--kind", choices=STATE_KINDS + ("all",), default="all")
    p.add_argument("--n-steps", type=int, default=2000)
    p.add_argument("--periods", type=float, default=2.0)
    p.add_argument("--dim", type=int, default=12)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("optimize", parents=[common], help="minimize L(T) over pulse parameters")
    p.add_argument("config")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--horizon", type=float, default=DEFAULT_HORIZON, help="protection time T in fs")
    p.add_argument("--tau", nargs=2, metavar=("LO", "HI"))
    p.add_argument("--delta", nargs=2, metavar=("LO", "HI"))
    p.add_argument("--phi0", nargs=2, metavar=("LO", "HI"))
    p.add_argument("--out", default="optimize", help="output prefix")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common], help="L(T) over values of one pulse parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=("tau", "delta", "phi0"))
    p.add_argument("--values", required=True, help="comma-separated values, e.g. 'pi/10,pi/5'")
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "oracle" and args.omega is None:
        args.omega = 1.0 if args.model == "pure_leakage" else 0.0
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (LeakageError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
