"""Command-line front end.

    seirqso simulate [--config FILE] [--beta ... --steps ... --out DIR]
    seirqso analyze  --alpha 0 0.5 critical | --sweep 0 1 0.1
    seirqso qso      [--beta ...]
    seirqso fit      --target-peak 140 [--target-completion 300]

Exit codes: 0 success, 2 input error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

import numpy as np

from . import calibration, qso, spectral, trajectory
from .core import ModelError, Params, SimplexState, as_state, require_admissible, validate_params

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 2, 3

# Uzbekistan: 10-day incubation, 15-day infectious period, one case per 100k at day 0.
DEFAULT_SCENARIO: dict[str, Any] = {
    "a": 0.1,
    "b": 0.066,
    "beta": 0.12,
    "q": 1.0,
    "s0": 0.99999,
    "e0": 0.0,
    "i0": 0.00001,
    "r0": 0.0,
    "steps": 300,
    "population": 34_000_000,
    "counts": False,
    "completion_threshold": None,
    "format": "csv",
}

CONFIG_KEYS = set(DEFAULT_SCENARIO) | {"out"}
CSV_HEADER = ("n", "s", "e", "i", "r")


class ConfigError(ModelError, ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(t: trajectory.Trajectory, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for n, row in enumerate(t.states):
        w.writerow([n, *(_fmt(c) for c in row)])


def read_trajectory_csv(fh: TextIO) -> np.ndarray:
    rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ConfigError(f"expected CSV header {','.join(CSV_HEADER)}")
    data = np.array([[float(c) for c in row[1:]] for row in rows[1:]])
    return data.reshape(-1, 4)


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a flat JSON scenario document."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a flat JSON object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return doc


class Scenario:
    """Resolved configuration: defaults < config file < command-line flags."""

    def __init__(self, settings: dict[str, Any]):
        self.settings = settings
        self.params = Params(beta=settings["beta"], q=settings["q"], a=settings["a"], b=settings["b"])
        require_admissible(self.params)
        self.population = float(settings["population"])
        if not (math.isfinite(self.population) and self.population > 0):
            raise ConfigError(f"population must be positive, got {settings['population']}")
        coords = [float(settings[k]) for k in ("s0", "e0", "i0", "r0")]
        if settings.get("counts"):
            self.initial_state = SimplexState.from_counts(*coords, self.population)
        else:
            self.initial_state = as_state(coords)
        self.steps = int(settings["steps"])
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        thr = settings.get("completion_threshold")
        self.completion_threshold = float(thr) if thr is not None else 1.0 / self.population
        if settings.get("format", "csv") not in ("csv", "json", "both"):
            raise ConfigError("format must be one of csv, json, both")
        self.format = settings.get("format", "csv")


def resolve_settings(args: argparse.Namespace) -> dict[str, Any]:
    settings = dict(DEFAULT_SCENARIO)
    if getattr(args, "config", None):
        settings.update(load_config(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON scenario file; flags override it")
    for name, desc in (
        ("a", "exposed -> infectious rate"),
        ("b", "recovery rate"),
        ("beta", "transmission rate"),
        ("q", "relative infectiousness of the exposed"),
    ):
        p.add_argument(f"--{name}", type=float, help=desc)


def _add_state_flags(p: argparse.ArgumentParser) -> None:
    for name in ("s0", "e0", "i0", "r0"):
        p.add_argument(f"--{name}", type=float, help=f"initial {name[0]} (fraction, or count with --counts)")
    p.add_argument("--population", type=float, help="population size N")
    p.add_argument("--counts", action="store_true", default=None, help="initial values are head counts")
    p.add_argument("--completion-threshold", dest="completion_threshold", type=float,
                   help="infectious fraction that marks completion (default 1/N)")


def _summary(sc: Scenario, t: trajectory.Trajectory) -> dict[str, Any]:
    peak_day, peak_value = trajectory.peak(t)
    limit = trajectory.find_limit(sc.initial_state, sc.params)
    A, B = t.A, t.B

    def first(mask: np.ndarray) -> int | None:
        return int(np.argmax(mask)) if mask.any() else None

    return {
        "params": sc.params.as_dict(),
        "initial_state": list(sc.initial_state),
        "population": sc.population,
        "steps": sc.steps,
        "peak_day": peak_day,
        "peak_value": peak_value,
        "peak_persons": peak_value * sc.population,
        "completion_threshold": sc.completion_threshold,
        "completion_day": trajectory.completion_day(t, sc.completion_threshold),
        "A_positive_day": first(A > 0),
        "B_positive_day": first(B > 0),
        "m_entry_day": t.m_entry_day(),
        "final_state": list(t[len(t) - 1]),
        "limit": limit.as_dict(),
        "critical_alpha": limit.critical_alpha,
        "bound_ok": limit.bound_ok,
    }


def cmd_simulate(args: argparse.Namespace, stdout: TextIO) -> int:
    sc = Scenario(resolve_settings(args))
    t = trajectory.simulate(sc.initial_state, sc.params, sc.steps)
    summary = _summary(sc, t)
    out = Path(sc.settings.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    if sc.format in ("csv", "both"):
        with open(out / "trajectory.csv", "w", newline="") as fh:
            write_trajectory_csv(t, fh)
    if sc.format in ("json", "both"):
        with open(out / "trajectory.json", "w") as fh:
            json.dump({"columns": list(CSV_HEADER), "rows": [[n, *row] for n, row in enumerate(t.states.tolist())]}, fh)
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, ensure_ascii=False)
    json.dump(summary, stdout, indent=2, ensure_ascii=False)
    stdout.write("\n")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, stdout: TextIO) -> int:
    settings = resolve_settings(args)
    p = Params(beta=settings["beta"], q=settings["q"], a=settings["a"], b=settings["b"])
    require_admissible(p)
    crit = spectral.critical_alpha(p) if p.beta > 0 else None
    sweep = args.sweep is not None
    if sweep:
        start, stop, stride = args.sweep
        if stride <= 0:
            raise ConfigError("sweep step must be positive")
        count = int(math.floor((stop - start) / stride + 1e-9)) + 1
        alphas = [round(start + k * stride, 12) for k in range(count)]
    else:
        alphas = []
        for token in args.alpha or ["0"]:
            if token == "critical":
                if crit is None:
                    raise ConfigError("critical alpha is undefined for beta = 0")
                alphas.append(crit)
            else:
                alphas.append(float(token))
    reports = []
    for alpha in alphas:
        rep = spectral.classify(alpha, p).as_dict()
        if sweep:
            rep.pop("critical_alpha")
        reports.append(rep)
    doc: dict[str, Any] = {"params": p.as_dict(), "critical_alpha": crit, "reports": reports}
    _emit_json(doc, args.out, stdout)
    return EXIT_OK


def cmd_qso(args: argparse.Namespace, stdout: TextIO) -> int:
    settings = resolve_settings(args)
    p = Params(beta=settings["beta"], q=settings["q"], a=settings["a"], b=settings["b"])
    t = qso.build_tensor(p)
    report = qso.verify_tensor(t, tol=args.tol)
    dump = qso.dump_tensor(t)
    if args.out:
        Path(args.out).write_text(dump)
    else:
        stdout.write(dump)
    doc = report.as_dict()
    doc["admissibility"] = list(validate_params(p).violations)
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stderr.write(text)
    if not report.passed:
        sys.stderr.write(f"verification failed: {', '.join(report.failures)}\n")
        return EXIT_VERIFY
    return EXIT_OK


def _axis(bounds: Sequence[float] | None, fallback: calibration.Axis) -> calibration.Axis:
    if bounds is None:
        return fallback
    lo, hi, n = bounds
    if float(n) != int(n):
        raise ConfigError(f"axis resolution must be an integer, got {n}")
    return calibration.Axis(float(lo), float(hi), int(n))


def cmd_fit(args: argparse.Namespace, stdout: TextIO) -> int:
    settings = resolve_settings(args)
    population = float(settings["population"])
    coords = [float(settings[k]) for k in ("s0", "e0", "i0", "r0")]
    if settings.get("counts"):
        x0 = SimplexState.from_counts(*coords, population)
    else:
        x0 = as_state(coords)
    tgt = calibration.CalibrationTarget(
        target_peak_day=args.target_peak,
        target_completion_day=args.target_completion,
        population=population,
        initial_state=x0,
        completion_threshold=settings.get("completion_threshold"),
    )
    box = calibration.SearchBox.default(args.resolution)
    if args.box:
        try:
            doc = json.loads(Path(args.box).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read box {args.box}: {exc}") from exc
        box = calibration.SearchBox(**{k: _axis(doc.get(k), getattr(box, k)) for k in ("a", "b", "beta", "q")})
    box = calibration.SearchBox(
        a=_axis(args.a_range, box.a),
        b=_axis(args.b_range, box.b),
        beta=_axis(args.beta_range, box.beta),
        q=_axis(args.q_range, box.q),
    )
    result = calibration.grid_search(box, tgt, top=args.top)
    doc = result.as_dict()
    doc["target"] = {
        "peak_day": tgt.target_peak_day,
        "completion_day": tgt.target_completion_day,
        "completion_threshold": tgt.threshold,
        "population": population,
    }
    _emit_json(doc, args.out, stdout)
    return EXIT_OK


def _emit_json(doc: dict, out: str | None, stdout: TextIO) -> None:
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seirqso", description="Discrete-time SEIR map on the 3-simplex")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write trajectory + summary")
    _add_param_flags(sim)
    _add_state_flags(sim)
    sim.add_argument("--steps", type=int, help="number of days to simulate")
    sim.add_argument("--out", help="output directory (default: current directory)")
    sim.add_argument("--format", choices=("csv", "json", "both"), help="trajectory file format")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="spectral report at fixed points (alpha, 0, 0, 1-alpha)")
    _add_param_flags(ana)
    group = ana.add_mutually_exclusive_group()
    group.add_argument("--alpha", nargs="+", help="alpha values; the word 'critical' selects the threshold")
    group.add_argument("--sweep", nargs=3, type=float, metavar=("START", "STOP", "STEP"))
    ana.add_argument("--out", help="write the report here instead of stdout")
    ana.set_defaults(func=cmd_analyze)

    t = sub.add_parser("qso", help="dump and verify the quadratic stochastic operator coefficients")
    _add_param_flags(t)
    t.add_argument("--tol", type=float, default=1e-12, help="verification tolerance")
    t.add_argument("--out", help="write the tensor dump here instead of stdout")
    t.add_argument("--report", help="write the verification report here instead of stderr")
    t.set_defaults(func=cmd_qso)

    fit = sub.add_parser("fit", help="grid-search parameters for a target peak (and completion) day")
    fit.add_argument("--config", help="flat JSON scenario file for the initial state and population")
    _add_state_flags(fit)
    fit.add_argument("--target-peak", dest="target_peak", type=int, required=True)
    fit.add_argument("--target-completion", dest="target_completion", type=int)
    fit.add_argument("--box", help='JSON file {"a": [lo, hi, n], ...}; missing axes use defaults')
    for name in ("a", "b", "beta", "q"):
        fit.add_argument(f"--{name}-range", dest=f"{name}_range", nargs=3, type=float, metavar=("LO", "HI", "N"))
    fit.add_argument("--resolution", type=int, default=calibration.DEFAULT_RESOLUTION,
                     help="points per axis for the default box")
    fit.add_argument("--top", type=int, default=10, help="number of runner-ups to report")
    fit.add_argument("--out", help="write the report here instead of stdout")
    fit.set_defaults(func=cmd_fit)
    return parser


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, stdout or sys.stdout)
    except (ModelError, ValueError, KeyError) as exc:
        sys.stderr.write(f"seirqso {args.command}: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
