"""Command-line front end: simulate, tune, compare, nominal-config.

Exit codes: 0 ok, 1 usage, 2 invalid input, 3 simulation diverged.
Every command writes manifest.json first and rewrites it on completion;
timestamps live only there, so all other outputs are byte-reproducible.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import config as cfgio
from .metrics import DEFAULT_BAND, area_metrics, comparison_report
from .model import DecisionVector, ValidationError, check, nominal_decision
from .objective import ScenarioObjective, ise
from .optimizers import METHODS, OptResult, minimize
from .plots import frequency_charts
from .simulator import Disturbance, simulate

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0.0.0"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


class Manifest:
    """manifest.json bookkeeping; the only file allowed to carry wall-clock time."""

    def __init__(self, out: Path, command: str, **fields):
        self.path = out / "manifest.json"
        self.data = {"command": command, "tool_version": tool_version(), "status": "running",
                     "started": _now(), "outputs": [], **fields}
        self.save()

    def add(self, name: str) -> None:
        if name not in self.data["outputs"]:
            self.data["outputs"].append(name)

    def save(self) -> None:
        _write_json(self.path, self.data)

    def finish(self, status: str) -> None:
        self.data["status"] = status
        self.data["finished"] = _now()
        self.save()


def _load_config(path) -> cfgio.RunConfig:
    if path is None:
        return cfgio.RunConfig()
    try:
        rc = cfgio.load_file(path)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    check(rc.system)
    return rc


def _load_decision(path, n_areas: int) -> DecisionVector:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read decision {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc.msg})") from exc
    try:
        if "best" in data:
            decision = DecisionVector.from_array(data["best"])
        else:
            decision = DecisionVector.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: expected kp/ki/b/r lists or an optimizer result") from exc
    if decision.n_areas != n_areas:
        raise InputError(f"{path}: decision has {decision.n_areas} areas, system has {n_areas}")
    return decision


def _metrics_json(traces, band) -> dict:
    areas = []
    for i, m in enumerate(area_metrics(traces, band), start=1):
        areas.append({"area": i, **m.to_dict()})
    return {"areas": areas, "band": band, "diverged": traces.diverged, "t_diverge": traces.t_diverge,
            "ise": ise(traces)}


def cmd_simulate(args) -> int:
    rc = _load_config(args.config)
    n = rc.system.n_areas
    if args.decision and args.nominal:
        raise UsageError("give either --decision or --nominal, not both")
    if args.decision:
        decision = _load_decision(args.decision, n)
    elif args.nominal:
        decision = nominal_decision(rc.system)
    else:
        raise UsageError("one of --decision or --nominal is required")
    dist = rc.disturbance
    dist = Disturbance(
        area=args.load_area if args.load_area is not None else dist.area,
        magnitude=args.load_pu if args.load_pu is not None else dist.magnitude,
        start_time=args.load_start if args.load_start is not None else dist.start_time,
    )
    if dist.area > n:
        raise InputError(f"--load-area {dist.area} exceeds the {n} areas in the system")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inputs = {"config": cfgio.dump(rc), "decision": decision.to_dict(), "disturbance": asdict(dist)}
    man = Manifest(out, "simulate", input_hash=_sha(inputs), seed=args.seed,
                   decision=decision.to_dict(), disturbance=asdict(dist))

    traces = simulate(rc.system, decision, dist, rc.simulation)
    traces.to_csv(out / "traces.csv")
    man.add("traces.csv")
    _write_json(out / "metrics.json", _metrics_json(traces, args.band))
    man.add("metrics.json")
    if traces.diverged:
        man.finish("diverged")
        print(f"simulation diverged at t={traces.t_diverge:g} s; truncated trace written to {out}", file=sys.stderr)
        return EXIT_DIVERGED
    man.finish("ok")
    print(f"wrote {out / 'traces.csv'} and {out / 'metrics.json'}")
    return EXIT_OK


def problem_hash(rc: cfgio.RunConfig) -> str:
    """Identity of a tuning problem: cost scenario plus search box."""
    return _sha({"scenario": rc.tuning_scenario().to_dict(),
                 "bounds": [rc.bounds.lower.tolist(), rc.bounds.upper.tolist()]})


def cmd_tune(args) -> int:
    rc = _load_config(args.config)
    params = rc.optimizer_params(args.method, args.profile)
    if args.max_evaluations is not None:
        if args.max_evaluations < 1:
            raise InputError("--max-evaluations must be >= 1")
        params = replace(params, max_evaluations=args.max_evaluations)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenario_hash = problem_hash(rc)
    config_text = cfgio.dump(rc)
    man = Manifest(out, "tune", method=args.method, profile=args.profile, seed=args.seed,
                   optimizer_params=asdict(params), scenario_hash=scenario_hash,
                   input_hash=_sha({"config": config_text, "method": args.method,
                                    "params": asdict(params), "seed": args.seed}))
    (out / "config.ini").write_text(config_text)
    man.add("config.ini")

    objective = ScenarioObjective(rc.tuning_scenario())
    start = rc.bounds.clamp(np.zeros(rc.bounds.dim)) if args.method == "gd" else None
    result = minimize(args.method, objective, rc.bounds, params, seed=args.seed, start=start)

    payload = result.to_dict()
    payload["profile"] = args.profile
    payload["scenario_hash"] = scenario_hash
    _write_json(out / "result.json", payload)
    man.add("result.json")
    _write_json(out / "best_decision.json", DecisionVector.from_array(result.best).to_dict())
    man.add("best_decision.json")
    with open(out / "convergence.csv", "w") as fh:
        fh.write("iteration,best_cost\n")
        for k, c in enumerate(result.history, start=1):
            fh.write(f"{k},{c!r}\n")
    man.add("convergence.csv")
    man.finish("ok")
    print(f"{args.method}: best cost {result.best_cost:.6g} after {result.evaluations} evaluations")
    return EXIT_OK


def _load_run(path: Path):
    try:
        result = OptResult.from_dict(json.loads((path / "result.json").read_text()))
        meta = json.loads((path / "result.json").read_text())
        rc = cfgio.load_file(path / "config.ini")
    except OSError as exc:
        raise InputError(f"{path}: not a tune output directory ({exc.strerror})") from exc
    return result, meta.get("scenario_hash"), rc


def cmd_compare(args) -> int:
    runs = [_load_run(Path(p)) for p in args.results]
    hashes = {h for _, h, _ in runs}
    if len(hashes) != 1 or None in hashes:
        raise InputError("results were tuned on different scenarios; refusing to compare")
    rc = runs[0][2]
    dist = Disturbance(area=args.load_area, magnitude=args.load_pu)
    if dist.area > rc.system.n_areas:
        raise InputError(f"--load-area {dist.area} exceeds the {rc.system.n_areas} areas in the system")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = Manifest(out, "compare", scenario_hash=hashes.pop(), seed=args.seed,
                   results=[str(p) for p in args.results], disturbance=asdict(dist))

    labelled, seen = [], {}
    for result, _, _ in runs:
        seen[result.method] = seen.get(result.method, 0) + 1
        label = result.method.upper() + ("" if seen[result.method] == 1 else f" ({seen[result.method]})")
        traces = simulate(rc.system, DecisionVector.from_array(result.best), dist, rc.simulation)
        labelled.append((label, traces))

    report = comparison_report(labelled, band=args.band)
    (out / "report.txt").write_text(report.to_text())
    man.add("report.txt")
    (out / "report.csv").write_text(report.to_csv())
    man.add("report.csv")
    for i, svg in enumerate(frequency_charts(labelled), start=1):
        name = f"delta_f_area{i}.svg"
        (out / name).write_text(svg)
        man.add(name)
    diverged = [label for label, tr in labelled if tr.diverged]
    man.finish("diverged" if diverged else "ok")
    print(report.to_text(), end="")
    if diverged:
        print(f"diverged under re-simulation: {', '.join(diverged)}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_nominal_config(args) -> int:
    text = cfgio.dump(cfgio.RunConfig())
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = Manifest(out, "nominal-config", seed=args.seed)
    (out / "config.ini").write_text(text)
    man.add("config.ini")
    man.finish("ok")
    print(f"wrote {out / 'config.ini'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--config", help="INI config file; defaults to the nominal three-area system")

    parser = _Parser(prog="lfcopt", description="Load-frequency control simulation and controller tuning.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="simulate one decision under a load step")
    p.add_argument("--out", default="runs/simulate", help="output directory")
    p.add_argument("--decision", help="JSON decision (kp/ki/b/r lists) or a tune result.json")
    p.add_argument("--nominal", action="store_true", help="droop-only decision with reference droop and bias")
    p.add_argument("--load-area", type=int, help="area receiving the load step (1-based)")
    p.add_argument("--load-pu", type=float, help="step size in pu")
    p.add_argument("--load-start", type=float, help="step time in seconds")
    p.add_argument("--band", type=float, default=DEFAULT_BAND, help="settling band in Hz")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune", parents=[common], help="tune controller gains with one optimizer")
    p.add_argument("--out", default="runs/tune", help="output directory")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--profile", default="desk", choices=sorted(cfgio.PROFILES))
    p.add_argument("--max-evaluations", type=int, help="cap on cost evaluations")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("compare", parents=[common], help="tabulate and plot tuned results side by side")
    p.add_argument("results", nargs="+", help="tune output directories")
    p.add_argument("--out", default="runs/compare", help="output directory")
    p.add_argument("--load-area", type=int, default=1)
    p.add_argument("--load-pu", type=float, default=0.01)
    p.add_argument("--band", type=float, default=DEFAULT_BAND, help="settling band in Hz")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("nominal-config", parents=[common], help="write the nominal system as an INI config")
    p.add_argument("--out", help="output directory (prints to stdout when omitted)")
    p.set_defaults(func=cmd_nominal_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lfcopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print("lfcopt: invalid system:\n  " + "\n  ".join(exc.errors), file=sys.stderr)
        return EXIT_INVALID
    except (InputError, ValueError, configparser.Error) as exc:
        print(f"lfcopt: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
