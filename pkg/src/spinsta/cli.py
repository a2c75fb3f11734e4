"""Command-line front end.

Subcommands::

    spinsta list
    spinsta design     --scenario NAME | --config FILE  [--out DIR] [--format csv|json]
    spinsta run        --scenario NAME | --config FILE  [--out DIR] [--steps N]
    spinsta sweep      --scenario NAME [--param delta|D] [--range=lo:hi:step] [--workers K]
    spinsta reproduce  fig2|fig3|fig4|fig5|fig6 [--out DIR]

Exit codes: 0 success, 2 configuration or usage error, 3 numerical or design failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import dynamics, scenarios, sensitivity
from .errors import ConfigurationError, SpinstaError
from .pulsedesign import beta_closure_formula

SCHEMA_VERSION = 1
EXIT_CONFIG, EXIT_NUMERIC = 2, 3
#: Trajectory rows are written every this many integrator steps.
TRAJECTORY_STRIDE = 10
FIGURES = {
    "fig2": ("heis-flip-optimal",),
    "fig3": ("heis-flip-dm",),
    "fig4": ("ising-bell-amp",),
    "fig5": ("ising-bell-dm",),
    "fig6": ("baselines-compare", "ising-bell-amp"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# -- atomic output ----------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(v):
    v = float(v)
    return repr(v) if np.isfinite(v) else ("nan" if np.isnan(v) else ("inf" if v > 0 else "-inf"))


def _table_text(header, rows, fmt: str) -> str:
    if fmt == "json":
        data = {"schema_version": SCHEMA_VERSION, "columns": list(header),
                "rows": [[float(v) for v in row] for row in rows]}
        return json.dumps(data, sort_keys=True, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) for v in row])
    return buf.getvalue()


def _json_text(record: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **record}, sort_keys=True, indent=1,
                      default=_jsonable) + "\n"


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


class _Bundle:
    """Collect outputs in memory; write them only once every computation succeeded."""

    def __init__(self, out: Path, fmt: str):
        self.out, self.fmt, self.files = out, fmt, {}

    def table(self, stem: str, header, rows):
        self.files[f"{stem}.{self.fmt}"] = _table_text(header, rows, self.fmt)

    def record(self, name: str, record: dict):
        self.files[name] = _json_text(record)

    def commit(self) -> list[str]:
        for name, text in self.files.items():
            _atomic_write(self.out / name, text)
        return sorted(self.files)


# -- commands ----------------------------------------------------------------------


def _scenario(args) -> scenarios.Scenario:
    if args.config:
        scenario = scenarios.load_config(args.config)
        if args.scenario and args.scenario != scenario.name:
            raise ConfigurationError("--scenario conflicts with the name in --config")
        return scenario
    if not args.scenario:
        raise ConfigurationError("one of --scenario or --config is required")
    return scenarios.get(args.scenario)


def _pulse_rows(pulse, n: int = 2001):
    t, om, de = pulse.samples(n)
    return ["t", "omega", "delta"], np.column_stack([t, om, de])


def _design_record(scenario, quad_tol, steps) -> dict:
    reports = scenarios.sensitivity_reports(scenario, quad_tol=quad_tol, fit=False, steps_per_unit=steps)
    record = {"scenario": scenario.to_dict(), "sensitivities": [r.to_dict() for r in reports]}
    if scenario.spec is not None:
        record["ansatz"] = scenario.spec.to_dict()
        record["alpha"] = scenario.spec.alpha if scenario.spec.m_family == "alpha" else None
        record["beta_closure"] = beta_closure_formula(scenario.spec)
    record["peak_omega"] = scenario.pulse().peak_omega()
    return record


def cmd_list(args, bundle) -> None:
    for s in scenarios.registry():
        print(f"{s.name:22s} {s.description}")


def cmd_design(args, bundle) -> None:
    scenario = _scenario(args)
    bundle.table("pulse", *_pulse_rows(scenario.pulse()))
    bundle.record("design.json", _design_record(scenario, args.quad_tol, args.steps))


def _trajectory(result):
    return result.header(), np.array(list(result.rows()), dtype=float)


def cmd_run(args, bundle) -> None:
    scenario = _scenario(args)
    out = scenarios.run(scenario, steps_per_unit=args.steps, quad_tol=args.quad_tol,
                        store_every=TRAJECTORY_STRIDE)
    bundle.table("trajectory", *_trajectory(out.result))
    bundle.record("report.json", out.record())


def cmd_sweep(args, bundle) -> None:
    scenario = _scenario(args)
    param = args.param or scenario.sweep_param
    grid = scenarios.sweep_grid(*(scenarios.parse_range(args.range) if args.range else scenario.sweep_range))
    header, rows = scenarios.sweep_table(scenario, param, grid, args.steps, args.workers)
    bundle.table(f"sweep_{param}", header, rows)


def cmd_reproduce(args, bundle) -> None:
    names = FIGURES[args.figure]
    manifest = {"figure": args.figure, "steps_per_unit": args.steps, "quad_tol": args.quad_tol,
                "scenarios": [], "files": []}
    if args.figure == "fig6":
        for name, stem in zip(names, ("heisenberg", "ising")):
            scenario = scenarios.get(name)
            header, rows = scenarios.sweep_table(scenario, "delta", None, args.steps, args.workers,
                                                 compare=("flat", "composite"))
            bundle.table(stem, header, rows)
            manifest["scenarios"].append(scenario.to_dict())
    else:
        scenario = scenarios.get(names[0])
        out = scenarios.run(scenario, steps_per_unit=args.steps, quad_tol=args.quad_tol, fit=False,
                            store_every=TRAJECTORY_STRIDE)
        bundle.table("pulse", *_pulse_rows(out.pulse))
        bundle.table("populations", *_trajectory(out.result))
        header, rows = scenarios.sweep_table(scenario, None, None, args.steps, args.workers)
        bundle.table(f"sweep_{scenario.sweep_param}", header, rows)
        manifest["scenarios"].append(scenario.to_dict())
        manifest["final_fidelity"] = out.result.final_fidelity
        manifest["sensitivities"] = [r.to_dict() for r in out.reports]
    manifest["files"] = sorted(bundle.files)
    bundle.record("manifest.json", manifest)


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    common.add_argument("--steps", type=float, default=dynamics.STEPS_PER_UNIT,
                        help="RK4 steps per unit time (default: %(default)g)")
    common.add_argument("--quad-tol", type=float, default=sensitivity.QUAD_TOL,
                        help="absolute quadrature tolerance (default: %(default)g)")
    common.add_argument("--workers", type=int, default=None, help="threads for sweeps")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--scenario", help="registry scenario name")
    source.add_argument("--config", help="INI scenario file")

    parser = _Parser(prog="spinsta", description="Shortcut pulse design for interacting spins.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list registry scenarios")
    sub.add_parser("design", parents=[common, source], help="write pulse samples and a design record")
    sub.add_parser("run", parents=[common, source], help="simulate a scenario")
    p = sub.add_parser("sweep", parents=[common, source], help="fidelity versus error strength")
    p.add_argument("--param", choices=("delta", "D"))
    p.add_argument("--range", help="lo:hi:step, inclusive; write --range=-a:b:h when lo is negative")
    p = sub.add_parser("reproduce", parents=[common], help="datasets for one figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    return parser


COMMANDS = {"list": cmd_list, "design": cmd_design, "run": cmd_run, "sweep": cmd_sweep,
            "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    bundle = _Bundle(getattr(args, "out", Path(".")), getattr(args, "format", "csv"))
    try:
        if getattr(args, "steps", 1) <= 0 or getattr(args, "quad_tol", 1) <= 0:
            raise ConfigurationError("--steps and --quad-tol must be positive")
        COMMANDS[args.command](args, bundle)
    except ConfigurationError as exc:
        print(f"spinsta: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpinstaError as exc:
        print(f"spinsta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name in bundle.commit():
        print(bundle.out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
