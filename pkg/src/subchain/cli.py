"""Command-line entry point: ``subchain {spectrum,dynamics,intensity,validate}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import radiation, scenario, spectrum, validation
from .dynamics import IntegrationError
from .greenkernel import ChainConfig, parse_model
from .io import csv_text, max_workers, write_text

log = logging.getLogger("subchain")

EXIT_USAGE = 2
EXIT_DIVERGED = 3

STATE_CHOICES = {
    "uniform": "uniform",
    "most-subradiant": "most_subradiant",
    "single": "single_excited",
    "timed-dicke": "timed_dicke",
    "zero": "zero",
}


def _pair(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return lo, hi


def _plane_arg(text: str):
    axis, _, off = text.partition("=")
    if axis not in ("x", "y", "z") or not off:
        raise argparse.ArgumentTypeError(f"plane must look like x=5, got {text!r}")
    return axis, float(off)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subchain", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="decay-rate and shift curves as CSV")
    s.add_argument("--scenario", type=Path)
    s.add_argument("--n", type=int)
    s.add_argument("--a", type=float)
    s.add_argument("--model", default="scalar",
                   help="comma list of scalar | vector:<delta> | vector:magic")
    s.add_argument("--grid", type=int, default=1024, help="number of x points")
    s.add_argument("--degrees", action="store_true", help="read a and delta in degrees")
    s.add_argument("--validate", action="store_true",
                   help="report max |gamma_exact - gamma_sinc|")
    s.add_argument("--out", default="-", help="CSV path, or - for stdout")
    s.add_argument("--out-dir", type=Path, default=Path("."),
                   help="output directory when --scenario is used")

    d = sub.add_parser("dynamics", help="integrate scenario files")
    d.add_argument("scenarios", nargs="+", type=Path)
    d.add_argument("--out-dir", type=Path, default=Path("."))
    d.add_argument("--dt", type=float, help="override the scenario time step")

    i = sub.add_parser("intensity", help="radiated-intensity raster (CSV + PGM)")
    i.add_argument("--scenario", type=Path)
    i.add_argument("--n", type=int)
    i.add_argument("--a", type=float)
    i.add_argument("--degrees", action="store_true")
    i.add_argument("--state", choices=sorted(STATE_CHOICES), default="uniform")
    i.add_argument("--j0", type=int, help="excited site for --state single")
    i.add_argument("--plane", type=_plane_arg, default=("x", 5.0), help="e.g. x=5")
    i.add_argument("--u-range", type=_pair, default=(-50.0, 50.0))
    i.add_argument("--v-range", type=_pair, default=(-50.0, 50.0))
    i.add_argument("--resolution", type=int, default=200)
    i.add_argument("--dipole-axis", choices=("x", "y", "z"), default="x")
    i.add_argument("--out", default="intensity", help="output path prefix")
    i.add_argument("--out-dir", type=Path, default=Path("."))

    v = sub.add_parser("validate", help="run the oracle and identity suites")
    v.add_argument("--quick", action="store_true", help="fast subset")
    v.add_argument("--json", type=Path, help="write the report as JSON")
    return p


# ---------------------------------------------------------------------------

def cmd_spectrum(args, parser) -> int:
    if args.scenario:
        if args.n is not None or args.a is not None:
            parser.error("--scenario cannot be combined with --n/--a")
        sc = _load(args.scenario)
        if sc is None:
            return EXIT_USAGE
        if sc.kind != "spectrum":
            parser.error(f"{args.scenario} is a {sc.kind} scenario")
        files = scenario.run_spectrum(sc, args.out_dir)
        for f in files:
            print(f)
        return 0

    if args.n is None or args.a is None:
        parser.error("spectrum needs --n and --a (or --scenario)")
    if args.n < 1 or args.grid < 2:
        parser.error("--n must be >= 1 and --grid >= 2")
    a = math.radians(args.a) if args.degrees else args.a
    try:
        models = [parse_model(m, args.degrees) for m in args.model.split(",")]
        for delta in models:
            ChainConfig(args.n, a, delta)
    except ValueError as exc:
        parser.error(str(exc))

    grid = spectrum.SpectralGrid.uniform(args.grid)
    workers = min(max_workers(), len(models))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda m: scenario.spectrum_columns(args.n, a, [m], grid), models))
        cols = {"x": grid.points}
        for delta, part in zip(models, parts):
            tag = "scalar" if delta is None else f"vector:{delta:.6g}"
            for k, val in part.items():
                if k != "x":
                    cols[k if len(models) == 1 else f"{k}[{tag}]"] = val
    else:
        cols = scenario.spectrum_columns(args.n, a, models, grid)

    config = {"kind": "spectrum", "n_atoms": args.n, "a": a, "grid": args.grid,
              "models": ["scalar" if d is None else f"vector:{d!r}" for d in models]}
    text = csv_text(cols, config)
    report = sys.stderr if args.out == "-" else sys.stdout
    if args.out == "-":
        sys.stdout.write(text)
    else:
        write_text(args.out, text)
    if args.validate:
        for tag, (dev, rel) in scenario.sinc_deviation(cols).items():
            print(f"max |gamma_exact - gamma_sinc| [{tag}] = {dev:.6e} ({rel:.3%} of peak)", file=report)
    return 0


def _load(path):
    try:
        return scenario.load_scenario(path)
    except scenario.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _run_one(sc, out_dir):
    res = scenario.run_dynamics(sc, out_dir)
    return res.files


def cmd_dynamics(args, parser) -> int:
    loaded = []
    for path in args.scenarios:
        sc = _load(path)
        if sc is None:
            return EXIT_USAGE
        if sc.kind != "dynamics":
            print(f"error: {path}: expected a dynamics scenario, got {sc.kind!r}", file=sys.stderr)
            return EXIT_USAGE
        if args.dt is not None:
            from .dynamics import IntegrationConfig
            ic = sc.integration
            try:
                sc.integration = IntegrationConfig(ic.t_end, args.dt, ic.snapshot_times)
            except ValueError as exc:
                parser.error(str(exc))
        loaded.append(sc)

    status = 0
    workers = min(max_workers(), len(loaded))
    # trajectories are GIL-bound, so batches go to worker processes
    pool_cls = ProcessPoolExecutor if workers > 1 else ThreadPoolExecutor
    with pool_cls(workers) as pool:
        futures = [(sc, pool.submit(_run_one, sc, args.out_dir)) for sc in loaded]
        for sc, fut in futures:
            try:
                for f in fut.result():
                    print(f)
            except IntegrationError as exc:
                print(f"error: {sc.name}: integration diverged: {exc}", file=sys.stderr)
                status = EXIT_DIVERGED
            except scenario.ScenarioError as exc:
                print(f"error: {exc}", file=sys.stderr)
                status = status or EXIT_USAGE
    return status


def cmd_intensity(args, parser) -> int:
    if args.scenario:
        sc = _load(args.scenario)
        if sc is None:
            return EXIT_USAGE
        if sc.kind != "intensity":
            parser.error(f"{args.scenario} is a {sc.kind} scenario")
    else:
        if args.n is None or args.a is None:
            parser.error("intensity needs --n and --a (or --scenario)")
        state = {"type": STATE_CHOICES[args.state]}
        if args.state == "single":
            if args.j0 is None:
                parser.error("--state single needs --j0")
            state["j0"] = args.j0
        axis, offset = args.plane
        data = {
            "version": scenario.SCENARIO_VERSION, "kind": "intensity",
            "chain": {"n_atoms": args.n, "a": args.a},
            "initial_state": state,
            "plane": {"normal_axis": axis, "offset": offset, "u_range": list(args.u_range),
                      "v_range": list(args.v_range), "resolution": args.resolution},
            "dipole_axis": args.dipole_axis,
        }
        try:
            sc = scenario.scenario_from_dict(data, name=Path(args.out).name, degrees=args.degrees)
            scenario.build_state(sc.initial_state, sc.chain)
        except (ValueError, IndexError) as exc:
            parser.error(str(exc))
        args.out_dir = args.out_dir / Path(args.out).parent
    try:
        files, fmap = scenario.run_intensity(sc, args.out_dir)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for f in files:
        print(f)
    p = sc.plane
    if p.normal_axis != "z" and np.abs(p.v).max() > sc.chain.n_atoms / 2 >= np.abs(p.v).min():
        ratio = radiation.evanescence_ratio(None, sc.chain, field_map=fmap)
        print(f"evanescence ratio (side/end) = {ratio:.6g}", file=sys.stderr)
    return 0


def cmd_validate(args, parser) -> int:
    results = validation.run_all(quick=args.quick)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    if args.json:
        report = {"passed": ok, "quick": args.quick, "checks": [r.as_dict() for r in results]}
        write_text(args.json, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if ok else 1


COMMANDS = {"spectrum": cmd_spectrum, "dynamics": cmd_dynamics,
            "intensity": cmd_intensity, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return COMMANDS[args.command](args, sub)
    except BrokenPipeError:
        # downstream reader (e.g. head) closed early
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
