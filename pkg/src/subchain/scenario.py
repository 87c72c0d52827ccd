"""
Scenario files and the runners that turn them into output files.

A scenario is a JSON document with a ``version`` field and a ``kind`` of
``spectrum``, ``dynamics`` or ``intensity``. Every output CSV starts with a
comment line holding the fully resolved configuration.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import dickespace, dynamics, radiation, spectrum, states
from .greenkernel import ChainConfig, parse_model
from .io import atomic_path, csv_text, read_csv_columns, write_text

SCENARIO_VERSION = 1
KINDS = ("spectrum", "dynamics", "intensity")
STATE_TYPES = ("single_excited", "most_subradiant", "timed_dicke", "uniform", "zero", "explicit")
DYNAMICS_OUTPUTS = ("density", "mean_excitation", "beta")


class ScenarioError(ValueError):
    """Malformed scenario; ``str()`` carries ``file:line:`` when known."""


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


@dataclass
class Scenario:
    kind: str
    chain: ChainConfig
    name: str = "scenario"
    figure: str = ""
    description: str = ""
    models: list = field(default_factory=list)
    initial_state: dict = field(default_factory=lambda: {"type": "zero"})
    drive: dynamics.DriveConfig = field(default_factory=dynamics.DriveConfig)
    integration: Optional[dynamics.IntegrationConfig] = None
    outputs: list = field(default_factory=list)
    grid_points: int = 1024
    series_interval: float = 0.01
    plane: Optional[radiation.PlaneSpec] = None
    dipole_axis: str = "x"
    base_dir: Path = Path(".")
    raw: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Plain-data view of every setting, for output headers."""
        out = {"version": SCENARIO_VERSION, "kind": self.kind, "name": self.name,
               "chain": {"n_atoms": self.chain.n_atoms, "a": self.chain.a,
                         "model": self.chain.model_tag},
               "grid": {"points": self.grid_points}}
        if self.figure:
            out["figure"] = self.figure
        if self.kind == "spectrum":
            out["models"] = ["scalar" if d is None else f"vector:{d!r}" for d in self.models]
        if self.kind in ("dynamics", "intensity"):
            out["initial_state"] = self.initial_state
        if self.kind == "dynamics":
            out["drive"] = {"rabi": self.drive.rabi, "detuning": self.drive.detuning,
                            "t_off": None if math.isinf(self.drive.t_off) else self.drive.t_off}
            ic = self.integration
            out["integration"] = {"dt": ic.dt, "t_end": ic.t_end,
                                  "snapshot_times": list(ic.snapshot_times)}
            out["outputs"] = list(self.outputs)
            out["series_interval"] = self.series_interval
        if self.kind == "intensity":
            p = self.plane
            out["plane"] = {"normal_axis": p.normal_axis, "offset": p.offset,
                            "u_range": list(p.u_range), "v_range": list(p.v_range),
                            "resolution": p.resolution}
            out["dipole_axis"] = self.dipole_axis
        return out


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    try:
        sc = scenario_from_dict(data, base_dir=path.parent, name=path.stem)
    except (KeyError, TypeError, ValueError) as exc:
        key = getattr(exc, "key", None)
        line = _line_of(text, key) if key else None
        where = f"{path}:{line}" if line else str(path)
        msg = exc.args[0] if exc.args else str(exc)
        raise ScenarioError(f"{where}: {msg}") from exc
    return sc


class _FieldError(ValueError):
    def __init__(self, key, msg):
        super().__init__(msg)
        self.key = key


def _req(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise _FieldError(where or key, f"missing required field {key!r}" + (f" in {where!r}" if where else ""))
    return d[key]


def _num(d: dict, key: str, default=None, where: str = ""):
    if key not in d:
        if default is None:
            raise _FieldError(where or key, f"missing required field {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _FieldError(key, f"field {key!r} must be a number, got {v!r}")
    return float(v)


def scenario_from_dict(data: dict, base_dir=Path("."), name: str = "scenario",
                       degrees: bool = False) -> Scenario:
    if not isinstance(data, dict):
        raise _FieldError(None, "scenario must be a JSON object")
    version = _req(data, "version", "")
    if version != SCENARIO_VERSION:
        raise _FieldError("version", f"unsupported scenario version {version!r}")
    kind = _req(data, "kind", "")
    if kind not in KINDS:
        raise _FieldError("kind", f"kind must be one of {KINDS}, got {kind!r}")

    chain_d = _req(data, "chain", "")
    n = _req(chain_d, "n_atoms", "chain")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise _FieldError("n_atoms", f"n_atoms must be a positive integer, got {n!r}")
    a = _num(chain_d, "a", where="chain")
    if degrees:
        a = math.radians(a)
    try:
        delta = parse_model(str(chain_d.get("model", "scalar")), degrees)
        chain = ChainConfig(n, a, delta)
    except ValueError as exc:
        raise _FieldError("chain", str(exc)) from exc

    sc = Scenario(kind=kind, chain=chain, name=str(data.get("name", name)),
                  figure=str(data.get("figure", "")),
                  description=str(data.get("description", "")),
                  base_dir=Path(base_dir), raw=data)
    grid = data.get("grid", {})
    sc.grid_points = int(_num(grid, "points", 1024))

    if kind == "spectrum":
        models = data.get("models", [chain_d.get("model", "scalar")])
        if not isinstance(models, list) or not models:
            raise _FieldError("models", "models must be a non-empty list")
        try:
            sc.models = [parse_model(str(m), degrees) for m in models]
        except ValueError as exc:
            raise _FieldError("models", str(exc)) from exc
        return sc

    sc.initial_state = _parse_state_spec(data.get("initial_state", {"type": "zero"}))

    if kind == "dynamics":
        drive_d = data.get("drive", {})
        t_off = drive_d.get("t_off", None)
        try:
            sc.drive = dynamics.DriveConfig(
                _num(drive_d, "rabi", 0.0), _num(drive_d, "detuning", 0.0),
                math.inf if t_off is None else float(t_off))
        except ValueError as exc:
            raise _FieldError("drive", str(exc)) from exc
        integ = _req(data, "integration", "")
        snaps = integ.get("snapshot_times", [])
        if not isinstance(snaps, list):
            raise _FieldError("snapshot_times", "snapshot_times must be a list")
        try:
            sc.integration = dynamics.IntegrationConfig(
                _num(integ, "t_end", where="integration"), _num(integ, "dt", 1e-3),
                tuple(float(s) for s in snaps))
        except ValueError as exc:
            raise _FieldError("integration", str(exc)) from exc
        outputs = data.get("outputs", ["density", "mean_excitation"])
        if not isinstance(outputs, list) or not outputs:
            raise _FieldError("outputs", "outputs must be a non-empty list")
        for o in outputs:
            if o not in DYNAMICS_OUTPUTS:
                raise _FieldError("outputs", f"unknown output {o!r}; choose from {DYNAMICS_OUTPUTS}")
        if ("density" in outputs or "beta" in outputs) and not snaps:
            raise _FieldError("snapshot_times", "density/beta outputs need snapshot_times")
        sc.outputs = outputs
        sc.series_interval = _num(data, "series_interval", 0.01)
        return sc

    plane_d = data.get("plane", {})
    try:
        sc.plane = radiation.PlaneSpec(
            str(plane_d.get("normal_axis", "x")), _num(plane_d, "offset", 5.0),
            tuple(plane_d.get("u_range", (-50.0, 50.0))),
            tuple(plane_d.get("v_range", (-50.0, 50.0))),
            int(_num(plane_d, "resolution", 200)))
    except ValueError as exc:
        raise _FieldError("plane", str(exc)) from exc
    sc.dipole_axis = str(data.get("dipole_axis", "x"))
    if sc.dipole_axis not in ("x", "y", "z"):
        raise _FieldError("dipole_axis", "dipole_axis must be x, y or z")
    sc.outputs = ["intensity"]
    return sc


def _parse_state_spec(spec) -> dict:
    if isinstance(spec, str):
        spec = {"type": spec}
    if not isinstance(spec, dict) or spec.get("type") not in STATE_TYPES:
        raise _FieldError("initial_state", f"initial_state type must be one of {STATE_TYPES}")
    if spec["type"] == "single_excited" and not isinstance(spec.get("j0"), int):
        raise _FieldError("initial_state", "single_excited needs an integer j0")
    if spec["type"] == "explicit" and not isinstance(spec.get("file"), str):
        raise _FieldError("initial_state", "explicit state needs a file")
    return dict(spec)


def build_state(spec: dict, cfg: ChainConfig, base_dir=Path(".")) -> dickespace.DipoleState:
    kind = spec["type"]
    if kind == "single_excited":
        return states.single_excited(cfg, spec["j0"])
    if kind == "most_subradiant":
        return states.most_subradiant(cfg)
    if kind == "timed_dicke":
        return states.timed_dicke(cfg)
    if kind == "uniform":
        return states.uniform(cfg)
    if kind == "zero":
        return states.zero(cfg)
    path = Path(base_dir) / spec["file"]
    if not path.exists():
        raise ScenarioError(f"explicit state file {path} does not exist")
    cols = read_csv_columns(path)
    if "re" not in cols:
        raise ScenarioError(f"{path}: expected columns re[,im]")
    beta = cols["re"] + 1j * cols.get("im", 0.0)
    state = dickespace.DipoleState(beta)
    state.check_chain(cfg)
    return state


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _model_suffix(delta) -> str:
    return "scalar" if delta is None else f"vector:{delta:.6g}"


def spectrum_columns(n_atoms: int, a: float, models, grid: spectrum.SpectralGrid) -> dict:
    """Every spectrum curve for each model, keyed as CSV columns."""
    cols = {"x": grid.points}
    single = len(models) == 1
    for delta in models:
        cfg = ChainConfig(n_atoms, a, delta)
        sfx = "" if single else f"[{_model_suffix(delta)}]"
        inf = spectrum.evaluate_spectrum(cfg, grid, "infinite")
        cols["gamma_exact" + sfx] = spectrum.gamma_exact(cfg, grid.points)
        cols["gamma_sinc" + sfx] = spectrum.gamma_sinc_approx(cfg, grid.points)
        cols["gamma_infinite" + sfx] = inf.gamma
        cols["omega_finite" + sfx] = spectrum.omega_finite(cfg, grid.points)
        cols["omega_infinite" + sfx] = inf.omega
    return cols


def sinc_deviation(cols: dict) -> dict:
    """Max |gamma_exact - gamma_sinc| per model, absolute and relative to peak."""
    out = {}
    for key in cols:
        if key.startswith("gamma_exact"):
            tag = key[len("gamma_exact"):] or "model"
            ex, sa = cols[key], cols["gamma_sinc" + key[len("gamma_exact"):]]
            dev = float(np.max(np.abs(ex - sa)))
            out[tag.strip("[]")] = (dev, dev / float(np.max(ex)))
    return out


def run_spectrum(sc: Scenario, out_dir: Path) -> list:
    grid = spectrum.SpectralGrid.uniform(sc.grid_points)
    cols = spectrum_columns(sc.chain.n_atoms, sc.chain.a, sc.models, grid)
    path = Path(out_dir) / f"{sc.name}_spectrum.csv"
    write_text(path, csv_text(cols, sc.resolved()))
    return [path]


@dataclass
class DynamicsResult:
    files: list
    trajectory: dynamics.Trajectory


def run_dynamics(sc: Scenario, out_dir: Path) -> DynamicsResult:
    cfg = sc.chain
    init = build_state(sc.initial_state, cfg, sc.base_dir)
    traj = dynamics.integrate(init, cfg, sc.drive, sc.integration)
    header = sc.resolved()
    out_dir = Path(out_dir)
    files = []
    if "density" in sc.outputs:
        grid = spectrum.SpectralGrid.uniform(sc.grid_points)
        cols = {"x": grid.points}
        for snap in traj.snapshots:
            if snap.norm2 == 0:
                cols[f"t={snap.time:.6g}"] = np.zeros(len(grid))
            else:
                cols[f"t={snap.time:.6g}"] = dickespace.density(snap, grid).p
        files.append(out_dir / f"{sc.name}_density.csv")
        write_text(files[-1], csv_text(cols, header))
    if "mean_excitation" in sc.outputs:
        stride = max(1, int(round(sc.series_interval / sc.integration.dt)))
        idx = np.arange(0, traj.times.size, stride)
        if idx[-1] != traj.times.size - 1:
            idx = np.append(idx, traj.times.size - 1)
        cols = {"t": traj.times[idx], "mean_excitation": traj.mean_excitation[idx]}
        files.append(out_dir / f"{sc.name}_mean_excitation.csv")
        write_text(files[-1], csv_text(cols, header))
    if "beta" in sc.outputs:
        cols = {"j": np.arange(1, cfg.n_atoms + 1)}
        for snap in traj.snapshots:
            tag = f"t={snap.time:.6g}"
            cols[f"re[{tag}]"] = snap.beta.real
            cols[f"im[{tag}]"] = snap.beta.imag
            cols[f"abs[{tag}]"] = np.abs(snap.beta)
        files.append(out_dir / f"{sc.name}_beta.csv")
        write_text(files[-1], csv_text(cols, header))
    return DynamicsResult(files, traj)


def run_intensity(sc: Scenario, out_dir: Path):
    cfg = sc.chain
    state = build_state(sc.initial_state, cfg, sc.base_dir)
    fmap = radiation.intensity_map(sc.plane, state, cfg, sc.dipole_axis)
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{sc.name}_intensity.csv"
    pgm_path = out_dir / f"{sc.name}_intensity.pgm"
    write_text(csv_path, intensity_csv(fmap, sc.resolved()))
    with atomic_path(pgm_path) as tmp:
        radiation.write_pgm(tmp, fmap.intensity)
    return [csv_path, pgm_path], fmap


def intensity_csv(fmap: radiation.FieldMap, config: dict) -> str:
    """Raster as a matrix: first column v, remaining columns one per u value."""
    cols = {"v": fmap.plane.v}
    for i, u in enumerate(fmap.plane.u):
        cols[f"{u:.17g}"] = fmap.intensity[:, i]
    return csv_text(cols, config)
