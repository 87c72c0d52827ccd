import json
import os
from pathlib import Path

import numpy as np
import pytest

from subchain import scenario
from subchain.io import atomic_path, csv_text, fmt, max_workers, read_csv_columns, write_text

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def write_json(path, data):
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


def small_dynamics(**over):
    data = {"version": 1, "kind": "dynamics", "chain": {"n_atoms": 6, "a": 1.2, "model": "scalar"},
            "initial_state": {"type": "single_excited", "j0": 3},
            "integration": {"t_end": 0.2, "dt": 0.001, "snapshot_times": [0, 0.2]},
            "outputs": ["density", "mean_excitation", "beta"], "grid": {"points": 32}}
    data.update(over)
    return data


def test_fmt_and_csv_text():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(float("nan")) == "nan"
    text = csv_text({"a": [1, 2], "b": [0.5, np.inf]}, {"k": 1})
    assert text == '# config: {"k":1}\na,b\n1,0.5\n2,inf\n'
    with pytest.raises(ValueError):
        csv_text({"a": [1], "b": [1, 2]})


def test_write_and_read_roundtrip(tmp_path):
    path = tmp_path / "sub" / "x.csv"
    write_text(path, csv_text({"re": [1.5, -2.0], "im": [0.0, 1.0]}, {"a": 1}))
    cols = read_csv_columns(path)
    assert np.allclose(cols["re"], [1.5, -2.0])
    assert oct(path.stat().st_mode & 0o777) == "0o644"


def test_atomic_path_cleans_up_on_error(tmp_path):
    target = tmp_path / "out.txt"
    with pytest.raises(RuntimeError):
        with atomic_path(target) as tmp:
            tmp.write_text("partial")
            raise RuntimeError("boom")
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_max_workers(monkeypatch):
    monkeypatch.setenv("SUBCHAIN_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("SUBCHAIN_THREADS", "0")
    assert max_workers() == 1


def test_every_figure_has_one_scenario():
    files = sorted(SCENARIOS.glob("*.json"))
    figures = [json.loads(f.read_text())["figure"] for f in files]
    assert sorted(figures, key=int) == ["1", "2", "3", "4", "5", "7", "8", "9", "10", "11", "12", "13"]
    assert len(set(figures)) == len(figures)
    for f in files:
        sc = scenario.load_scenario(f)
        assert sc.name == f.stem
        assert sc.description


def test_parse_error_reports_line(tmp_path):
    data = small_dynamics()
    data["chain"]["n_atoms"] = -2
    path = write_json(tmp_path / "bad.json", data)
    with pytest.raises(scenario.ScenarioError) as info:
        scenario.load_scenario(path)
    line = next(i for i, ln in enumerate(path.read_text().splitlines(), 1) if '"n_atoms"' in ln)
    assert f"bad.json:{line}:" in str(info.value)


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "version": 1,\n  "kind": "dynamics",,\n}\n')
    with pytest.raises(scenario.ScenarioError, match=r"broken.json:3:"):
        scenario.load_scenario(path)


@pytest.mark.parametrize("patch,needle", [
    ({"version": 2}, "version"),
    ({"kind": "movie"}, "kind"),
    ({"outputs": ["video"]}, "unknown output"),
    ({"initial_state": {"type": "single_excited"}}, "j0"),
    ({"integration": {"t_end": 1, "dt": 0.5}}, "dt"),
    ({"integration": {"t_end": "long"}}, "number"),
])
def test_validation_messages(tmp_path, patch, needle):
    path = write_json(tmp_path / "s.json", small_dynamics(**patch))
    with pytest.raises(scenario.ScenarioError, match=needle):
        scenario.load_scenario(path)


def test_run_dynamics_outputs(tmp_path):
    sc = scenario.load_scenario(write_json(tmp_path / "s.json", small_dynamics()))
    res = scenario.run_dynamics(sc, tmp_path / "out")
    names = sorted(p.name for p in res.files)
    assert names == ["s_beta.csv", "s_density.csv", "s_mean_excitation.csv"]
    dens = read_csv_columns(tmp_path / "out" / "s_density.csv")
    assert list(dens) == ["x", "t=0", "t=0.2"]
    assert np.allclose(dens["t=0"], 1 / (2 * np.pi))
    me = read_csv_columns(tmp_path / "out" / "s_mean_excitation.csv")
    assert me["t"][0] == 0 and me["t"][-1] == pytest.approx(0.2)
    assert me["t"].size == 21
    header = (tmp_path / "out" / "s_beta.csv").read_text().splitlines()[0]
    cfg = json.loads(header.removeprefix("# config: "))
    assert cfg["integration"]["dt"] == 0.001 and cfg["chain"]["n_atoms"] == 6


def test_explicit_state_file(tmp_path):
    write_text(tmp_path / "beta.csv", csv_text({"re": [0, 1, 0, 0, 0, 0], "im": [0] * 6}))
    data = small_dynamics(initial_state={"type": "explicit", "file": "beta.csv"})
    sc = scenario.load_scenario(write_json(tmp_path / "s.json", data))
    st = scenario.build_state(sc.initial_state, sc.chain, sc.base_dir)
    assert st.beta[1] == 1
    data = small_dynamics(initial_state={"type": "explicit", "file": "missing.csv"})
    sc = scenario.load_scenario(write_json(tmp_path / "s.json", data))
    with pytest.raises(scenario.ScenarioError):
        scenario.build_state(sc.initial_state, sc.chain, sc.base_dir)


def test_spectrum_columns_naming():
    from subchain.spectrum import SpectralGrid
    grid = SpectralGrid.uniform(16)
    one = scenario.spectrum_columns(1, 1.0, [None], grid)
    assert list(one) == ["x", "gamma_exact", "gamma_sinc", "gamma_infinite", "omega_finite", "omega_infinite"]
    assert np.all(one["gamma_exact"] == 1.0)
    two = scenario.spectrum_columns(10, 1.0, [None, 0.0], grid)
    assert "gamma_exact[scalar]" in two and "gamma_exact[vector:0]" in two
