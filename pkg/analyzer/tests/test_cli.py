from __future__ import annotations

import json
from pathlib import Path

import pytest

from main import EXIT_ERROR, EXIT_NO_GUARANTEE, EXIT_OK, EXIT_UNSTABLE, main, resolve_config_path
from models import RunConfig
from reports import read_sweep_csv
from settings import get_settings
from sweep import run_sweep, verdict_flips

A1 = [[1.0, 1.0], [0.5, 1.0]]
A2 = [[1.0, 2.0], [0.5, 1.0]]
A3 = [[1.0, 2.0], [1.0, 1.0]]


def _write(tmp_path: Path, pattern=A1, delays=(0.2, 0.2), **extra) -> Path:
    doc = {
        "graph": {"family": "cycle", "n": 4},
        "pattern": pattern,
        "delays": {"tau1": delays[0], "tau2": delays[1]},
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(extra)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _analysis(tmp_path: Path) -> dict:
    return json.loads((tmp_path / "out" / "analysis.json").read_text(encoding="utf-8"))


def test_analyze_consensus(tmp_path, capsys):
    code = main(["analyze", "--config", str(_write(tmp_path))])
    assert code == EXIT_OK
    report = _analysis(tmp_path)
    assert report["margins"]["verdict"] == "ConsensusGuaranteed"
    assert report["margins"]["tau_max"] == pytest.approx(0.2300378, abs=5e-4)
    assert report["graph"]["laplacian_eigenvalues"] == pytest.approx([0.0, 2.0, 2.0, 4.0], abs=1e-9)
    assert report["two_layer"]["corollary_tau_max"] == pytest.approx(0.2300378, abs=1e-6)
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1 and out[0].startswith("analyze: ConsensusGuaranteed")


def test_analyze_unstable_pattern(tmp_path):
    assert main(["analyze", "--config", str(_write(tmp_path, pattern=A3, delays=(0.0, 0.0)))]) == EXIT_UNSTABLE
    assert "error" in _analysis(tmp_path)["two_layer"]


def test_analyze_unit_modulus_pattern(tmp_path):
    assert main(["analyze", "--config", str(_write(tmp_path, pattern=A2, delays=(0.0, 2.0)))]) == EXIT_NO_GUARANTEE
    assert _analysis(tmp_path)["margins"]["note"] == "marginal pattern; simulate"


def test_analyze_with_oracle_writes_scans(tmp_path):
    code = main(["analyze", "--config", str(_write(tmp_path)), "--oracle"])
    assert code == EXIT_OK
    report = _analysis(tmp_path)
    assert report["oracle"]["stable"] is True
    assert report["oracle"]["agrees_with_theory"] is True
    scans = sorted(p.name for p in (tmp_path / "out").glob("scan_*.csv"))
    assert scans == ["scan_2_1.csv", "scan_2_2.csv", "scan_3_1.csv", "scan_3_2.csv"]
    header = (tmp_path / "out" / "scan_3_2.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "omega,abs_f"


def test_analyze_is_deterministic(tmp_path):
    cfg = _write(tmp_path)
    main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "first")])
    main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "second")])
    first = (tmp_path / "first" / "analysis.json").read_bytes()
    assert first == (tmp_path / "second" / "analysis.json").read_bytes()


def test_config_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"graph": {"n": 4,}', encoding="utf-8")
    assert main(["analyze", "--config", str(bad)]) == EXIT_ERROR
    assert "line 1" in capsys.readouterr().err


def test_disconnected_graph_exits_one(tmp_path):
    path = _write(tmp_path, graph={"n": 4, "edges": [[1, 2], [3, 4]]})
    assert main(["analyze", "--config", str(path)]) == EXIT_ERROR


def test_spectrum_command(tmp_path, capsys):
    assert main(["spectrum", "--config", str(_write(tmp_path))]) == EXIT_OK
    payload = json.loads((tmp_path / "out" / "spectrum.json").read_text(encoding="utf-8"))
    assert payload["pattern"]["zeta_max"] == pytest.approx(1.7071068, abs=1e-6)
    # off-diagonal row sums 1.0 and 0.5
    assert payload["pattern"]["gershgorin_inside_unit_disk"] is False
    assert capsys.readouterr().out.startswith("spectrum:")


def test_simulate_writes_files(tmp_path):
    path = _write(tmp_path, simulation={"horizon": 2.0, "step": 0.01, "seed": 3, "record_stride": 10})
    assert main(["simulate", "--config", str(path)]) == EXIT_OK
    out = tmp_path / "out"
    rows = (out / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "t,agent,layer,value"
    assert len(rows) == 1 + 21 * 8
    assert (out / "disagreement.csv").read_text(encoding="utf-8").startswith("t,disagreement\n")
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["classification"] == "Bounded"
    assert summary["conservation_drift"] < 1e-9


def test_simulate_seed_flag_overrides_document(tmp_path):
    path = _write(tmp_path, simulation={"horizon": 1.0, "step": 0.01, "seed": 3})
    main(["simulate", "--config", str(path), "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(path), "--out", str(tmp_path / "b"), "--seed", "4"])
    main(["simulate", "--config", str(path), "--out", str(tmp_path / "c"), "--seed", "3"])
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a != (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "c" / "trajectory.csv").read_bytes()


def test_resolve_named_scenario():
    assert resolve_config_path("fig7a").name == "fig7a.json"


def test_sweep_theory_flips_at_margin(tmp_path):
    grid = {"tau1_min": 0.1, "tau1_max": 0.3, "tau1_steps": 11, "diagonal": True}
    path = _write(tmp_path, grid=grid)
    assert main(["sweep", "--config", str(path)]) == EXIT_OK
    rows = read_sweep_csv(tmp_path / "out" / "sweep.csv")
    assert len(rows) == 11
    assert [r["theory"] for r in rows[:7]] == ["ConsensusGuaranteed"] * 7
    assert [r["theory"] for r in rows[7:]] == ["UnstableGuaranteed"] * 4
    typed = [{**r, "tau1": float(r["tau1"]), "tau2": float(r["tau2"])} for r in rows]
    assert verdict_flips(typed) == [(pytest.approx(0.24), pytest.approx(0.24))]


def test_sweep_single_point_all_columns(tmp_path):
    path = _write(tmp_path, delays=(0.0, 0.0), simulation={"horizon": 40.0, "step": 0.01, "seed": 1})
    assert main(["sweep", "--config", str(path), "--oracle", "--sim"]) == EXIT_OK
    rows = read_sweep_csv(tmp_path / "out" / "sweep.csv")
    assert rows == [{"tau1": "0", "tau2": "0", "theory": "ConsensusGuaranteed", "oracle": "stable", "sim": "Converged"}]


def test_sweep_threaded_matches_serial(tmp_path):
    grid = {"tau1_min": 0.0, "tau1_max": 0.3, "tau1_steps": 4, "tau2_min": 0.0, "tau2_max": 2.0, "tau2_steps": 3}
    cfg = RunConfig.model_validate(json.loads(_write(tmp_path, grid=grid).read_text(encoding="utf-8")))
    serial = run_sweep(cfg, get_settings(), tmp_path / "serial.csv")
    threaded = run_sweep(cfg, get_settings().with_overrides(workers=3), tmp_path / "threaded.csv", executor="thread")
    assert serial == threaded
    assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "threaded.csv").read_bytes()


def test_sweep_flushes_partial_results_on_interrupt(tmp_path, monkeypatch):
    import sweep

    calls = {"n": 0}
    real = sweep.evaluate_point

    def _interrupting(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 3:
            raise KeyboardInterrupt
        return real(*args, **kwargs)

    monkeypatch.setattr(sweep, "evaluate_point", _interrupting)
    grid = {"tau1_min": 0.1, "tau1_max": 0.3, "tau1_steps": 5, "diagonal": True}
    cfg = RunConfig.model_validate(json.loads(_write(tmp_path, grid=grid).read_text(encoding="utf-8")))
    with pytest.raises(KeyboardInterrupt):
        run_sweep(cfg, get_settings(), tmp_path / "partial.csv")
    assert len(read_sweep_csv(tmp_path / "partial.csv")) == 2


@pytest.mark.parametrize("alias,name", [("equal_near_margin", "fig7a"), ("cross_outside_t2", "fig6a"), ("long_intra", "fig7f")])
def test_resolve_scenario_alias(alias, name):
    assert resolve_config_path(alias).name == f"{name}.json"


def test_simulate_runs_on_disconnected_graph(tmp_path):
    path = _write(
        tmp_path,
        graph={"n": 4, "edges": [[1, 2], [3, 4]]},
        simulation={"horizon": 2.0, "step": 0.01, "seed": 5},
    )
    assert main(["simulate", "--config", str(path)]) == EXIT_OK
    summary = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert summary["theory"] is None
    assert summary["classification"] in ("Converged", "Bounded")


def test_spectrum_skips_classification(tmp_path):
    path = _write(tmp_path, graph={"n": 4, "edges": [[1, 2], [3, 4]]})
    assert main(["spectrum", "--config", str(path)]) == EXIT_OK
    payload = json.loads((tmp_path / "out" / "spectrum.json").read_text(encoding="utf-8"))
    assert payload["graph"]["lambda2"] == pytest.approx(0.0, abs=1e-9)
    assert "margins" not in payload


@pytest.mark.slow
def test_sweep_long_cross_delay_diverges(tmp_path):
    grid = {"tau1_min": 0.23, "tau1_max": 0.23, "tau2_min": 2.0, "tau2_max": 10.0, "tau2_steps": 2}
    path = _write(tmp_path, grid=grid, simulation={"horizon": 400.0, "step": 0.02, "seed": 7, "record_stride": 10})
    assert main(["sweep", "--config", str(path), "--sim"]) == EXIT_OK
    rows = read_sweep_csv(tmp_path / "out" / "sweep.csv")
    assert [(r["tau1"], r["tau2"]) for r in rows] == [("0.23", "2"), ("0.23", "10")]
    assert [r["sim"] for r in rows] == ["Diverged", "Diverged"]
    assert [r["theory"] for r in rows] == ["OutsideTheory", "OutsideTheory"]
