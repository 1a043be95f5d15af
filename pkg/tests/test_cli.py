import csv
import io
import json

import pytest

from intdist.cli import main, render_csv, run_sweep, validate_config

FAST_OPT = {"seed": 7, "restarts": 4, "max_iter": 2000}


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_bound_subcommand(capsys):
    code, out, _ = _run(capsys, ["bound"])
    assert code == 0
    assert out.strip() == "0.171572875254"


def test_version_subcommand(capsys):
    code, out, _ = _run(capsys, ["version"])
    assert code == 0
    from intdist import __version__
    assert out.strip() == __version__


def test_sweep_csv_schema(capsys):
    code, out, _ = _run(capsys, ["sweep", "--v-min", "0", "--v-max", "1", "--v-steps", "2",
                                 "--restarts", "4", "--seed", "7"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    echoed = json.loads(lines[0][len("# config: "):])
    assert echoed["coupling_grid"]["steps"] == 2
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert len(rows) == 2
    assert set(rows[0]) == {"model", "params", "quantity", "v", "beta", "temperature",
                            "d_f", "epsilons", "converged"}
    assert float(rows[0]["d_f"]) <= 1e-8  # free point
    assert rows[0]["converged"] == "true"
    assert len(rows[0]["epsilons"].split(";")) == 2
    # params field carries commas and quotes, so it exercises RFC-4180 quoting
    assert json.loads(rows[0]["params"]) == {"t": 1.0, "delta1": 1.0, "delta2": -1.0}


def test_sweep_is_byte_identical_across_runs(tmp_path):
    cfg = {"coupling_grid": {"min": 0.0, "max": 2.0, "steps": 3},
           "optimizer": FAST_OPT}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    first = out.read_bytes()
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_sweep_threaded_output_matches_serial(tmp_path, monkeypatch):
    cfg = {"coupling_grid": {"min": 0.0, "max": 2.0, "steps": 4}, "optimizer": FAST_OPT}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "sweep.csv"
    monkeypatch.setenv("INTDIST_THREADS", "1")
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    serial = out.read_bytes()
    monkeypatch.setenv("INTDIST_THREADS", "3")
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert out.read_bytes() == serial


def test_sweep_jsonl_format(capsys):
    code, out, _ = _run(capsys, ["sweep", "--v-min", "0", "--v-max", "1", "--v-steps", "2",
                                 "--restarts", "4", "--format", "jsonl"])
    assert code == 0
    lines = out.strip().splitlines()
    assert "config" in json.loads(lines[0])
    row = json.loads(lines[1])
    assert {"model", "quantity", "v", "beta", "d_f", "epsilons", "converged",
            "wall_time_s"} <= set(row)


def test_sweep_temperature_grid_ordering(capsys):
    code, out, _ = _run(capsys, ["sweep", "--v-min", "0", "--v-max", "1", "--v-steps", "2",
                                 "--t-min", "0.5", "--t-max", "2.0", "--t-steps", "2",
                                 "--restarts", "4"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    grid = [(float(r["v"]), float(r["temperature"])) for r in rows]
    assert grid == [(0.0, 0.5), (0.0, 2.0), (1.0, 0.5), (1.0, 2.0)]
    for r in rows:
        assert float(r["beta"]) == pytest.approx(1.0 / float(r["temperature"]))


def test_entanglement_sweep(capsys):
    code, out, _ = _run(capsys, ["sweep", "--quantity", "entanglement",
                                 "--v-min", "0", "--v-max", "0", "--v-steps", "1",
                                 "--restarts", "4"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert float(rows[0]["d_f"]) <= 1e-8


def test_chain_sweep_free_column(capsys):
    code, out, _ = _run(capsys, ["sweep", "--model", "chain", "--n-sites", "3",
                                 "--v-min", "0", "--v-max", "0", "--v-steps", "1",
                                 "--restarts", "4"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert all(float(r["d_f"]) <= 1e-6 for r in rows)


def test_compare_dimer_thermal(capsys):
    code, out, _ = _run(capsys, ["compare", "--v-min", "0", "--v-max", "0.25",
                                 "--v-steps", "2", "--restarts", "6"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert set(rows[0]) >= {"exact", "perturbative", "abs_diff"}
    assert float(rows[0]["exact"]) <= 1e-10
    assert float(rows[0]["perturbative"]) <= 1e-10
    assert float(rows[1]["abs_diff"]) <= 0.005


def test_compare_dimer_entanglement(capsys):
    code, out, _ = _run(capsys, ["compare", "--quantity", "entanglement",
                                 "--v-min", "0.5", "--v-max", "0.5", "--v-steps", "1",
                                 "--restarts", "6"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert float(rows[0]["abs_diff"]) <= 0.01


def test_compare_chain_entanglement_rejected(capsys):
    code, _, err = _run(capsys, ["compare", "--model", "chain", "--n-sites", "3",
                                 "--quantity", "entanglement"])
    assert code == 2
    assert "dimer" in err


def test_config_error_names_field(capsys):
    code, _, err = _run(capsys, ["sweep", "--v-steps", "0"])
    assert code == 2
    assert "coupling_grid.steps" in err


def test_config_rejects_unknown_top_level_key(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"mystery": 1}))
    code, _, err = _run(capsys, ["sweep", "--config", str(cfg_path)])
    assert code == 2
    assert "mystery" in err


def test_config_rejects_beta_with_temperature_grid(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"beta": 2.0,
                                    "temperature_grid": {"min": 0.5, "max": 1.0, "steps": 2}}))
    code, _, err = _run(capsys, ["sweep", "--config", str(cfg_path)])
    assert code == 2
    assert "mutually exclusive" in err


def test_config_rejects_temperature_grid_for_entanglement(capsys):
    code, _, err = _run(capsys, ["sweep", "--quantity", "entanglement",
                                 "--t-min", "0.5", "--t-max", "1.0", "--t-steps", "2"])
    assert code == 2
    assert "entanglement" in err


def test_config_rejects_chain_without_sites(capsys):
    code, _, err = _run(capsys, ["sweep", "--model", "chain"])
    assert code == 2
    assert "n_sites" in err


def test_unwritable_output_path(capsys):
    code, _, err = _run(capsys, ["sweep", "--v-min", "0", "--v-max", "0", "--v-steps", "1",
                                 "--restarts", "4", "--out", "/nonexistent-dir/x.csv"])
    assert code == 2
    assert "output.path" in err


def test_strict_flag_reports_nonconvergence(capsys):
    # one simplex step on an interacting point cannot converge
    code, out, err = _run(capsys, ["sweep", "--v-min", "2", "--v-max", "2", "--v-steps", "1",
                                   "--restarts", "1", "--max-iter", "1", "--strict"])
    assert code == 3
    assert "did not converge" in err
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    assert rows[0]["converged"] == "false"


def test_validate_config_defaults_roundtrip():
    cfg = validate_config({"model": {"type": "dimer"}, "quantity": "thermal",
                           "coupling_grid": {"min": 0.0, "max": 1.0, "steps": 2}})
    assert cfg["beta"] == 1.0
    assert cfg["optimizer"]["restarts"] == 16
    assert cfg["output"]["format"] == "csv"


def test_run_sweep_python_api():
    cfg = validate_config({"model": {"type": "dimer"}, "quantity": "thermal",
                           "coupling_grid": {"min": 0.0, "max": 0.0, "steps": 1},
                           "optimizer": FAST_OPT})
    rows = run_sweep(cfg)
    assert len(rows) == 1
    assert rows[0]["d_f"] <= 1e-8
    text = render_csv(cfg, rows, "sweep")
    assert text.startswith("# config: ")


def test_floats_use_twelve_significant_digits(capsys):
    code, out, _ = _run(capsys, ["sweep", "--v-min", "2", "--v-max", "2", "--v-steps", "1",
                                 "--restarts", "4"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(out.splitlines()[1:]))))
    mantissa = rows[0]["d_f"].lstrip("-0.").replace(".", "").rstrip("0")
    assert len(mantissa) <= 12
    assert float(rows[0]["d_f"]) == pytest.approx(0.0072677095, abs=1e-6)
