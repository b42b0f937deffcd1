import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from hdcoint.cli import main, parse_pattern
from hdcoint.datasets import DatasetConfig, histogram_rows, ingest, run_test
from hdcoint.errors import DataError, DimensionError, ParameterError
from hdcoint.model import E, E_col, I_rho, VarKSpec, realize_pattern, scaled_identity, simulate


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        w.writerows(rows)
    return path


def _panel_csv(path, panel, labels=None):
    labels = labels or [f"s{i}" for i in range(panel.N)]
    rows = [list(map(repr, map(float, col))) for col in panel.levels.T]
    return _write(path, labels, rows)


# ---------------------------------------------------------------- ingestion

def test_ingest_shape_and_log(tmp_path):
    g = np.random.default_rng(0)
    prices = np.exp(g.normal(size=(11, 3)))
    p = ingest(DatasetConfig(_write(tmp_path / "p.csv", ["a", "b", "c"], prices.tolist()), transform="log"))
    assert (p.N, p.T) == (3, 10) and p.labels == ("a", "b", "c")
    assert np.allclose(p.levels.T, np.log(prices))


def test_ingest_date_column_and_no_header(tmp_path):
    rows = [[f"2020-01-{d:02d}", d, 2 * d] for d in range(1, 6)]
    p = ingest(DatasetConfig(_write(tmp_path / "d.csv", ["date", "x", "y"], rows), date_column=0))
    assert (p.N, p.T) == (2, 4) and np.array_equal(p.X0, [1.0, 2.0])
    q = ingest(DatasetConfig(_write(tmp_path / "n.csv", None, [r[1:] for r in rows]), has_header=False))
    assert np.array_equal(q.data, p.data)


def test_ingest_missing_cell_named(tmp_path):
    rows = [[1, 2], [3, "NaN"], [5, 6], [7, 8]]
    with pytest.raises(DataError, match=r"line 3, column 'y'"):
        ingest(DatasetConfig(_write(tmp_path / "m.csv", ["x", "y"], rows)))


def test_ingest_non_numeric(tmp_path):
    rows = [[1, 2], [3, 4], ["abc", 6], [7, 8]]
    with pytest.raises(DataError, match=r"line 4, column 'x' \('abc'\)"):
        ingest(DatasetConfig(_write(tmp_path / "b.csv", ["x", "y"], rows)))


def test_ingest_size_and_log_checks(tmp_path):
    with pytest.raises(DataError):
        ingest(DatasetConfig(_write(tmp_path / "one.csv", ["x"], [[1], [2], [3]])))
    with pytest.raises(DataError):
        ingest(DatasetConfig(_write(tmp_path / "short.csv", ["x", "y"], [[1, 2], [3, 4]])))
    with pytest.raises(DataError, match="positive"):
        ingest(DatasetConfig(_write(tmp_path / "neg.csv", ["x", "y"], [[1, 2], [3, -4], [5, 6]]), transform="log"))


# ---------------------------------------------------------------- run_test

def test_run_test_schema_and_histogram():
    panel = simulate(VarKSpec(10, 1, 80), 0)
    out = run_test(panel, (1, 2), (1, 2), (0.9, 0.95))
    for k in (1, 2):
        rep = out[k]
        assert {"spectrum", "statistic", "rescaled", "decision", "p_value", "constants", "provenance"} <= set(rep)
        assert set(rep["constants"]) >= {"c1", "c2", "lambda_plus", "lambda_minus"}
        assert set(rep["decision"]["1"]) == {"0.9", "0.95"}
        assert sum(row["count"] for row in rep["histogram"]) == 10
    rows = histogram_rows(out[1]["spectrum"], 10, 80, 1)
    assert len(rows) == 100 and all(row["wachter_pdf"] >= 0 for row in rows)


def test_run_test_dimension_message():
    panel = simulate(VarKSpec(10, 1, 40), 0)
    with pytest.raises(DimensionError, match=r"T > \(k\+1\)N"):
        run_test(panel, (4,))


def test_run_test_planted_cointegration():
    panel = simulate(VarKSpec(20, 1, 800, pi=I_rho(3, -1.0)), 1)
    out = run_test(panel, (1, 2, 3, 4), (1,), (0.99,))
    for k in (1, 2, 3, 4):
        lp = out[k]["constants"]["lambda_plus"]
        assert sum(v > lp for v in out[k]["spectrum"]) >= 3
        assert out[k]["decision"]["1"]["0.99"] == "reject"


def test_run_test_null_acceptance_rate():
    accept = 0
    for s in range(60):
        rep = run_test(simulate(VarKSpec(92, 1, 522), s), (1,), (1,), (0.95,))[1]
        accept += rep["decision"]["1"]["0.95"] == "fail_to_reject"
    assert 0.86 <= accept / 60 <= 1.0


# ---------------------------------------------------------------- pattern parser

@pytest.mark.parametrize("text,expect", [
    ("0.95*E12", E(1, 2, 0.95)),
    ("-0.1*Ecol1", E_col(1, -0.1)),
    ("E3,4", E(3, 4)),
    ("-0.8*I2", I_rho(2, -0.8)),
    ("0.5*I", scaled_identity(0.5)),
    ("0.1*Ecol1+0.95*E12", E_col(1, 0.1) + E(1, 2, 0.95)),
    ("1e-1*E11 - 2*E22", E(1, 1, 0.1) + E(2, 2, -2)),
])
def test_parse_pattern(text, expect):
    assert np.array_equal(realize_pattern(parse_pattern(text), 4), realize_pattern(expect, 4))


@pytest.mark.parametrize("text", ["", "0.95", "E", "0.9*F12", "E12E13"])
def test_parse_pattern_rejects(text):
    with pytest.raises(ParameterError):
        parse_pattern(text)


# ---------------------------------------------------------------- commands

def _run(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


def test_cli_test_writes_one_json_per_k_and_is_deterministic(tmp_path):
    data = _panel_csv(tmp_path / "panel.csv", simulate(VarKSpec(8, 1, 80), 2))
    out = tmp_path / "out"
    r = _run(["--out-dir", str(out), "test", "--k", "1,2,3,4", "--r", "1", "--alpha", "0.95", str(data)])
    assert r.exit_code == 0, r.output
    files = sorted(p.name for p in out.glob("test_panel_k*.json"))
    assert files == [f"test_panel_k{k}.json" for k in (1, 2, 3, 4)]
    first = (out / "test_panel_k2.json").read_bytes()
    _run(["--out-dir", str(out), "test", "--k", "1,2,3,4", "--r", "1", "--alpha", "0.95", str(data)])
    assert (out / "test_panel_k2.json").read_bytes() == first
    rep = json.loads(first)
    assert rep["provenance"]["k"] == 2 and rep["provenance"]["source"] == "panel.csv"
    manifest = json.loads((out / "manifest_test_seed0.json").read_text())
    assert manifest["params"]["k"] == [1, 2, 3, 4] and manifest["seed"] == 0
    assert (out / "test_panel_k2_hist.csv").exists()


def test_cli_exit_codes(tmp_path):
    data = _panel_csv(tmp_path / "small.csv", simulate(VarKSpec(10, 1, 30), 0))
    assert CliRunner().invoke(main, ["--out-dir", str(tmp_path), "test", "--k", "3", str(data)]).exit_code == 3
    bad = _write(tmp_path / "bad.csv", ["x", "y"], [[1, 2], [3, ""], [5, 6], [7, 8]])
    res = CliRunner().invoke(main, ["--out-dir", str(tmp_path), "test", str(bad)])
    assert res.exit_code == 2 and "missing" in res.output
    assert CliRunner().invoke(main, ["test", "--bogus", str(data)]).exit_code == 2
    assert CliRunner().invoke(main, ["power", "--pi", "0.9*Q1"]).exit_code == 2


def test_cli_simulate_round_trip(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 3, "k": 2, "T": 20, "gammas": ["0.5*E11"], "mu": 0.1}))
    out = tmp_path / "p.csv"
    r = _run(["--seed", "4", "--out-dir", str(tmp_path), "simulate", str(cfg), "--output", str(out)])
    assert r.exit_code == 0
    p = ingest(DatasetConfig(out))
    ref = simulate(VarKSpec(3, 2, 20, gammas=(E(1, 1, 0.5),), mu=0.1), 4)
    assert np.array_equal(p.data, ref.data)
    assert (tmp_path / "manifest_simulate_seed4.json").exists()


def test_cli_quantiles(tmp_path):
    r = _run(["--out-dir", str(tmp_path), "--seed", "3", "quantiles", "--r", "2", "--reps", "1000", "--dim", "300"])
    assert r.exit_code == 0
    rows = list(csv.DictReader(open(tmp_path / "quantiles_r2_n300_reps1000_seed3.csv")))
    assert len(rows) == 8 and set(rows[0]) == {"r", "alpha", "quantile", "stderr", "n", "reps", "seed"}


def test_cli_threads_do_not_change_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    base = ["mc-size", "--n", "10", "--t", "60", "--k", "1,2", "--reps", "12"]
    _run(["--out-dir", str(a), "--threads", "1", *base])
    _run(["--out-dir", str(b), "--threads", "2", *base])
    assert (a / "size_seed0_reps.csv").read_bytes() == (b / "size_seed0_reps.csv").read_bytes()


@pytest.mark.parametrize("args", [
    ["projector-check", "--reps", "200"],
    ["order-sweep", "--n", "20", "--t", "200", "--gamma", "1:0.95*E11"],
    ["power", "--n", "20", "--t", "200", "--reps", "5"],
    ["prop5-check", "--t", "2000", "--reps", "5"],
    ["stationary-check", "--t", "2000", "--reps", "5"],
    ["mc-density", "--n", "20", "--t", "200", "--reps", "10"],
])
def test_cli_experiment_commands(tmp_path, args):
    r = _run(["--out-dir", str(tmp_path), "--format", "csv", *args])
    assert r.exit_code == 0
    assert list(tmp_path.glob("manifest_*_seed0.json"))
    assert list(tmp_path.glob("*_summary.csv"))
