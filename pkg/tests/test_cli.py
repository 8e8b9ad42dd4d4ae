import json
import subprocess
import sys

import numpy as np
import pytest

from lswspec.cli import main
from lswspec.io import read_series_csv


def _run(*args) -> int:
    return main([str(a) for a in args])


def _write_sim_config(path, sigma2="0.05, 0.05"):
    path.write_text(
        "kind: lsw\n"
        "length: 160\n"
        f"sigma2: [{sigma2}]\n"
        "seed: 7\n"
        "amplitudes:\n"
        "  - {type: constant, value: 1.0}\n"
        "  - {type: piecewise, values: [1.5, 0.5], breakpoints: [0.5]}\n",
        encoding="utf-8",
    )


def _manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_simulate_writes_series_and_manifest(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)
    out = tmp_path / "run"
    assert _run("simulate", "--config", cfg, "--out", out) == 0
    names, data = read_series_csv(out / "series.csv")
    assert names == ["t", "y", "x_1", "x_2", "w_1", "w_2", "S_1", "S_2"]
    assert data["y"].shape == (160,)
    np.testing.assert_allclose(data["y"], data["x_1"] + data["x_2"], atol=1e-10)
    np.testing.assert_allclose(data["S_1"], data["w_1"] ** 2, atol=1e-12)
    manifest = _manifest(out / "manifest.json")
    assert manifest["command"] == "simulate"
    assert manifest["config"]["seed"] == 7
    assert manifest["outputs"] == ["series.csv"]


def test_simulate_reruns_byte_identical(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert _run("simulate", "--config", cfg, "--out", out1) == 0
    assert _run("simulate", "--config", cfg, "--out", out2) == 0
    assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()
    m1, m2 = _manifest(out1 / "manifest.json"), _manifest(out2 / "manifest.json")
    m1.pop("created_at"), m2.pop("created_at")
    assert m1 == m2


def test_simulate_concat_ma_default(tmp_path) -> None:
    out = tmp_path / "ma"
    assert _run("simulate", "--kind", "concat-ma", "--seed", 3, "--out", out) == 0
    names, data = read_series_csv(out / "series.csv")
    assert names == ["t", "y", "segment"]
    assert data["y"].shape == (512,)
    np.testing.assert_array_equal(np.unique(data["segment"]), [0, 1, 2, 3])


def test_estimate_round_trip(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)
    sim_out = tmp_path / "sim"
    assert _run("simulate", "--config", cfg, "--out", sim_out) == 0
    est_out = tmp_path / "est"
    assert _run(
        "estimate", "--input", sim_out / "series.csv", "--out", est_out,
        "--scales", 2, "--sigma2", "0.05", "--num-replicates", 4, "--seed", 11,
    ) == 0
    names, spectrum = read_series_csv(est_out / "y_spectrum.csv")
    assert names == ["scale", "t", "w_mean", "w_var", "S_raw", "S_smoothed"]
    assert set(np.unique(spectrum["scale"])) == {1.0, 2.0}
    assert np.all(spectrum["S_raw"] >= 0.0)
    _, scores = read_series_csv(est_out / "y_scores.csv")
    assert scores["replicate"].shape == (4,)
    assert scores["selected"].sum() == 1.0
    assert np.all(scores["log_bf_vs_selected"] >= -1e-12)
    _, stream = read_series_csv(est_out / "y_stream.csv")
    assert stream["t"][0] == 4.0
    with open(est_out / "y_summary.json", "r", encoding="utf-8") as fh:
        summary = json.load(fh)
    assert summary["selected_replicate"] in (1, 2, 3, 4)
    assert "truth_mae" in summary  # simulate wrote S_j truth columns
    assert set(summary["truth_mae"]) == {"1", "2"}
    manifest = _manifest(est_out / "manifest.json")
    assert manifest["streams"] == {"y": "y_stream.csv"}


def test_estimate_reruns_byte_identical(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)
    sim_out = tmp_path / "sim"
    _run("simulate", "--config", cfg, "--out", sim_out)
    args = (
        "estimate", "--input", sim_out / "series.csv", "--scales", 2,
        "--sigma2", "0.05", "--num-replicates", 3, "--seed", 2,
    )
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    assert _run(*args, "--out", out1) == 0
    assert _run(*args, "--out", out2) == 0
    for name in ("y_spectrum.csv", "y_scores.csv", "y_stream.csv", "y_summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_estimate_multiple_columns_matches_single(tmp_path) -> None:
    rng = np.random.default_rng(0)
    lines = ["t,a,b"]
    for t in range(60):
        lines.append(f"{t},{float(rng.normal())!r},{float(rng.normal())!r}")
    data_path = tmp_path / "pair.csv"
    data_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    both = tmp_path / "both"
    solo = tmp_path / "solo"
    args = ("--scales", 1, "--sigma2", "0.1", "--num-replicates", 2, "--seed", 5)
    assert _run("estimate", "--input", data_path, "--columns", "a,b",
                "--out", both, *args) == 0
    assert _run("estimate", "--input", data_path, "--columns", "b",
                "--out", solo, *args) == 0
    assert (both / "b_spectrum.csv").read_bytes() == (solo / "b_spectrum.csv").read_bytes()


def test_estimate_prices_mode(tmp_path) -> None:
    rng = np.random.default_rng(1)
    returns = rng.normal(0.0, 0.02, 80)
    prices = 100.0 * np.exp(np.cumsum(returns))
    lines = ["t,price"] + [f"{t},{float(p)!r}" for t, p in enumerate(prices)]
    (tmp_path / "prices.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    out = tmp_path / "est"
    assert _run(
        "estimate", "--input", tmp_path / "prices.csv", "--columns", "price",
        "--input-kind", "prices", "--scales", 1, "--sigma2", "0.001",
        "--num-replicates", 2, "--seed", 0, "--out", out,
    ) == 0
    _, spectrum = read_series_csv(out / "price_spectrum.csv")
    # returns series has one fewer sample; filter starts at t = 2**J
    assert spectrum["t"].shape[0] == 79 - 2


def test_score_run_against_itself_is_flat(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)
    sim_out = tmp_path / "sim"
    _run("simulate", "--config", cfg, "--out", sim_out)
    est_out = tmp_path / "est"
    _run("estimate", "--input", sim_out / "series.csv", "--out", est_out,
         "--scales", 1, "--sigma2", "0.05", "--num-replicates", 2, "--seed", 1)
    score_out = tmp_path / "score"
    assert _run("score", "--run-a", est_out / "manifest.json",
                "--run-b", est_out / "y_stream.csv", "--out", score_out) == 0
    _, bf = read_series_csv(score_out / "bayes_factor.csv")
    np.testing.assert_array_equal(bf["log_bf"], np.zeros(bf["log_bf"].shape))
    lines = (score_out / "msfe_comparison.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "run,msfe"
    assert float(lines[3].split(",")[1]) == 0.0  # diff row


def test_score_two_runs_matches_stream_totals(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)
    sim_out = tmp_path / "sim"
    _run("simulate", "--config", cfg, "--out", sim_out)
    est1, est2 = tmp_path / "e1", tmp_path / "e2"
    common = ("estimate", "--input", sim_out / "series.csv", "--scales", 1,
              "--num-replicates", 2)
    _run(*common, "--sigma2", "0.02", "--seed", 1, "--out", est1)
    _run(*common, "--sigma2", "0.2", "--seed", 2, "--out", est2)
    score_out = tmp_path / "score"
    assert _run("score", "--run-a", est1 / "y_stream.csv",
                "--run-b", est2 / "y_stream.csv", "--out", score_out) == 0
    _, a = read_series_csv(est1 / "y_stream.csv")
    _, b = read_series_csv(est2 / "y_stream.csv")
    _, bf = read_series_csv(score_out / "bayes_factor.csv")
    expected = np.cumsum(a["loglik"] - b["loglik"])
    np.testing.assert_allclose(bf["log_bf"], expected, atol=1e-9)
    manifest = _manifest(score_out / "manifest.json")
    assert manifest["final_log_bf"] == pytest.approx(expected[-1])


def test_score_misaligned_ranges_fails(tmp_path) -> None:
    short = tmp_path / "short.csv"
    long = tmp_path / "long.csv"
    short.write_text("t,y,pred_mean,pred_var,loglik\n1,0.0,0.0,1.0,-1.0\n", encoding="utf-8")
    long.write_text(
        "t,y,pred_mean,pred_var,loglik\n1,0.0,0.0,1.0,-1.0\n2,0.0,0.0,1.0,-1.0\n",
        encoding="utf-8",
    )
    assert _run("score", "--run-a", short, "--run-b", long, "--out", tmp_path / "s") == 2


def test_exit_codes(tmp_path) -> None:
    # missing input file -> I/O error
    assert _run("estimate", "--input", tmp_path / "nope.csv",
                "--out", tmp_path / "o1") == 4
    # unknown column -> configuration error
    data = tmp_path / "d.csv"
    data.write_text("t,y\n0,1.0\n1,2.0\n", encoding="utf-8")
    assert _run("estimate", "--input", data, "--columns", "z",
                "--out", tmp_path / "o2") == 2
    # non-numeric cell -> data error
    bad = tmp_path / "bad.csv"
    bad.write_text("t,y\n0,1.0\n1,oops\n", encoding="utf-8")
    assert _run("estimate", "--input", bad, "--out", tmp_path / "o3") == 3
    # series too short for the model -> configuration error
    assert _run("estimate", "--input", data, "--out", tmp_path / "o4") == 2
    # broken YAML -> configuration error
    yml = tmp_path / "broken.yaml"
    yml.write_text("kind: [unclosed\n", encoding="utf-8")
    assert _run("simulate", "--config", yml, "--out", tmp_path / "o5") == 2
    # unknown config key -> configuration error
    yml2 = tmp_path / "extra.yaml"
    yml2.write_text("lengths: 100\n", encoding="utf-8")
    assert _run("simulate", "--config", yml2, "--out", tmp_path / "o6") == 2


def test_flag_overrides_config(tmp_path) -> None:
    cfg = tmp_path / "sim.yaml"
    _write_sim_config(cfg)  # seed 7 in the file
    out = tmp_path / "o"
    assert _run("simulate", "--config", cfg, "--seed", 21, "--out", out) == 0
    assert _manifest(out / "manifest.json")["config"]["seed"] == 21


def test_console_script_entry_point(tmp_path) -> None:
    result = subprocess.run(
        [sys.executable, "-m", "lswspec.cli", "simulate", "--length", "40",
         "--scales", "1", "--out", str(tmp_path / "out")],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "out" / "series.csv").exists()
