"""CSV and JSON serialisation for simulated series and estimation results.

All files are UTF-8, comma-separated with a header row and ``.`` as the
decimal mark.  Floats are written with ``repr`` (shortest round-trip form), so
re-running a seeded command reproduces files byte for byte.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .estimator import SpectrumEstimate
from .simulate import LswRealization, MaRealization

__all__ = [
    "write_realization_csv",
    "write_ma_csv",
    "read_series_csv",
    "write_spectrum_csv",
    "write_scores_csv",
    "write_stream_csv",
    "write_json",
    "estimate_summary",
]


def _fmt(value) -> str:
    return repr(float(value))


def _write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_realization_csv(path, realization: LswRealization) -> None:
    """Write a simulated process with its per-scale components, amplitude
    paths and realised spectra (columns ``t,y,x_j...,w_j...,S_j...``)."""
    n_scales = realization.n_scales
    header = (
        ["t", "y"]
        + [f"x_{j}" for j in range(1, n_scales + 1)]
        + [f"w_{j}" for j in range(1, n_scales + 1)]
        + [f"S_{j}" for j in range(1, n_scales + 1)]
    )
    w = realization.w[:, realization.n_pre:]
    rows = []
    for t in range(realization.length):
        row = [str(t), _fmt(realization.y[t])]
        row += [_fmt(realization.x[j, t]) for j in range(n_scales)]
        row += [_fmt(w[j, t]) for j in range(n_scales)]
        row += [_fmt(w[j, t] ** 2) for j in range(n_scales)]
        rows.append(row)
    _write_rows(path, header, rows)


def write_ma_csv(path, realization: MaRealization) -> None:
    """Write a concatenated-MA benchmark series (columns ``t,y,segment``)."""
    rows = [
        [str(t), _fmt(realization.y[t]), str(int(realization.segment_ids[t]))]
        for t in range(realization.y.shape[0])
    ]
    _write_rows(path, ["t", "y", "segment"], rows)


def read_series_csv(path):
    """Read a CSV with a header row into ``(names, columns)`` where
    ``columns`` maps each name to a float array."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        names = [h.strip() for h in header]
        if len(set(names)) != len(names) or any(not n for n in names):
            raise DataError(f"{path}: header has empty or duplicate column names")
        raw = list(reader)
    data = {name: np.empty(len(raw)) for name in names}
    for i, row in enumerate(raw):
        if len(row) != len(names):
            raise DataError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(names)}"
            )
        for name, cell in zip(names, row):
            try:
                data[name][i] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {i + 2}, column {name!r}: cannot parse {cell!r}"
                ) from None
    return names, data


def write_spectrum_csv(path, estimate: SpectrumEstimate) -> None:
    """Write per-scale trajectories with columns
    ``scale,t,w_mean,w_var,S_raw,S_smoothed``."""
    rows = []
    for est in estimate.scales:
        for i in range(est.times.shape[0]):
            rows.append(
                [
                    str(est.scale),
                    str(int(est.times[i])),
                    _fmt(est.w_mean[i]),
                    _fmt(est.w_var[i]),
                    _fmt(est.spectrum[i]),
                    _fmt(est.spectrum_smoothed[i]),
                ]
            )
    _write_rows(path, ["scale", "t", "w_mean", "w_var", "S_raw", "S_smoothed"], rows)


def write_scores_csv(path, estimate: SpectrumEstimate) -> None:
    """Write the replicate comparison table
    (``replicate,loglik,msfe,score,log_bf_vs_selected,selected``)."""
    sc = estimate.scores
    rows = []
    for m in range(sc.scores.shape[0]):
        rows.append(
            [
                str(m + 1),
                _fmt(sc.loglik[m]),
                _fmt(sc.msfe[m]),
                _fmt(sc.scores[m]),
                _fmt(sc.bayes_factors[m, -1]),
                "1" if m + 1 == sc.selected else "0",
            ]
        )
    _write_rows(
        path,
        ["replicate", "loglik", "msfe", "score", "log_bf_vs_selected", "selected"],
        rows,
    )


def write_stream_csv(path, estimate: SpectrumEstimate) -> None:
    """Write the selected replicate's per-time predictive stream
    (``t,y,pred_mean,pred_var,loglik``), the input to run-vs-run scoring."""
    fo = estimate.selected_filter
    rows = []
    for i in range(fo.n_steps):
        rows.append(
            [
                str(fo.start_time + i),
                _fmt(fo.observations[i]),
                _fmt(fo.pred_y_mean[i]),
                _fmt(fo.pred_y_var[i]),
                _fmt(fo.loglik_increments[i]),
            ]
        )
    _write_rows(path, ["t", "y", "pred_mean", "pred_var", "loglik"], rows)


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _json_ready(value):
    """Recursively convert numpy scalars/arrays for JSON emission."""
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Path):
        return str(value)
    return value


def estimate_summary(estimate: SpectrumEstimate) -> dict:
    """JSON-ready summary of an estimation run (no per-time trajectories)."""
    sc = estimate.scores
    summary = {
        "config": estimate.config.to_dict(),
        "length": estimate.length,
        "start_time": estimate.start_time,
        "score_rule": sc.rule,
        "burn_in": sc.burn_in,
        "selected_replicate": sc.selected,
        "loglik": sc.loglik,
        "msfe": sc.msfe,
        "final_log_bf_vs_selected": sc.bayes_factors[:, -1],
        "spline_lambda": {str(e.scale): e.spline_lambda for e in estimate.scales},
    }
    if estimate.forecasts is not None:
        summary["forecasts"] = [
            {"h": h + 1, "mean": estimate.forecasts[h, 0], "var": estimate.forecasts[h, 1]}
            for h in range(estimate.forecasts.shape[0])
        ]
    return _json_ready(summary)
