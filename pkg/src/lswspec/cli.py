"""Command line interface: ``simulate``, ``estimate`` and ``score``.

Every option can be given in a YAML config file (kebab-case keys identical to
the long flag names) and overridden on the command line.  Exit codes: 0 on
success, 2 for configuration problems, 3 for bad data, 4 for I/O failures and
5 for numerical degeneracy.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import (
    EXIT_IO,
    EXIT_OK,
    ConfigurationError,
    DataError,
    LswError,
)
from .estimator import EstimationConfig, estimate_spectrum, log_returns
from .io import (
    estimate_summary,
    read_series_csv,
    write_json,
    write_ma_csv,
    write_realization_csv,
    write_scores_csv,
    write_spectrum_csv,
    write_stream_csv,
)
from .kalman import msfe, sequential_bayes_factor
from .simulate import (
    AmplitudeSpec,
    ConstantAmplitude,
    MaSegment,
    MaSegmentSpec,
    PathAmplitude,
    PiecewiseAmplitude,
    RandomWalkAmplitude,
    default_ma_segments,
    simulate_concat_ma,
    simulate_lsw,
)

__all__ = ["main", "build_parser"]

_SIMULATE_KEYS = {
    "kind", "length", "scales", "sigma2", "seed", "out", "amplitudes", "segments",
}
_ESTIMATE_KEYS = {
    "input", "columns", "input-kind", "scales", "sigma2", "num-replicates",
    "score-rule", "holdout-fraction", "spline-lambda", "spectrum-form",
    "aggregate", "horizon", "burn-in", "seed", "out",
}
_SCORE_KEYS = {"run-a", "run-b", "out"}


def _load_config(path: str | None, allowed: set) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: cannot parse config: {exc}") from exc
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigurationError(f"{path}: config must be a mapping at top level")
    unknown = sorted(set(loaded) - allowed)
    if unknown:
        raise ConfigurationError(f"{path}: unknown config keys: {', '.join(unknown)}")
    return loaded


def _pick(flag_value, config: dict, key: str, default=None):
    """Command-line flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    if key in config and config[key] is not None:
        return config[key]
    return default


def _as_sigma2(value, n_scales: int):
    if value is None:
        return None
    if isinstance(value, str):
        try:
            parts = [float(p) for p in value.split(",") if p.strip() != ""]
        except ValueError:
            raise ConfigurationError(f"cannot parse sigma2 list {value!r}") from None
    elif isinstance(value, (int, float)):
        parts = [float(value)]
    else:
        parts = [float(p) for p in value]
    if len(parts) == 1:
        parts = parts * n_scales
    return parts


def _as_columns(value):
    if value is None:
        return None
    if isinstance(value, str):
        cols = [c.strip() for c in value.split(",") if c.strip()]
    else:
        cols = [str(c) for c in value]
    if not cols:
        raise ConfigurationError("columns selection is empty")
    return cols


def _as_spline_lambda(value):
    if value is None or value == "gcv":
        return "gcv" if value == "gcv" else None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"spline-lambda must be a number or 'gcv', got {value!r}"
        ) from None


def _amplitude_from_dict(entry) -> object:
    if not isinstance(entry, dict) or "type" not in entry:
        raise ConfigurationError(f"amplitude entries need a 'type', got {entry!r}")
    kind = entry["type"]
    try:
        if kind == "constant":
            return ConstantAmplitude(value=float(entry["value"]))
        if kind == "piecewise":
            return PiecewiseAmplitude(
                values=tuple(entry["values"]),
                breakpoints=tuple(entry.get("breakpoints", ())),
            )
        if kind == "path":
            return PathAmplitude(values=np.asarray(entry["values"], dtype=float))
        if kind == "random-walk":
            return RandomWalkAmplitude(start=float(entry.get("start", 0.0)))
    except KeyError as exc:
        raise ConfigurationError(f"amplitude entry {entry!r} misses key {exc}") from None
    raise ConfigurationError(f"unknown amplitude type {kind!r}")


def _segments_from_config(raw) -> MaSegmentSpec:
    segments = []
    for entry in raw:
        if not isinstance(entry, dict):
            raise ConfigurationError(f"segment entries must be mappings, got {entry!r}")
        try:
            segments.append(
                MaSegment(
                    coeffs=tuple(entry["coeffs"]),
                    variance=float(entry.get("variance", 1.0)),
                    length=int(entry["length"]),
                )
            )
        except KeyError as exc:
            raise ConfigurationError(f"segment entry {entry!r} misses key {exc}") from None
    return MaSegmentSpec(segments=tuple(segments))


def _manifest(command: str, config: dict, outputs: list, extra: dict | None = None) -> dict:
    payload = {
        "command": command,
        "package": f"lswspec {__version__}",
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": config,
        "outputs": outputs,
    }
    if extra:
        payload.update(extra)
    return payload


def _out_dir(ns, config: dict) -> Path:
    out = _pick(getattr(ns, "out", None), config, "out", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(ns) -> int:
    config = _load_config(ns.config, _SIMULATE_KEYS)
    kind = _pick(ns.kind, config, "kind", "lsw")
    seed = int(_pick(ns.seed, config, "seed", 0))
    out = _out_dir(ns, config)
    if kind == "lsw":
        amplitudes_raw = config.get("amplitudes")
        scales = _pick(ns.scales, config, "scales")
        if scales is None:
            scales = len(amplitudes_raw) if amplitudes_raw else 2
        scales = int(scales)
        length = int(_pick(ns.length, config, "length", 512))
        sigma2 = _as_sigma2(_pick(ns.sigma2, config, "sigma2"), scales) or [0.0] * scales
        if amplitudes_raw is None:
            amplitudes = tuple(ConstantAmplitude(1.0) for _ in range(scales))
        else:
            amplitudes = tuple(_amplitude_from_dict(a) for a in amplitudes_raw)
        if len(amplitudes) != scales:
            raise ConfigurationError(
                f"{len(amplitudes)} amplitude entries for {scales} scales"
            )
        spec = AmplitudeSpec(amplitudes=amplitudes, sigma2=tuple(sigma2))
        realization = simulate_lsw(spec, length, seed=seed)
        series_path = out / "series.csv"
        write_realization_csv(series_path, realization)
        resolved = {
            "kind": "lsw",
            "length": length,
            "seed": seed,
            "spec": spec.to_dict(),
        }
    elif kind == "concat-ma":
        segments_raw = config.get("segments")
        spec = _segments_from_config(segments_raw) if segments_raw else default_ma_segments()
        realization = simulate_concat_ma(spec, seed=seed)
        series_path = out / "series.csv"
        write_ma_csv(series_path, realization)
        resolved = {"kind": "concat-ma", "seed": seed, "spec": spec.to_dict()}
    else:
        raise ConfigurationError(f"kind must be 'lsw' or 'concat-ma', got {kind!r}")
    write_json(out / "manifest.json", _manifest("simulate", resolved, [series_path.name]))
    print(f"wrote {series_path}")
    return EXIT_OK


def _select_columns(names, requested):
    value_names = [n for n in names if n != "t"]
    if not value_names:
        raise DataError("input has no value columns")
    if requested is None:
        return ["y"] if "y" in value_names else value_names[:1]
    missing = [c for c in requested if c not in names]
    if missing:
        raise ConfigurationError(f"requested columns not in input: {', '.join(missing)}")
    return requested


def _truth_mae(estimate, data, scale) -> dict | None:
    name = f"S_{scale.scale}"
    if name not in data:
        return None
    truth = data[name]
    times = scale.times
    if times[-1] >= truth.shape[0]:
        return None
    truth_window = truth[times]
    return {
        "raw": float(np.mean(np.abs(scale.spectrum - truth_window))),
        "smoothed": float(np.mean(np.abs(scale.spectrum_smoothed - truth_window))),
    }


def cmd_estimate(ns) -> int:
    config = _load_config(ns.config, _ESTIMATE_KEYS)
    input_path = _pick(ns.input, config, "input")
    if input_path is None:
        raise ConfigurationError("estimate needs an input CSV (--input or config key)")
    out = _out_dir(ns, config)
    scales = int(_pick(ns.scales, config, "scales", 2))
    sigma2 = _as_sigma2(_pick(ns.sigma2, config, "sigma2", 0.1), scales)
    spline_lambda = _as_spline_lambda(_pick(ns.spline_lambda, config, "spline-lambda", "gcv"))
    cfg = EstimationConfig(
        n_scales=scales,
        sigma2=sigma2,
        n_replicates=int(_pick(ns.num_replicates, config, "num-replicates", 50)),
        seed=int(_pick(ns.seed, config, "seed", 0)),
        horizon=int(_pick(ns.horizon, config, "horizon", 0)),
        score_rule=str(_pick(ns.score_rule, config, "score-rule", "loglik")),
        holdout_fraction=float(_pick(ns.holdout_fraction, config, "holdout-fraction", 0.2)),
        spline_lambda="gcv" if spline_lambda is None else spline_lambda,
        spectrum_form=str(_pick(ns.spectrum_form, config, "spectrum-form", "mean-of-square")),
        aggregate=str(_pick(ns.aggregate, config, "aggregate", "best")),
        burn_in=config.get("burn-in"),
    )
    input_kind = _pick(ns.input_kind, config, "input-kind", "returns")
    if input_kind not in ("prices", "returns"):
        raise ConfigurationError(
            f"input-kind must be 'prices' or 'returns', got {input_kind!r}"
        )
    names, data = read_series_csv(input_path)
    columns = _select_columns(names, _as_columns(_pick(ns.columns, config, "columns")))

    outputs = []
    streams = {}
    summaries = {}
    for col in columns:
        series = data[col]
        if input_kind == "prices":
            series = log_returns(series)
        estimate = estimate_spectrum(series, cfg)
        spectrum_path = out / f"{col}_spectrum.csv"
        scores_path = out / f"{col}_scores.csv"
        stream_path = out / f"{col}_stream.csv"
        summary_path = out / f"{col}_summary.json"
        write_spectrum_csv(spectrum_path, estimate)
        write_scores_csv(scores_path, estimate)
        write_stream_csv(stream_path, estimate)
        summary = estimate_summary(estimate)
        if input_kind == "returns":
            mae = {}
            for scale in estimate.scales:
                entry = _truth_mae(estimate, data, scale)
                if entry is not None:
                    mae[str(scale.scale)] = entry
            if mae:
                summary["truth_mae"] = mae
        write_json(summary_path, summary)
        summaries[col] = summary_path.name
        streams[col] = stream_path.name
        outputs += [spectrum_path.name, scores_path.name, stream_path.name, summary_path.name]
        print(f"estimated column {col!r}: selected replicate "
              f"{estimate.scores.selected} of {cfg.n_replicates}")
    resolved = dict(cfg.to_dict(), input=str(input_path), columns=columns,
                    input_kind=input_kind)
    write_json(
        out / "manifest.json",
        _manifest("estimate", resolved, outputs, {"streams": streams, "summaries": summaries}),
    )
    return EXIT_OK


def _resolve_stream(path_text: str) -> Path:
    path = Path(path_text)
    if path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        streams = manifest.get("streams", {})
        if len(streams) != 1:
            raise ConfigurationError(
                f"{path}: manifest lists {len(streams)} streams; "
                "pass the stream CSV path directly"
            )
        return path.parent / next(iter(streams.values()))
    return path


def _read_stream(path: Path):
    names, data = read_series_csv(path)
    needed = {"t", "y", "pred_mean", "loglik"}
    missing = needed - set(names)
    if missing:
        raise DataError(f"{path}: stream file misses columns: {', '.join(sorted(missing))}")
    return data


def cmd_score(ns) -> int:
    config = _load_config(ns.config, _SCORE_KEYS)
    run_a = _pick(ns.run_a, config, "run-a")
    run_b = _pick(ns.run_b, config, "run-b")
    if run_a is None or run_b is None:
        raise ConfigurationError("score needs --run-a and --run-b")
    out = _out_dir(ns, config)
    path_a = _resolve_stream(run_a)
    path_b = _resolve_stream(run_b)
    a = _read_stream(path_a)
    b = _read_stream(path_b)
    if a["t"].shape != b["t"].shape or not np.array_equal(a["t"], b["t"]):
        raise ConfigurationError(
            f"runs cover different time ranges: {path_a} vs {path_b}"
        )
    bf = sequential_bayes_factor(a["loglik"], b["loglik"])
    bf_path = out / "bayes_factor.csv"
    with open(bf_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,log_bf\n")
        for i in range(bf.shape[0]):
            fh.write(f"{int(a['t'][i])},{float(bf[i])!r}\n")
    msfe_a = float(msfe(a["pred_mean"], a["y"]))
    msfe_b = float(msfe(b["pred_mean"], b["y"]))
    msfe_path = out / "msfe_comparison.csv"
    with open(msfe_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("run,msfe\n")
        fh.write(f"a,{msfe_a!r}\n")
        fh.write(f"b,{msfe_b!r}\n")
        fh.write(f"diff,{(msfe_a - msfe_b)!r}\n")
    resolved = {"run-a": str(run_a), "run-b": str(run_b)}
    write_json(
        out / "manifest.json",
        _manifest(
            "score",
            resolved,
            [bf_path.name, msfe_path.name],
            {"final_log_bf": float(bf[-1]), "msfe_a": msfe_a, "msfe_b": msfe_b},
        ),
    )
    print(f"final log Bayes factor (a vs b): {bf[-1]:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lswspec",
        description="Simulate, estimate and score locally stationary wavelet models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a synthetic series and write it as CSV")
    sim.add_argument("--config", help="YAML config file")
    sim.add_argument("--kind", choices=["lsw", "concat-ma"])
    sim.add_argument("--length", type=int)
    sim.add_argument("--scales", type=int)
    sim.add_argument("--sigma2", help="comma-separated per-scale variances")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", help="output directory (default: current)")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="estimate per-scale spectra from a series CSV")
    est.add_argument("--config", help="YAML config file")
    est.add_argument("--input", help="input CSV with a header row")
    est.add_argument("--columns", help="comma-separated value columns (default: y)")
    est.add_argument("--input-kind", choices=["prices", "returns"], dest="input_kind")
    est.add_argument("--scales", type=int)
    est.add_argument("--sigma2", help="comma-separated per-scale variances")
    est.add_argument("--num-replicates", type=int, dest="num_replicates")
    est.add_argument("--score-rule", choices=["loglik", "msfe"], dest="score_rule")
    est.add_argument("--holdout-fraction", type=float, dest="holdout_fraction")
    est.add_argument("--spline-lambda", dest="spline_lambda",
                     help="smoothing penalty or 'gcv'")
    est.add_argument("--spectrum-form", choices=["mean-of-square", "square-of-mean"],
                     dest="spectrum_form")
    est.add_argument("--aggregate", choices=["best", "weighted"])
    est.add_argument("--horizon", type=int)
    est.add_argument("--seed", type=int)
    est.add_argument("--out")
    est.set_defaults(func=cmd_estimate)

    sco = sub.add_parser("score", help="compare two estimation runs sequentially")
    sco.add_argument("--config", help="YAML config file")
    sco.add_argument("--run-a", dest="run_a", help="manifest.json or stream CSV")
    sco.add_argument("--run-b", dest="run_b", help="manifest.json or stream CSV")
    sco.add_argument("--out")
    sco.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except LswError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
