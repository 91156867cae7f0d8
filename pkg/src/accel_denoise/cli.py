"""Command-line entry point: ``accel-denoise <subcommand> [options]``.

Subcommands
-----------
simulate  write a simulated dataset (CSV plus JSON metadata)
train     fit the learning-based models and save checkpoints
eval      score every configured model on the test split
sca       coarse-alignment accuracy only
report    merge metric and alignment results into a text summary

Exit status is 0 on success, 2 for configuration errors, 3 for data errors
and 4 when training diverges.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .benchmark import (
    ALL_MODELS,
    LEARNING_MODELS,
    BenchmarkConfig,
    fit_model,
    prepare,
)
from .exceptions import ConfigError, DivergenceError, InvalidArgumentError, InvalidDataError
from .ingest import read_recordings_csv
from .knn import KnnDenoiser
from .metrics import MetricsReport, compare
from .nn import RecurrentDenoiser
from .sca import ScaReport, evaluate_sca, suppression_ratio
from .sim import build_dataset, write_dataset

logger = logging.getLogger("accel_denoise")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4
LOG_ENV = "ACCEL_DENOISE_LOG"
CONFIG_NAME = "config.json"


def _setup_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")


def _parse_models(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    lookup = {m.lower(): m for m in ALL_MODELS + ("Identity",)}
    out = []
    for n in names:
        if n.lower() not in lookup:
            raise ConfigError(f"unknown model {n!r}; choose from {', '.join(ALL_MODELS)}")
        out.append(lookup[n.lower()])
    return tuple(out)


def load_config(args):
    """Config file (if any) with command-line overrides applied."""
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}:{exc.lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        cfg = BenchmarkConfig.from_dict(data)
    else:
        cfg = BenchmarkConfig()
    sim = cfg.sim
    changes = {}
    try:
        if args.seed is not None:
            sim = replace(sim, seed=args.seed)
            changes["seed"] = args.seed
        if args.grid_step is not None:
            sim = replace(sim, angle_step_deg=args.grid_step)
        if getattr(args, "samples", None) is not None:
            sim = replace(sim, window_len=args.samples)
        if args.window is not None:
            changes["window"] = args.window
        if args.models is not None:
            changes["models"] = _parse_models(args.models)
        changes["threads"] = args.threads if args.threads is not None else (os.cpu_count() or 1)
        if getattr(args, "epochs", None) is not None:
            changes["epochs"] = args.epochs
        if getattr(args, "averaging", None) is not None:
            changes["sca_averaging"] = args.averaging
        return replace(cfg, sim=sim, **changes)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config_dict(cfg):
    data = cfg.to_dict()
    data.pop("threads")  # runtime only; outputs do not depend on it
    return data


def write_config(out, cfg):
    out.mkdir(parents=True, exist_ok=True)
    path = out / CONFIG_NAME
    path.write_text(json.dumps(_config_dict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _recordings(args, cfg):
    if args.data:
        return read_recordings_csv(args.data, sample_rate=cfg.sim.sample_rate)
    return build_dataset(cfg.sim, workers=cfg.threads)


def _write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    cfg = load_config(args)
    out = Path(args.out)
    recs = build_dataset(cfg.sim, workers=cfg.threads)
    csv_path, _ = write_dataset(out, recs, cfg.sim)
    write_config(out, cfg)
    spec = cfg.sim.noisy_spec
    print(
        f"wrote {len(recs)} recordings ({sum(len(r) for r in recs)} samples) to {csv_path}\n"
        f"noise: vrw={spec.vrw} bi={spec.bi} bo={spec.bo} at {spec.sample_rate} Hz"
    )
    return EXIT_OK


def _checkpoint_path(directory, name):
    return Path(directory) / f"{name}.npz"


def cmd_train(args):
    cfg = load_config(args)
    out = Path(args.out)
    names = [m for m in cfg.models if m in LEARNING_MODELS]
    if not names:
        raise ConfigError("no learning-based model selected")
    splits = prepare(cfg, _recordings(args, cfg))
    model_dir = out / "models"
    model_dir.mkdir(parents=True, exist_ok=True)
    write_config(out, cfg)
    for name in names:
        model = fit_model(name, cfg, splits)
        model.save(_checkpoint_path(model_dir, name))
        if isinstance(model, RecurrentDenoiser):
            model.loss_curve_.to_csv(model_dir / f"{name}_loss.csv")
        print(f"{name}: saved {_checkpoint_path(model_dir, name)}")
    return EXIT_OK


def _load_or_fit(name, cfg, splits, ckpt_dir):
    if ckpt_dir is not None and name in LEARNING_MODELS:
        path = _checkpoint_path(ckpt_dir, name)
        if path.exists():
            if name == "kNN":
                return KnnDenoiser.load(path, n_jobs=cfg.threads)
            return RecurrentDenoiser.load(path)
    return fit_model(name, cfg, splits)


def _predictions(args, cfg):
    splits = prepare(cfg, _recordings(args, cfg))
    ckpt = args.checkpoints
    if ckpt is None and (Path(args.out) / "models").is_dir():
        ckpt = Path(args.out) / "models"
    preds = {}
    for name in cfg.models:
        preds[name] = _load_or_fit(name, cfg, splits, ckpt).predict(splits.test.noisy)
    return splits, preds


def write_plot_data(path, splits, preds, n_windows, sample_rate):
    """Per-sample columns for plotting the first ``n_windows`` test windows."""
    test = splits.test
    n_windows = min(n_windows, len(test))
    names = list(preds)
    header = ["window", "recording", "roll_deg", "pitch_deg", "t_s"]
    for prefix in ["noisy", "gt"] + names:
        header += [f"{prefix}_{a}" for a in "xyz"]
    dt = 1.0 / sample_rate
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for w in range(n_windows):
            for t in range(test.noisy.shape[1]):
                row = [w, int(test.recording[w]), repr(float(test.angles[w, 0])),
                       repr(float(test.angles[w, 1])), repr(t * dt)]
                row += [repr(float(v)) for v in test.noisy[w, t]]
                row += [repr(float(v)) for v in test.gt[w, t]]
                for n in names:
                    row += [repr(float(v)) for v in preds[n][w, t]]
                writer.writerow(row)
    return path


def cmd_eval(args):
    cfg = load_config(args)
    out = Path(args.out)
    splits, preds = _predictions(args, cfg)
    test = splits.test
    report = compare(list(preds.items()), test.noisy, test.gt)
    sca = evaluate_sca(list(preds.items()), test.noisy, test.angles, cfg.sca_averaging)
    out.mkdir(parents=True, exist_ok=True)
    write_config(out, cfg)
    _write_text(out / "metrics.csv", report.to_csv())
    _write_text(out / "metrics.json", report.to_json())
    _write_text(out / "sca.csv", sca.to_csv())
    _write_text(out / "sca.json", sca.to_json())
    write_plot_data(out / "plot_data.csv", splits, preds, args.plot_windows, cfg.sim.sample_rate)
    print(report.to_csv(), end="")
    return EXIT_OK


def cmd_sca(args):
    cfg = load_config(args)
    out = Path(args.out)
    splits, preds = _predictions(args, cfg)
    test = splits.test
    sca = evaluate_sca(list(preds.items()), test.noisy, test.angles, cfg.sca_averaging)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "sca.csv", sca.to_csv())
    _write_text(out / "sca.json", sca.to_json())
    print(sca.to_csv(), end="")
    return EXIT_OK


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidDataError(f"missing input file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidDataError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None


def summarize(metrics, sca=None):
    """Human-readable summary of a metrics report and an optional SCA report."""
    noisy = metrics["Noisy"]
    lines = ["Denoising summary", "", "model      RMSE       RAE%      gamma%"]
    for row in metrics.rows:
        gamma = suppression_ratio(row.rae, noisy.rae) if noisy.rae > 0 else float("nan")
        lines.append(f"{row.model:<10} {row.rmse:<10.6f} {100 * row.rae:<9.4f} {100 * gamma:.2f}")
    if sca is not None:
        lines += ["", "Coarse alignment (ratio to noisy input)", "model      roll%     pitch%"]
        for row in sca.rows:
            lines.append(f"{row.model:<10} {100 * row.ratio_roll:<9.2f} {100 * row.ratio_pitch:.2f}")
    return "\n".join(lines) + "\n"


def cmd_report(args):
    src = Path(args.input or args.out)
    metrics = MetricsReport.from_dict(_read_json(src / "metrics.json"))
    sca_path = src / "sca.json"
    sca = ScaReport.from_dict(_read_json(sca_path)) if sca_path.exists() else None
    text = summarize(metrics, sca)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "summary.txt", text)
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="accel-denoise", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="random seed for simulation, split and training")
        p.add_argument("--out", default="run", help="output directory (default: ./run)")
        p.add_argument("--models", help=f"comma separated subset of {','.join(ALL_MODELS)}")
        p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
        p.add_argument("--grid-step", type=float, help="orientation grid step in degrees")
        p.add_argument("--window", type=int, help="samples per denoising window")
        p.add_argument("--samples", type=int, help="samples per simulated recording")
        return p

    common(sub.add_parser("simulate", help="write a simulated dataset"))
    for name, helptext in (
        ("train", "fit learning-based models and save checkpoints"),
        ("eval", "score all models on the test split"),
        ("sca", "coarse-alignment accuracy"),
    ):
        p = common(sub.add_parser(name, help=helptext))
        p.add_argument("--data", help="dataset CSV written by 'simulate' (default: simulate in memory)")
        p.add_argument("--epochs", type=int, help="training epochs for recurrent models")
        if name != "train":
            p.add_argument("--checkpoints", help="directory of saved models (default: <out>/models)")
            p.add_argument("--averaging", type=int, help="samples averaged before leveling")
        if name == "eval":
            p.add_argument("--plot-windows", type=int, default=10,
                           help="test windows written to plot_data.csv")
    p = sub.add_parser("report", help="summarize eval outputs")
    p.add_argument("--out", default="run", help="output directory (default: ./run)")
    p.add_argument("--input", help="directory holding metrics.json / sca.json (default: --out)")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "eval": cmd_eval,
    "sca": cmd_sca,
    "report": cmd_report,
}


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DivergenceError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
