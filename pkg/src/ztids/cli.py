"""Command-line surface.

Subcommands: automl-offline, automl-online, attack, exercise, report.
Every command seeds all randomness from --seed, echoes its resolved config
into a run report, and writes files atomically. Exit codes: 0 success,
2 usage error (usage text on stderr), 1 runtime failure. The ZTIDS_LOG
environment variable sets the log level (DEBUG/INFO/WARNING/ERROR).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from . import config as cfg
from . import report as rpt
from ._rand import child_rng
from .adversarial import attack as run_attack
from .adversarial import run_defense_exercise
from .autodp import PreprocessReport, apply_preprocessor
from .dataset import DEFAULT_BENIGN, Dataset, load_csv
from .errors import CorruptReport, UsageError, ZtidsError
from .metrics import as_percentages, score
from .models import CandidateConfig, fit_model
from .models.io import deserialize, serialize
from .online.automl import run_automl_online
from .optimize import run_automl_offline

logger = logging.getLogger(__name__)

_PCT_KEYS = ("accuracy_pct", "precision_pct", "recall_pct", "f1_pct")


def _setup_logging() -> None:
    name = os.environ.get("ZTIDS_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _require_file(path_str: str, what: str) -> Path:
    path = Path(path_str)
    if not path.is_file():
        raise UsageError(f"{what} not found: {path}")
    return path


def _load_data(args) -> Dataset:
    path = _require_file(args.data, "data file")
    benign = (tuple(s.strip() for s in args.benign.split(","))
              if args.benign else DEFAULT_BENIGN)
    try:
        return load_csv(path, label_column=args.label_col, benign_labels=benign)
    except ZtidsError as e:
        raise UsageError(f"cannot load {path}: {e}") from None


def _file_cfg(args) -> dict:
    if getattr(args, "config", None):
        _require_file(args.config, "config file")
        return cfg.load_toml(args.config)
    return {}


def _io_echo(args, *keys) -> dict:
    out = {"data": str(args.data), "label_col": args.label_col,
           "benign": args.benign or ",".join(DEFAULT_BENIGN)}
    for k in keys:
        out[k] = getattr(args, k, None) and str(getattr(args, k))
    return out


# --- commands ---

def cmd_automl_offline(args) -> int:
    t0 = time.perf_counter()
    ds = _load_data(args)
    st = cfg.offline_settings(_file_cfg(args), seed=args.seed, threads=args.threads)
    result = run_automl_offline(ds, st)
    resolved = {"offline": dataclasses.asdict(st),
                "io": _io_echo(args, "out", "model_out")}
    doc = rpt.build_report(command="automl-offline", config=resolved, dataset=ds,
                           seeds={"root": st.seed},
                           stages=rpt.offline_stages(result),
                           total_seconds=time.perf_counter() - t0)
    rpt.write_json(args.out, doc)
    rpt.atomic_write_bytes(args.model_out, serialize(result.model))
    mean_f1 = doc["stages"]["cv_metrics"]["mean"]["f1_pct"]
    print(f"winner {result.winner_kind}: cv F1 {mean_f1:.3f}% "
          f"(objective {result.tuned_objective:.5f}, "
          f"default {result.default_objective:.5f})")
    print(f"wrote {args.out} and {args.model_out}")
    return 0


def cmd_automl_online(args) -> int:
    t0 = time.perf_counter()
    ds = _load_data(args)
    st = cfg.online_settings(_file_cfg(args), seed=args.seed,
                             threads=args.threads, window=args.window,
                             tune_all=args.tune_all)
    result = run_automl_online(ds, st)
    report_out = args.report_out or str(Path(args.out).parent / "report.json")
    winner_curve = result.curves[f"{result.winner_kind}-tuned"]
    rpt.write_curve_csv(args.out, winner_curve)
    resolved = {"online": dataclasses.asdict(st),
                "io": _io_echo(args, "out", "report_out")}
    doc = rpt.build_report(command="automl-online", config=resolved, dataset=ds,
                           seeds={"root": st.seed},
                           stages=rpt.online_stages(result, curves_csv=args.out),
                           total_seconds=time.perf_counter() - t0)
    rpt.write_json(report_out, doc)
    acc = doc["stages"]["curves"][f"{result.winner_kind}-tuned"]["accuracy_pct"]
    print(f"winner {result.winner_kind}: prequential accuracy {acc:.3f}% "
          f"over {winner_curve.n_samples} samples, "
          f"{len(winner_curve.drift_indices)} drift events")
    print(f"wrote {args.out} and {report_out}")
    return 0


def _transform_via_report(ds: Dataset, report_path: str) -> Dataset:
    doc = rpt.read_report(report_path)
    stages = doc.get("stages", {})
    try:
        kept = [int(j) for j in stages["features"]["kept"]]
        prep = PreprocessReport.from_dict(stages["preprocess"])
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptReport(
            f"{report_path} lacks preprocess/features stages: {e}") from None
    return apply_preprocessor(prep, ds.select_columns(kept))


def cmd_attack(args) -> int:
    t0 = time.perf_counter()
    ds = _load_data(args)
    model_path = _require_file(args.model, "model file")
    model = deserialize(model_path.read_bytes())
    if args.report:
        _require_file(args.report, "report file")
        table = _transform_via_report(ds, args.report)
    else:
        table = ds
    if table.n_features != model.n_features_in:
        raise UsageError(
            f"data has {table.n_features} features but the model expects "
            f"{model.n_features_in}; pass --report from the training run "
            f"to apply its transform")
    params = cfg.attack_params(args.attack, _file_cfg(args), eps=args.eps,
                               alpha=args.alpha, iters=args.iters,
                               offset=args.offset)
    name = args.attack.upper()
    seed = args.seed if args.seed is not None else 0
    surrogate = None
    if name in ("FGSM", "BIM"):
        surrogate = fit_model(
            CandidateConfig("MLP", {"learning_rate": 0.05, "hidden_units": 64}),
            table.features, table.labels,
            seed=int(child_rng(seed, "surrogate").integers(2 ** 31)))
    batch = run_attack(name, rows=table.features, labels=table.labels,
                       params=params, surrogate=surrogate, victim=model)
    baseline = score(table.labels, model.predict(table.features))
    attacked = score(batch.true_labels, model.predict(batch.adv_rows))
    rpt.write_batch_csv(args.out, batch, feature_names=table.feature_names)
    metrics_out = args.metrics_out or str(Path(args.out).parent / "metrics.json")
    stage = {
        "name": name,
        "params": params,
        "batch_csv": str(args.out),
        "n_rows": batch.n_rows,
        "n_perturbed": int(batch.is_adversarial.sum()),
        "max_norm": float(batch.max_norm()),
        "baseline": as_percentages(baseline),
        "under_attack": as_percentages(attacked),
        "f1_drop_pct": round(100.0 * (baseline.f1 - attacked.f1), 3),
    }
    if batch.flipped is not None:
        stage["n_flipped"] = int(batch.flipped.sum())
    resolved = {"attack": {"name": name, "params": params},
                "io": _io_echo(args, "model", "report", "out", "metrics_out")}
    doc = rpt.build_report(command="attack", config=resolved, dataset=ds,
                           seeds={"root": seed}, stages={"attack": stage},
                           total_seconds=time.perf_counter() - t0)
    rpt.write_json(metrics_out, doc)
    print(f"{name}: F1 {stage['baseline']['f1_pct']:.3f}% -> "
          f"{stage['under_attack']['f1_pct']:.3f}% "
          f"on {batch.n_rows} rows ({stage['n_perturbed']} perturbed)")
    print(f"wrote {args.out} and {metrics_out}")
    return 0


def cmd_exercise(args) -> int:
    t0 = time.perf_counter()
    ds = _load_data(args)
    file_cfg = _file_cfg(args)
    settings, seed = cfg.exercise_settings(file_cfg, seed=args.seed,
                                           threads=args.threads)
    params = cfg.attack_params(args.attack, file_cfg, eps=args.eps,
                               alpha=args.alpha, iters=args.iters,
                               offset=args.offset)
    xrep = run_defense_exercise(ds, args.attack, params=params, seed=seed,
                                settings=settings)
    resolved = {"exercise": dataclasses.asdict(settings),
                "attack": {"name": xrep.attack, "params": params},
                "io": _io_echo(args, "out")}
    doc = rpt.build_report(command="exercise", config=resolved, dataset=ds,
                           seeds={"root": seed},
                           stages=rpt.exercise_stages(xrep),
                           total_seconds=time.perf_counter() - t0)
    rpt.write_json(args.out, doc)
    block = xrep.as_dict()
    print(f"{xrep.attack} vs {xrep.ids_kind}: baseline F1 "
          f"{block['baseline_metrics']['f1_pct']:.3f}%, under attack "
          f"{block['under_attack_metrics']['f1_pct']:.3f}%, detector "
          f"{block['detector_metrics']['f1_pct']:.3f}%, recovered "
          f"{block['recovered_metrics']['f1_pct']:.3f}%")
    print(f"wrote {args.out}")
    return 0


def _collect_blocks(node, path: list[str], out: list) -> None:
    if isinstance(node, dict):
        if all(k in node for k in _PCT_KEYS):
            out.append((" / ".join(path) or "overall", node))
            return
        for k, v in node.items():
            _collect_blocks(v, path + [str(k)], out)
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _collect_blocks(v, path + [str(i)], out)


def render_table(doc: dict) -> str:
    """Rows of stage metrics, columns Accuracy/Precision/Recall/F1/Time."""
    rows = []
    _collect_blocks(doc.get("stages", {}), [], rows)
    header = ["Stage", "Accuracy", "Precision", "Recall", "F1", "Time (s)"]
    table = [header]
    for label, block in rows:
        table.append([
            label,
            f"{block['accuracy_pct']:.3f}",
            f"{block['precision_pct']:.3f}",
            f"{block['recall_pct']:.3f}",
            f"{block['f1_pct']:.3f}",
            f"{block['seconds']:.3f}" if "seconds" in block else "-",
        ])
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    lines = [
        f"{doc.get('command', '?')} report, ztids {doc.get('tool_version', '?')}",
        f"dataset: {doc['dataset']['n_rows']} rows x {doc['dataset']['n_cols']} "
        f"cols, positive ratio {doc['dataset']['class_ratio']}, "
        f"total {doc.get('total_seconds', 0)} s",
        "",
    ]
    for i, row in enumerate(table):
        cells = [row[0].ljust(widths[0])]
        cells += [row[c].rjust(widths[c]) for c in range(1, len(header))]
        lines.append("  ".join(cells).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    if not rows:
        lines.append("(no metric blocks in this report)")
    return "\n".join(lines)


def cmd_report(args) -> int:
    _require_file(args.in_path, "report file")
    doc = rpt.read_report(args.in_path)
    print(render_table(doc))
    return 0


# --- parser ---

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--data", required=True,
                    help="input flow CSV (header row required)")
    sp.add_argument("--label-col", default="Label",
                    help="name of the label column (default: Label)")
    sp.add_argument("--benign", default=None,
                    help="comma-separated label values mapped to class 0")
    sp.add_argument("--seed", type=int, default=None,
                    help="root seed for all randomness (default: 0)")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker pool size (default: logical cores)")
    sp.add_argument("--config", default=None,
                    help="TOML config file; flags override it")


def _add_attack_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--attack", required=True, choices=["dta", "fgsm", "bim"],
                    help="perturbation to apply")
    sp.add_argument("--eps", type=float, default=None,
                    help="max-norm budget for fgsm/bim")
    sp.add_argument("--alpha", type=float, default=None,
                    help="per-step size for bim")
    sp.add_argument("--iters", type=int, default=None,
                    help="step count for bim")
    sp.add_argument("--offset", type=float, default=None,
                    help="distance past a split threshold for dta")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ztids",
        description="Self-tuning intrusion detection: offline/online model "
                    "search, evasion attacks, and the detect-filter-retrain "
                    "drill on tabular flow data.")
    p.add_argument("--version", action="version", version=f"ztids {__version__}")
    subs = p.add_subparsers(dest="command", required=True, metavar="command")

    sp = subs.add_parser("automl-offline",
                         help="select, tune and fit a batch model")
    _add_common(sp)
    sp.add_argument("--out", default="report.json", help="run report path")
    sp.add_argument("--model-out", default="model.json",
                    help="fitted model path")
    sp.set_defaults(func=cmd_automl_offline, _parser=sp)

    sp = subs.add_parser("automl-online",
                         help="select and tune a streaming model prequentially")
    _add_common(sp)
    sp.add_argument("--window", type=int, default=None,
                    help="sliding accuracy window (default: 500)")
    sp.add_argument("--tune-all", action="store_true", default=None,
                    help="tune every candidate, not just the stage-1 winner")
    sp.add_argument("--out", default="curves.csv",
                    help="winner prequential curve CSV")
    sp.add_argument("--report-out", default=None,
                    help="run report path (default: report.json beside --out)")
    sp.set_defaults(func=cmd_automl_online, _parser=sp)

    sp = subs.add_parser("attack",
                         help="perturb rows against a saved model")
    _add_common(sp)
    sp.add_argument("--model", required=True, help="victim model JSON")
    sp.add_argument("--report", default=None,
                    help="training run report supplying the feature transform")
    _add_attack_flags(sp)
    sp.add_argument("--out", default="adversarial.csv",
                    help="perturbed batch CSV")
    sp.add_argument("--metrics-out", default=None,
                    help="metrics report path (default: metrics.json beside --out)")
    sp.set_defaults(func=cmd_attack, _parser=sp)

    sp = subs.add_parser("exercise",
                         help="full drill: tune, attack, detect, filter, retrain")
    _add_common(sp)
    _add_attack_flags(sp)
    sp.add_argument("--out", default="exercise.json", help="run report path")
    sp.set_defaults(func=cmd_exercise, _parser=sp)

    sp = subs.add_parser("report", help="render a run report as a table")
    sp.add_argument("--in", dest="in_path", required=True,
                    help="report JSON written by another command")
    sp.set_defaults(func=cmd_report, _parser=sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse already printed usage/help; normalize to an int code
        return int(e.code or 0)
    _setup_logging()
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        args._parser.print_usage(sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 1
    except Exception as e:
        logger.debug("unhandled failure", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
