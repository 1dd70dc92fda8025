"""Run-report documents: dataset digests, content hashes, atomic writes.

A run report records what a command did: tool version, the command line,
the fully resolved config, a digest of the input data, per-stage outputs,
the seeds, and wall time. The content hash covers everything except timing
fields, so two runs with the same seed hash identically even though their
wall-clock numbers differ.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .adversarial import AdversarialBatch, ExerciseReport
from .dataset import Dataset
from .errors import CorruptReport, ShapeMismatch
from .metrics import as_percentages
from .online.automl import OnlineResult
from .online.prequential import PrequentialCurve
from .optimize import OfflineResult
from .search import SearchTrace

FORMAT = "ztids-report"
VERSION = 1

# execution-infrastructure keys never enter the content hash: wall clock
# and worker count legitimately differ between otherwise identical runs
_VOLATILE_KEYS = ("seconds", "total_seconds", "threads")

_PCT_KEYS = ("accuracy_pct", "precision_pct", "recall_pct", "f1_pct")


# --- dataset digest ---

def dataset_digest(ds: Dataset) -> dict:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.features, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(ds.labels, dtype=np.int64).tobytes())
    h.update("\x1f".join(ds.feature_names).encode("utf-8"))
    return {
        "n_rows": int(ds.n_rows),
        "n_cols": int(ds.n_features),
        "class_ratio": round(float(np.mean(ds.labels == 1)), 6),
        "content_hash": h.hexdigest(),
    }


# --- canonical hashing ---

def _strip_volatile(node):
    if isinstance(node, dict):
        return {k: _strip_volatile(v) for k, v in node.items()
                if k != "content_hash" and k not in _VOLATILE_KEYS}
    if isinstance(node, list):
        return [_strip_volatile(v) for v in node]
    return node


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def content_hash(doc: dict) -> str:
    """Hash of the report minus timing fields and the hash field itself."""
    return hashlib.sha256(
        canonical_json(_strip_volatile(doc)).encode("utf-8")).hexdigest()


def build_report(command: str, config: dict, dataset: Dataset | dict,
                 seeds: dict, stages: dict, total_seconds: float) -> dict:
    digest = dataset if isinstance(dataset, dict) else dataset_digest(dataset)
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "tool_version": __version__,
        "command": command,
        "config": config,
        "dataset": digest,
        "seeds": {k: int(v) for k, v in seeds.items()},
        "stages": stages,
        "total_seconds": round(float(total_seconds), 3),
    }
    doc["content_hash"] = content_hash(doc)
    return doc


def read_report(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptReport(f"{path}: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CorruptReport(f"{path}: not a run-report document")
    return doc


def schema_path() -> Path:
    return Path(__file__).parent / "schemas" / "run_report.schema.json"


def load_schema() -> dict:
    return json.loads(schema_path().read_text(encoding="utf-8"))


# --- atomic file output ---

def atomic_write_bytes(path, data: bytes) -> None:
    """Write to a temp file in the target directory, then rename over."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --- stage serialization ---

def trace_summary(trace: SearchTrace) -> dict:
    return {
        "method": trace.method,
        "n_evaluations": len(trace.evaluations),
        "best_so_far": [round(float(v), 6) for v in trace.best_so_far],
    }


def _mean_block(blocks: list[dict]) -> dict:
    out = {k: round(float(np.mean([b[k] for b in blocks])), 3) for k in _PCT_KEYS}
    out["confusion"] = {
        k: int(sum(b["confusion"][k] for b in blocks))
        for k in ("tp", "fp", "tn", "fn")}
    return out


def curve_summary(curve: PrequentialCurve) -> dict:
    block = as_percentages(curve.scores)
    block.update({
        "n_samples": curve.n_samples,
        "window": curve.window,
        "n_drift_events": len(curve.drift_indices),
        "seconds": round(float(curve.seconds), 3),
    })
    return block


def offline_stages(result: OfflineResult) -> dict:
    folds = [as_percentages(s) for s in result.fold_scores]
    return {
        "preprocess": result.preprocess.as_dict(),
        "features": result.features.as_dict(),
        "model_selection": {
            "candidates": [
                {"kind": r["kind"], "params": r["params"],
                 "objective": round(float(r["objective"]), 6)}
                for r in result.stage1],
            "winner_kind": result.winner_kind,
        },
        "tuning": {
            "best_params": result.best_params,
            "default_objective": round(float(result.default_objective), 6),
            "tuned_objective": round(float(result.tuned_objective), 6),
            "candidates": [
                {"kind": r["kind"], "best_params": r["best_params"],
                 "default_objective": round(float(r["default_objective"]), 6),
                 "tuned_objective": round(float(r["tuned_objective"]), 6)}
                for r in result.stage2],
            "search": trace_summary(result.trace),
        },
        "cv_metrics": {"folds": folds, "mean": _mean_block(folds)},
        "seconds": {k: round(float(v), 3) for k, v in result.seconds.items()},
    }


def online_stages(result: OnlineResult, curves_csv: str | None = None) -> dict:
    stages = {
        "preprocess": result.preprocess.as_dict() if result.preprocess else None,
        "model_selection": {
            "candidates": [
                {"kind": r["kind"], "params": r["params"],
                 "accuracy_pct": round(100.0 * float(r["accuracy"]), 3)}
                for r in result.stage1],
            "winner_kind": result.winner_kind,
        },
        "tuning": {
            kind: {"params": t["params"],
                   "accuracy_pct": round(100.0 * float(t["accuracy"]), 3),
                   "default_accuracy_pct":
                       round(100.0 * float(t["default_accuracy"]), 3),
                   "search": trace_summary(t["trace"])}
            for kind, t in result.tuned.items()},
        "best_params": result.best_params,
        "curves": {label: curve_summary(c) for label, c in result.curves.items()},
        "seconds": {k: round(float(v), 3) for k, v in result.seconds.items()},
    }
    if curves_csv is not None:
        stages["curves_csv"] = str(curves_csv)
    return stages


def exercise_stages(xrep: ExerciseReport) -> dict:
    return {"exercise": xrep.as_dict()}


# --- CSV outputs ---

def write_curve_csv(path, curve: PrequentialCurve) -> None:
    """Per-sample curve: index, running_acc, windowed_acc, drift_flag."""
    drifts = set(curve.drift_indices)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "running_acc", "windowed_acc", "drift_flag"])
    for i in range(curve.n_samples):
        w.writerow([i, f"{curve.running_accuracy[i]:.6f}",
                    f"{curve.windowed_accuracy[i]:.6f}",
                    1 if i in drifts else 0])
    atomic_write_text(path, buf.getvalue())


def write_batch_csv(path, batch: AdversarialBatch,
                    feature_names: list[str] | None = None) -> None:
    """Perturbed rows with true_label, is_adversarial and (DTA) flipped."""
    n, m = batch.adv_rows.shape
    names = feature_names or [f"f{j}" for j in range(m)]
    if len(names) != m:
        raise ShapeMismatch(f"{len(names)} names for {m} columns")
    header = list(names) + ["true_label", "is_adversarial"]
    if batch.flipped is not None:
        header.append("flipped")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for i in range(n):
        row = [repr(float(v)) for v in batch.adv_rows[i]]
        row.append(int(batch.true_labels[i]))
        row.append(int(batch.is_adversarial[i]))
        if batch.flipped is not None:
            row.append(int(batch.flipped[i]))
        w.writerow(row)
    atomic_write_text(path, buf.getvalue())
