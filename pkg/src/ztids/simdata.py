"""Synthetic flow-style fixtures for demos and tests.

No packet capture corpus ships with the package, so these generators produce
tables with the same failure modes real flow exports have: Infinity and NaN
cells, negative duration glitches, a categorical protocol column, class
imbalance, and redundant engineered columns. The class geometry is tuned so
the classes are cleanly learnable yet sit close enough to the decision
boundary that small adversarial perturbations (around 0.1 in normalized
units) flip most rows.

Run ``python -m ztids.simdata --out-dir DIR`` to write demo CSVs.
"""
from __future__ import annotations

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from ._rand import child_rng
from .dataset import Dataset

PROTOCOLS = ("TCP", "UDP", "ICMP")

_SIG_BENIGN = 0.42
_SIG_ATTACK = 0.58
# one width per informative column: a strength ladder with evenly spaced
# impurity gains, so any two informative columns rank unambiguously under
# gain comparisons while even the widest still separates the classes well
_SIG_STDS = (0.026, 0.0344, 0.0397, 0.0445, 0.0492, 0.0542)
_WIDE_FRACTION = 0.03


def make_flows(n_rows: int = 2400, attack_fraction: float = 0.35,
               n_informative: int = 6, n_noise: int = 6, n_redundant: int = 3,
               outlier_rate: float = 0.0, artifact_rate: float = 0.004,
               seed: int = 7) -> Dataset:
    """In-memory flow table; equals load_csv(write_flows_csv(...)) exactly.

    Artifact cells (Infinity, NaN tokens, negative durations) appear as NaN
    here because that is what loading makes of them.
    """
    rng = child_rng(seed, "flows")
    n_attack = int(round(n_rows * attack_fraction))
    labels = np.zeros(n_rows, dtype=np.int64)
    labels[:n_attack] = 1
    order = rng.permutation(n_rows)
    labels = labels[order]

    cols: list[np.ndarray] = []
    names: list[str] = []
    kinds: list[str] = []

    # informative columns: tight class clusters in a latent [0, 1] scale with
    # a thin uniform background so min-max fitting recovers that scale
    lat = np.empty((n_rows, n_informative))
    for j in range(n_informative):
        mu = np.where(labels == 1, _SIG_ATTACK, _SIG_BENIGN)
        vals = rng.normal(mu, _SIG_STDS[j % len(_SIG_STDS)])
        wide = rng.random(n_rows) < _WIDE_FRACTION
        vals[wide] = rng.random(int(wide.sum()))
        lat[:, j] = np.clip(vals, 0.0, 1.0)
    for j in range(n_informative):
        lo = float(rng.uniform(0, 800))
        width = float(rng.uniform(200, 4000))
        cols.append(lo + lat[:, j] * width)
        names.append(f"Fwd Segment Size {j}" if j % 2 else f"Packet Length Mean {j}")
        kinds.append("numeric")

    # noise columns; the first two carry the classic export glitches
    for j in range(n_noise):
        lo = float(rng.uniform(0, 500))
        width = float(rng.uniform(100, 9000))
        col = lo + rng.random(n_rows) * width
        if outlier_rate > 0 and j >= n_noise - 2:
            mask = rng.random(n_rows) < outlier_rate
            col[mask] = lo + width * (50.0 + 100.0 * rng.random(int(mask.sum())))
        if j == 0:
            names.append("Flow Duration")
            neg = rng.random(n_rows) < artifact_rate
            col[neg] = np.nan
        elif j == 1:
            names.append("Flow Bytes/s")
            inf = rng.random(n_rows) < artifact_rate
            col[inf] = np.nan
        else:
            names.append(f"Idle Mean {j}")
            if j == 2 and artifact_rate > 0:
                miss = rng.random(n_rows) < artifact_rate
                col[miss] = np.nan
        cols.append(col)
        kinds.append("numeric")

    # redundant columns: affine copies of the weakest informative ones, so a
    # copy and its source never sit jointly at the top of a gain ranking
    for j in range(n_redundant):
        src = n_informative - 1 - (j % n_informative)
        a = float(rng.uniform(1.5, 3.0))
        b = float(rng.uniform(-100, 100))
        cols.append(a * cols[src] + b)
        names.append(f"Subflow Fwd Bytes {j}")
        kinds.append("numeric")

    proto_p = np.where(labels[:, None] == 1,
                       np.array([0.55, 0.30, 0.15])[None, :],
                       np.array([0.70, 0.25, 0.05])[None, :])
    picks = (rng.random(n_rows)[:, None] > np.cumsum(proto_p, axis=1)).sum(axis=1)
    proto = np.array([PROTOCOLS[i] for i in picks], dtype=object)
    cols.append(np.full(n_rows, np.nan))
    names.append("Protocol")
    kinds.append("categorical")

    mat = np.column_stack(cols)
    return Dataset(mat, labels, names, kinds,
                   raw_categorical={len(names) - 1: proto})


def write_flows_csv(path, ds: Dataset | None = None, **kw) -> Path:
    """Write a flow table as CSV with raw artifact tokens re-inserted."""
    ds = ds if ds is not None else make_flows(**kw)
    path = Path(path)
    dur_col = ds.feature_names.index("Flow Duration") if "Flow Duration" in ds.feature_names else -1
    inf_col = ds.feature_names.index("Flow Bytes/s") if "Flow Bytes/s" in ds.feature_names else -1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.feature_names) + ["Label"])
        raw = ds.raw_categorical or {}
        for i in range(ds.n_rows):
            row = []
            for j in range(ds.n_features):
                if j in raw:
                    row.append(str(raw[j][i]))
                    continue
                v = ds.features[i, j]
                if math.isnan(v):
                    if j == inf_col:
                        row.append("Infinity")
                    elif j == dur_col:
                        row.append("-1")
                    else:
                        row.append("NaN")
                else:
                    row.append(repr(float(v)))
            row.append("ATTACK" if ds.labels[i] == 1 else "BENIGN")
            w.writerow(row)
    return path


def make_drift_stream(n_rows: int = 20000, n_features: int = 10,
                      drift_at: int | None = None, positive_rate: float = 0.45,
                      seed: int = 11) -> tuple[Dataset, int]:
    """Abrupt-drift stream: at drift_at the feature-label relation inverts.

    Three features carry the concept at staggered strengths (f0 strong, f1
    medium, f2 weak) so incremental trees never stall on gain ties. At the
    change point each signal flips sign, and f0's clusters also displace
    from +-1 out to -+3, stranding thresholds learned earlier. Remaining
    features are uniform noise. Replay with stream().
    """
    drift_at = n_rows // 2 if drift_at is None else int(drift_at)
    rng = child_rng(seed, "drift")
    labels = (rng.random(n_rows) < positive_rate).astype(np.int64)
    X = rng.random((n_rows, n_features))
    pre = np.arange(n_rows) < drift_at
    side = np.where(labels == 1, 1.0, -1.0)
    plan = ((1.0, 3.0, 0.35), (1.0, 1.0, 1.0), (1.0, 1.0, 1.6))
    for j, (amp_pre, amp_post, sigma) in enumerate(plan):
        center = np.where(pre, amp_pre * side, -amp_post * side)
        X[:, j] = center + rng.normal(0.0, sigma, size=n_rows)
    ds = Dataset(X, labels, [f"f{j}" for j in range(n_features)],
                 ["numeric"] * n_features, None)
    return ds, drift_at


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="write demo CSV fixtures")
    ap.add_argument("--out-dir", default=".", help="directory for the CSVs")
    ap.add_argument("--rows", type=int, default=2400)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    flows = out / "flows.csv"
    write_flows_csv(flows, n_rows=args.rows, seed=args.seed)
    stream_ds, drift_at = make_drift_stream(seed=args.seed)
    stream_csv = out / "drift_stream.csv"
    with open(stream_csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(stream_ds.feature_names) + ["Label"])
        for i in range(stream_ds.n_rows):
            w.writerow([repr(float(v)) for v in stream_ds.features[i]]
                       + ["ATTACK" if stream_ds.labels[i] else "BENIGN"])
    print(f"wrote {flows} ({args.rows} rows) and {stream_csv} "
          f"(20000 rows, concept change at {drift_at})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
