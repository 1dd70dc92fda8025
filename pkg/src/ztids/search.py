"""Hyperparameter search: particle swarm and random search.

Positions live in a box in R^d, one axis per hyperparameter. Integer axes
decode by rounding (floor(x + 0.5)), categorical axes index their option
list. Both searches guarantee the exact optimum on small fully-discrete
spaces: PSO enumerates the grid when it fits the evaluation budget, random
search samples a permutation (no replacement) when n_trials covers the grid.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from ._rand import child_rng
from .errors import EmptySpace

logger = logging.getLogger(__name__)

INERTIA = 0.729
COGNITIVE = 1.49445
SOCIAL = 1.49445

_EDGE_EPS = 1e-9
_GRID_CAP = 1024


@dataclass(frozen=True)
class Dim:
    name: str
    kind: str  # "continuous" | "integer" | "categorical"
    lo: float = 0.0
    hi: float = 0.0
    options: tuple = ()
    open_lo: bool = False
    open_hi: bool = False


@dataclass
class HyperparameterSpace:
    dims: list[Dim]

    def validate(self) -> None:
        if not self.dims:
            raise EmptySpace("no dimensions")
        seen = set()
        for d in self.dims:
            if d.name in seen:
                raise EmptySpace(f"duplicate dimension {d.name!r}")
            seen.add(d.name)
            if d.kind == "categorical":
                if not d.options:
                    raise EmptySpace(f"{d.name}: no options")
            elif d.kind in ("continuous", "integer"):
                if not d.lo < d.hi:
                    raise EmptySpace(f"{d.name}: lo must be < hi")
            else:
                raise EmptySpace(f"{d.name}: unknown kind {d.kind!r}")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = [], []
        for d in self.dims:
            if d.kind == "categorical":
                lo.append(0.0)
                hi.append(float(len(d.options) - 1))
            else:
                lo.append(float(d.lo))
                hi.append(float(d.hi))
        return np.array(lo), np.array(hi)

    def decode(self, x: np.ndarray) -> dict:
        params = {}
        for j, d in enumerate(self.dims):
            v = float(x[j])
            if d.kind == "categorical":
                i = int(np.floor(v + 0.5))
                params[d.name] = d.options[min(max(i, 0), len(d.options) - 1)]
            elif d.kind == "integer":
                i = int(np.floor(v + 0.5))
                params[d.name] = min(max(i, int(d.lo)), int(d.hi))
            else:
                v = min(max(v, d.lo), d.hi)
                if d.open_lo and v <= d.lo:
                    v = d.lo + _EDGE_EPS
                if d.open_hi and v >= d.hi:
                    v = d.hi - _EDGE_EPS
                params[d.name] = v
        return params

    def encode(self, params: dict) -> np.ndarray:
        x = np.empty(len(self.dims))
        for j, d in enumerate(self.dims):
            v = params[d.name]
            x[j] = d.options.index(v) if d.kind == "categorical" else float(v)
        return x

    def contains(self, params: dict) -> bool:
        for d in self.dims:
            if d.name not in params:
                return False
            v = params[d.name]
            if d.kind == "categorical":
                if v not in d.options:
                    return False
            elif d.kind == "integer":
                if not (isinstance(v, (int, np.integer)) and d.lo <= v <= d.hi):
                    return False
            else:
                if not (d.lo <= v <= d.hi):
                    return False
                if d.open_lo and v == d.lo:
                    return False
                if d.open_hi and v == d.hi:
                    return False
        return True

    def grid_size(self) -> int | None:
        """Number of distinct configs, or None if any axis is continuous."""
        size = 1
        for d in self.dims:
            if d.kind == "continuous":
                return None
            size *= len(d.options) if d.kind == "categorical" else int(d.hi) - int(d.lo) + 1
        return size

    def grid(self) -> list[dict]:
        axes = []
        for d in self.dims:
            if d.kind == "categorical":
                axes.append(list(d.options))
            else:
                axes.append(list(range(int(d.lo), int(d.hi) + 1)))
        return [dict(zip([d.name for d in self.dims], combo))
                for combo in itertools.product(*axes)]


@dataclass
class Evaluation:
    params: dict
    value: float
    fold_scores: list[float] = field(default_factory=list)
    seconds: float = 0.0


@dataclass
class SearchTrace:
    method: str
    evaluations: list[Evaluation] = field(default_factory=list)
    best_so_far: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "evaluations": [
                {"params": e.params, "value": e.value,
                 "fold_scores": list(e.fold_scores), "seconds": e.seconds}
                for e in self.evaluations],
            "best_so_far": list(self.best_so_far),
        }


@dataclass
class SearchResult:
    best_params: dict
    best_value: float
    trace: SearchTrace


def _call(objective, params: dict) -> Evaluation:
    t0 = time.perf_counter()
    out = objective(params)
    dt = time.perf_counter() - t0
    if isinstance(out, tuple):
        value, folds = out
        return Evaluation(params=params, value=float(value),
                          fold_scores=[float(f) for f in folds], seconds=dt)
    return Evaluation(params=params, value=float(out), seconds=dt)


def _evaluate_batch(objective, batch: list[dict], threads: int) -> list[Evaluation]:
    return ordered_map(lambda p: _call(objective, p), batch, threads)


def _exhaustive(objective, space: HyperparameterSpace, chunk: int,
                threads: int, method: str) -> SearchResult:
    trace = SearchTrace(method=method)
    configs = space.grid()
    best = None
    for start in range(0, len(configs), chunk):
        for ev in _evaluate_batch(objective, configs[start:start + chunk], threads):
            trace.evaluations.append(ev)
            if best is None or ev.value < best.value:
                best = ev
        trace.best_so_far.append(best.value)
    return SearchResult(best_params=dict(best.params), best_value=best.value,
                        trace=trace)


def pso_minimize(objective, space: HyperparameterSpace, swarm: int = 20,
                 iters: int = 30, seed: int = 0, warm_start: dict | None = None,
                 threads: int = 1) -> SearchResult:
    """Global-best PSO; evaluation budget is exactly swarm * iters.

    Particle 0 starts at warm_start (or the box midpoint), the rest uniformly
    at random. Personal/global bests update only after a whole iteration has
    been scored, so threading cannot change the result. When every axis is
    discrete and the full grid fits the budget, the grid is enumerated
    instead, which makes the returned optimum exact.
    """
    space.validate()
    if swarm < 2:
        raise ValueError("swarm must be >= 2")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    size = space.grid_size()
    if size is not None and size <= min(swarm * iters, _GRID_CAP):
        return _exhaustive(objective, space, swarm, threads, "pso-exhaustive")

    lo, hi = space.bounds()
    ndim = len(space.dims)
    rng = child_rng(seed, "pso")
    X = lo + rng.random((swarm, ndim)) * (hi - lo)
    X[0] = space.encode(warm_start) if warm_start is not None else (lo + hi) / 2.0
    V = np.zeros_like(X)

    trace = SearchTrace(method="pso")
    pbest_x = X.copy()
    pbest_v = np.full(swarm, np.inf)
    gbest_x = X[0].copy()
    gbest_v = np.inf

    for _ in range(iters):
        evals = _evaluate_batch(objective, [space.decode(x) for x in X], threads)
        for i, ev in enumerate(evals):
            trace.evaluations.append(ev)
            if ev.value < pbest_v[i]:
                pbest_v[i] = ev.value
                pbest_x[i] = X[i]
        i_best = int(np.argmin(pbest_v))
        if pbest_v[i_best] < gbest_v:
            gbest_v = float(pbest_v[i_best])
            gbest_x = pbest_x[i_best].copy()
        trace.best_so_far.append(gbest_v)

        r1 = rng.random((swarm, ndim))
        r2 = rng.random((swarm, ndim))
        V = INERTIA * V + COGNITIVE * r1 * (pbest_x - X) + SOCIAL * r2 * (gbest_x - X)
        X = np.clip(X + V, lo, hi)

    return SearchResult(best_params=space.decode(gbest_x), best_value=gbest_v,
                        trace=trace)


def random_search(objective, space: HyperparameterSpace, n_trials: int = 60,
                  seed: int = 0, threads: int = 1) -> SearchResult:
    """Uniform random candidates; exact on small discrete spaces.

    When every axis is discrete and n_trials covers the grid, candidates are
    a seeded permutation of the whole grid (no replacement), so the best
    returned value is the true optimum.
    """
    space.validate()
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rng = child_rng(seed, "random-search")
    size = space.grid_size()
    if size is not None and n_trials >= size and size <= _GRID_CAP:
        configs = space.grid()
        order = rng.permutation(size)
        candidates = [configs[i] for i in order]
        method = "random-exhaustive"
    else:
        lo, hi = space.bounds()
        candidates = []
        for _ in range(n_trials):
            x = np.empty(len(space.dims))
            for j, d in enumerate(space.dims):
                if d.kind == "continuous":
                    x[j] = d.lo + rng.random() * (d.hi - d.lo)
                else:
                    x[j] = rng.integers(int(lo[j]), int(hi[j]) + 1)
            candidates.append(space.decode(x))
        method = "random"

    trace = SearchTrace(method=method)
    best = None
    for start in range(0, len(candidates), max(threads, 1)):
        for ev in _evaluate_batch(objective, candidates[start:start + max(threads, 1)],
                                  threads):
            trace.evaluations.append(ev)
            if best is None or ev.value < best.value:
                best = ev
            trace.best_so_far.append(best.value)
    return SearchResult(best_params=dict(best.params), best_value=best.value,
                        trace=trace)
