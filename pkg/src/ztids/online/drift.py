"""Concept drift detectors over a stream of real values or error indicators.

Adwin keeps an exponential-histogram window and drops the older sub-window
whenever two adjacent sub-windows have means that differ beyond a
Bernstein-style bound; it signals drift only. Ddm tracks the error rate's
p + s minimum and signals warning at 2 sigma and drift at 3 sigma above it.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass


@dataclass(frozen=True)
class DriftSignal:
    state: str  # "none" | "warning" | "drift"
    at_index: int | None = None

    @property
    def is_drift(self) -> bool:
        return self.state == "drift"

    @property
    def is_warning(self) -> bool:
        return self.state == "warning"


_NONE = DriftSignal("none")


class Adwin:
    """Adaptive windowing with exponential buckets (max 5 per level)."""

    MAX_BUCKETS = 5

    def __init__(self, delta: float = 0.002, min_sub_window: int = 5,
                 check_interval: int = 1) -> None:
        if not 0 < delta < 1:
            raise ValueError("delta must be in (0, 1)")
        self.delta = delta
        self.min_sub_window = int(min_sub_window)
        self.check_interval = max(1, int(check_interval))
        # levels[l] is a deque of (sum, var) buckets, each holding 2**l values
        self.levels: list[deque] = [deque()]
        self.width = 0
        self.total = 0.0
        self.variance = 0.0
        self.n_seen = 0
        # direction of the last cut: True when the kept (newer) side's mean
        # exceeded the dropped (older) side's, i.e. the metric got worse
        self.cut_worse = False

    @property
    def mean(self) -> float:
        return self.total / self.width if self.width else 0.0

    def update(self, value: float) -> DriftSignal:
        value = float(value)
        self.n_seen += 1
        if self.width > 0:
            mu = self.total / self.width
            self.variance += (value - mu) ** 2 * self.width / (self.width + 1)
        self.width += 1
        self.total += value
        self.levels[0].appendleft((value, 0.0))
        self._compress()
        if self.n_seen % self.check_interval != 0:
            return _NONE
        return DriftSignal("drift", self.n_seen) if self._shrink() else _NONE

    def _compress(self) -> None:
        for lvl in range(len(self.levels)):
            row = self.levels[lvl]
            if len(row) <= self.MAX_BUCKETS:
                break
            s2, v2 = row.pop()   # oldest
            s1, v1 = row.pop()   # second oldest
            c = float(2 ** lvl)
            mu1, mu2 = s1 / c, s2 / c
            merged_var = v1 + v2 + (c * c / (2 * c)) * (mu1 - mu2) ** 2
            if lvl + 1 == len(self.levels):
                self.levels.append(deque())
            self.levels[lvl + 1].appendleft((s1 + s2, merged_var))

    def _buckets_oldest_first(self):
        for lvl in range(len(self.levels) - 1, -1, -1):
            count = float(2 ** lvl)
            row = self.levels[lvl]
            for i in range(len(row) - 1, -1, -1):
                yield lvl, i, count, row[i][0], row[i][1]

    def _shrink(self) -> bool:
        if self.width < 2 * self.min_sub_window:
            return False
        shrunk = False
        cut = True
        while cut:
            cut = False
            n0 = 0.0
            s0 = 0.0
            var_w = self.variance / self.width if self.width > 1 else 0.0
            log_term = math.log(2.0 * math.log(max(self.width, math.e)) / self.delta)
            for _, _, cnt, bsum, _ in self._buckets_oldest_first():
                n0 += cnt
                s0 += bsum
                n1 = self.width - n0
                if n0 < self.min_sub_window or n1 < self.min_sub_window:
                    continue
                mu0 = s0 / n0
                mu1 = (self.total - s0) / n1
                m_h = 1.0 / (1.0 / n0 + 1.0 / n1)
                eps = (math.sqrt((2.0 / m_h) * var_w * log_term)
                       + (2.0 / (3.0 * m_h)) * log_term)
                if abs(mu0 - mu1) > eps:
                    if not shrunk:
                        self.cut_worse = mu1 > mu0
                    self._drop_oldest_bucket()
                    shrunk = True
                    cut = self.width >= 2 * self.min_sub_window
                    break
        return shrunk

    def _drop_oldest_bucket(self) -> None:
        lvl = len(self.levels) - 1
        while lvl >= 0 and not self.levels[lvl]:
            lvl -= 1
        row = self.levels[lvl]
        bsum, bvar = row.pop()
        cnt = float(2 ** lvl)
        rest = self.width - cnt
        if rest > 0:
            mu_b = bsum / cnt
            mu_r = (self.total - bsum) / rest
            self.variance -= bvar + (cnt * rest / (cnt + rest)) * (mu_b - mu_r) ** 2
            self.variance = max(self.variance, 0.0)
        else:
            self.variance = 0.0
        self.width -= int(cnt)
        self.total -= bsum
        while len(self.levels) > 1 and not self.levels[-1]:
            self.levels.pop()


class Ddm:
    """Drift detection from the binary error stream of a classifier."""

    def __init__(self, burn_in: int = 30, warning_sigma: float = 2.0,
                 drift_sigma: float = 3.0) -> None:
        self.burn_in = int(burn_in)
        self.warning_sigma = float(warning_sigma)
        self.drift_sigma = float(drift_sigma)
        self.n_seen = 0
        self._reset()

    def _reset(self) -> None:
        self.i = 0
        self.p = 1.0
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf
        self.in_warning = False

    def update(self, error) -> DriftSignal:
        err = 1.0 if error else 0.0
        self.n_seen += 1
        self.i += 1
        self.p += (err - self.p) / self.i
        self.s = math.sqrt(max(self.p * (1.0 - self.p), 0.0) / self.i)
        if self.i < self.burn_in:
            return _NONE
        if self.p + self.s <= self.p_min + self.s_min:
            self.p_min = self.p
            self.s_min = self.s
        # strict: at the exact minimum (s_min 0 on constant streams) the
        # level equals the threshold and must not fire
        level = self.p + self.s
        if level > self.p_min + self.drift_sigma * self.s_min:
            self._reset()
            return DriftSignal("drift", self.n_seen)
        if level > self.p_min + self.warning_sigma * self.s_min:
            self.in_warning = True
            return DriftSignal("warning", self.n_seen)
        self.in_warning = False
        return _NONE
