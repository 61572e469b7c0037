"""Turning a cut into a selection and counting what it got wrong.

Indices are 0-based. The cut is strict everywhere: coordinate i is selected
iff |y_i| > C, so a value sitting exactly on the cut stays unselected.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class ConfusionCounts(NamedTuple):
    fp: int
    fn: int
    tp: int
    tn: int

    @property
    def total_error(self) -> int:
        return self.fp + self.fn


def select(y, C: float) -> np.ndarray:
    """Sorted indices i with |y_i| > C."""
    if C < 0:
        raise ValueError(f"C must be >= 0, got {C}")
    return np.flatnonzero(np.abs(np.asarray(y, dtype=float)) > C)


def confusion(sel, nu) -> ConfusionCounts:
    nu = np.asarray(nu)
    m = nu.size
    sel = np.asarray(sel, dtype=np.intp)
    if sel.size and (sel.min() < 0 or sel.max() >= m):
        raise ValueError(f"selection index out of range for m={m}")
    sel = np.unique(sel)
    truth = nu == 1
    tp = int(np.count_nonzero(truth[sel]))
    fp = sel.size - tp
    fn = int(np.count_nonzero(truth)) - tp
    return ConfusionCounts(fp=fp, fn=fn, tp=tp, tn=m - tp - fp - fn)


def loss(conf: ConfusionCounts, delta0: float = 1.0, deltaA: float = 1.0) -> float:
    return delta0 * conf.fp + deltaA * conf.fn


def discrepancy_pct(e_method: float, e_ideal: float) -> float:
    """Percentage of a method's error that the truth-aware ideal cut avoids."""
    if not e_method > 0:
        raise ValueError(f"discrepancy is undefined for a method error of {e_method!r}")
    return 100.0 * (1.0 - e_ideal / e_method)
