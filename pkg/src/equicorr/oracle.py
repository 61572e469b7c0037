"""Truth-aware reference cuts and the two-group clustering criteria.

``ideal_threshold_grid`` is the brute-force scan used for the "ideal"
column of the simulation tables. ``ideal_threshold_exact`` enumerates every
partition a strict cut can produce and serves as its reference.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

DEFAULT_GRID_POINTS = 1000


class OracleResult(NamedTuple):
    c_ideal: float
    min_total_error: int
    n_optima: int


def _split_by_truth(y, nu) -> tuple[np.ndarray, np.ndarray]:
    a = np.abs(np.asarray(y, dtype=float))
    nu = np.asarray(nu)
    if a.size == 0:
        raise ValueError("y must be nonempty")
    if nu.shape != a.shape:
        raise ValueError(f"nu shape {nu.shape} does not match y shape {a.shape}")
    truth = nu == 1
    return np.sort(a[~truth]), np.sort(a[truth])


def _total_errors(nulls: np.ndarray, signals: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    # fp: nulls strictly above the cut; fn: signals at or below it
    fp = nulls.size - np.searchsorted(nulls, cuts, side="right")
    fn = np.searchsorted(signals, cuts, side="right")
    return fp + fn


def _below(x: float) -> float | None:
    """The select-everything cut, if a nonnegative one exists."""
    return float(np.nextafter(x, -np.inf)) if x > 0 else None


def ideal_threshold_grid(y, nu, grid_points: int = DEFAULT_GRID_POINTS) -> OracleResult:
    """Scan ``grid_points`` equally spaced cuts from min |y| to max |y|.

    The cut one ulp below min |y| is scanned first so that flagging every
    coordinate is also a candidate. Ties go to the smallest cut.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    nulls, signals = _split_by_truth(y, nu)
    a_min = min(nulls[0] if nulls.size else np.inf, signals[0] if signals.size else np.inf)
    a_max = max(nulls[-1] if nulls.size else -np.inf, signals[-1] if signals.size else -np.inf)
    cuts = np.linspace(a_min, a_max, grid_points)
    first = _below(a_min)
    if first is not None:
        cuts = np.concatenate(([first], cuts))
    errors = _total_errors(nulls, signals, cuts)
    best = int(np.argmin(errors))
    min_err = int(errors[best])
    return OracleResult(float(cuts[best]), min_err, int(np.count_nonzero(errors == min_err)))


def ideal_threshold_exact(y, nu) -> OracleResult:
    """Global minimum of fp + fn over every strict cut.

    Candidate partitions: everything flagged, then for each distinct |y|
    value u the split {<= u} / {> u}. ``c_ideal`` is reported at the
    midpoint of the winning gap (the max |y| for the empty selection).
    """
    nulls, signals = _split_by_truth(y, nu)
    u = np.unique(np.concatenate((nulls, signals)))
    errors = _total_errors(nulls, signals, u)
    reported = u.copy()
    mid = u[:-1] + 0.5 * (u[1:] - u[:-1])
    # between adjacent floats the midpoint can round up onto the next value
    reported[:-1] = np.where(mid < u[1:], mid, u[:-1])
    first = _below(float(u[0]))
    if first is not None:
        errors = np.concatenate(([nulls.size], errors))
        reported = np.concatenate(([first], reported))
    best = int(np.argmin(errors))
    min_err = int(errors[best])
    return OracleResult(float(reported[best]), min_err, int(np.count_nonzero(errors == min_err)))


def _groups(z, C: float) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise ValueError("z must be nonempty")
    return z[z <= C], z[z > C]


def between_group_gap(z, C: float) -> float:
    """(m1 m2 / m^2) |mean(z <= C) - mean(z > C)|; maximised at C = mean(z)."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("z must be positive")
    low, high = _groups(z, C)
    if low.size == 0 or high.size == 0:
        raise ValueError(f"cut C={C} leaves a group empty")
    m = z.size
    return low.size * high.size / m**2 * abs(low.mean() - high.mean())


def within_group_var(z, C: float) -> float:
    """Pooled within-group sum of squares of the split at C (empty group adds 0)."""
    total = 0.0
    for group in _groups(z, C):
        if group.size:
            total += float(np.sum((group - group.mean()) ** 2))
    return total
