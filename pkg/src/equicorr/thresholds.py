"""Rules that produce the classification cut C.

Data-driven rules look only at ``|y|``, so they are invariant under
permutations and sign flips of the observations. The remaining rules
(``Determined``, ``FixedC``, the top-k family sized from the parameters)
use the model parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from .model import ModelParams, determined_threshold, exact_risk, resolve_p
from .stats import std_normal_quantile

DEFAULT_EPS = 1e-6
DEFAULT_MAX_ITER = 1000
DEFAULT_POISSON_ALPHA = 0.5

_POWER_MEAN_NAMES = {4.0: "T1", 2.0: "T2", 1.0: "T3"}


@dataclass(frozen=True)
class PowerMean:
    beta_exp: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta_exp) and self.beta_exp > 0):
            raise ValueError(f"beta_exp must be > 0, got {self.beta_exp!r}")

    @property
    def label(self) -> str:
        return _POWER_MEAN_NAMES.get(float(self.beta_exp), f"power_mean({self.beta_exp:g})")


@dataclass(frozen=True)
class Iterative:
    eps: float = DEFAULT_EPS
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")

    label = "algorithm"


@dataclass(frozen=True)
class Determined:
    label = "determined"


@dataclass(frozen=True)
class TopFraction:
    alpha_frac: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_frac < 1.0:
            raise ValueError(f"alpha_frac must lie in (0, 1), got {self.alpha_frac!r}")

    @property
    def label(self) -> str:
        return f"top_fraction({self.alpha_frac:g})"


@dataclass(frozen=True)
class PoissonK:
    alpha: float = DEFAULT_POISSON_ALPHA

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @property
    def label(self) -> str:
        return "poisson_k" if self.alpha == DEFAULT_POISSON_ALPHA else f"poisson_k({self.alpha:g})"


@dataclass(frozen=True)
class FixedC:
    c: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be a finite number >= 0, got {self.c!r}")

    @property
    def label(self) -> str:
        return f"fixed({self.c:g})"


ThresholdMethod = Union[PowerMean, Iterative, Determined, TopFraction, PoissonK, FixedC]

T1 = PowerMean(4.0)
T2 = PowerMean(2.0)
T3 = PowerMean(1.0)
STANDARD_METHODS: tuple[ThresholdMethod, ...] = (T1, T2, T3, Iterative(), Determined())


def parse_method(entry: str | dict[str, Any]) -> ThresholdMethod:
    """Build a method from its config form.

    Bare names: ``"T1"``, ``"T2"``, ``"T3"``, ``"algorithm"``, ``"determined"``,
    ``"poisson_k"``. Tuned forms are objects keyed by ``"method"``, e.g.
    ``{"method": "fixed", "c": 2.5}`` or ``{"method": "top_fraction", "alpha_frac": 0.2}``.
    """
    if isinstance(entry, str):
        entry = {"method": entry}
    if not isinstance(entry, dict) or "method" not in entry:
        raise ValueError(f"method entry must be a name or an object with a 'method' key, got {entry!r}")
    opts = dict(entry)
    name = opts.pop("method")
    builders = {
        "T1": lambda: T1,
        "T2": lambda: T2,
        "T3": lambda: T3,
        "power_mean": lambda beta_exp: PowerMean(float(beta_exp)),
        "algorithm": lambda eps=DEFAULT_EPS, max_iter=DEFAULT_MAX_ITER: Iterative(float(eps), int(max_iter)),
        "determined": lambda: Determined(),
        "top_fraction": lambda alpha_frac: TopFraction(float(alpha_frac)),
        "poisson_k": lambda alpha=DEFAULT_POISSON_ALPHA: PoissonK(float(alpha)),
        "fixed": lambda c: FixedC(float(c)),
    }
    if name not in builders:
        raise ValueError(f"unknown method {name!r}; expected one of {sorted(builders)}")
    try:
        return builders[name](**opts)
    except TypeError as exc:
        raise ValueError(f"bad options for method {name!r}: {opts!r}") from exc


def method_to_config(method: ThresholdMethod) -> str | dict[str, Any]:
    match method:
        case PowerMean(beta_exp=b) if float(b) in _POWER_MEAN_NAMES:
            return _POWER_MEAN_NAMES[float(b)]
        case PowerMean(beta_exp=b):
            return {"method": "power_mean", "beta_exp": b}
        case Iterative(eps=e, max_iter=n):
            if (e, n) == (DEFAULT_EPS, DEFAULT_MAX_ITER):
                return "algorithm"
            return {"method": "algorithm", "eps": e, "max_iter": n}
        case Determined():
            return "determined"
        case TopFraction(alpha_frac=a):
            return {"method": "top_fraction", "alpha_frac": a}
        case PoissonK(alpha=a):
            return "poisson_k" if a == DEFAULT_POISSON_ALPHA else {"method": "poisson_k", "alpha": a}
        case FixedC(c=c):
            return {"method": "fixed", "c": c}
    raise TypeError(f"not a threshold method: {method!r}")


def power_mean_threshold(y, beta_exp: float) -> float:
    """(sum |y_i|^beta / m)^(1/beta)."""
    a = np.abs(np.asarray(y, dtype=float))
    if a.size == 0:
        raise ValueError("y must be nonempty")
    if not beta_exp > 0:
        raise ValueError(f"beta_exp must be > 0, got {beta_exp!r}")
    # Sorting first makes the sum independent of input order, bit for bit.
    a = np.sort(a)
    return float(np.mean(a**beta_exp) ** (1.0 / beta_exp))


@dataclass
class IterativeTrace:
    c_final: float
    iterations: int
    sequence: list[float] = field(default_factory=list)
    converged: bool = False


def iterative_threshold(y, eps: float = DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER) -> IterativeTrace:
    """Two-group Lloyd iteration on |y| started from the fourth power mean.

    Each step splits |y| at the current Z into ``<= Z`` and ``> Z`` and
    moves Z to the midpoint of the two group means. Stops when the move is
    below ``eps``, after ``max_iter`` moves, or when a split leaves one
    group empty; the last case returns the current Z as unconverged.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps!r}")
    a = np.sort(np.abs(np.asarray(y, dtype=float)))
    z = power_mean_threshold(a, 4.0)
    trace = IterativeTrace(c_final=z, iterations=0, sequence=[z])
    n = a.size
    csum = np.concatenate(([0.0], np.cumsum(a)))
    while trace.iterations < max_iter:
        k = int(np.searchsorted(a, z, side="right"))  # size of the lower group
        if k == 0 or k == n:
            break
        z_next = 0.5 * (csum[k] / k + (csum[n] - csum[k]) / (n - k))
        trace.iterations += 1
        trace.sequence.append(z_next)
        done = abs(z_next - z) < eps
        z = z_next
        if done:
            trace.converged = True
            break
    trace.c_final = z
    return trace


def top_k_threshold(y, k: int) -> float:
    """Cut that flags the k largest |y_i| under the strict rule |y_i| > C.

    With ties at the boundary the flagged count drops to the largest value
    <= k that a strict cut can realise. For k = m the cut is one ulp below
    min |y_i|, or 0 when some observation is exactly zero.
    """
    a = np.sort(np.abs(np.asarray(y, dtype=float)))[::-1]
    m = a.size
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    if k > m:
        raise ValueError(f"k={k} exceeds the number of observations m={m}")
    if m == 0:
        raise ValueError("y must be nonempty")
    if k == 0:
        return float(a[0])
    if k < m:
        return float(a[k])
    smallest = float(a[-1])
    return float(np.nextafter(smallest, -np.inf)) if smallest > 0 else 0.0


def expected_k(params: ModelParams, C: float) -> float:
    """Expected number of flagged coordinates m p P[|N| > C/sigma1] + m (1-p) P[|N| > C/sigma0]."""
    risk = exact_risk(params, C)
    p = resolve_p(params)
    return params.m * p * (1.0 - risk.t21) + params.m * (1.0 - p) * risk.t11


def poisson_normal_k(params: ModelParams, alpha: float = DEFAULT_POISSON_ALPHA) -> int:
    """Upper (1 - alpha) normal-approximation quantile of a Poisson(m p) count."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    lam = params.m * resolve_p(params)
    if not lam > 0:
        raise ValueError("m * p must be positive")
    z = std_normal_quantile(1.0 - alpha)
    return max(0, math.ceil(lam + z * math.sqrt(lam)))


def compute_threshold(method: ThresholdMethod, y, params: ModelParams) -> float:
    match method:
        case PowerMean(beta_exp=b):
            return power_mean_threshold(y, b)
        case Iterative(eps=e, max_iter=n):
            return iterative_threshold(y, e, n).c_final
        case Determined():
            return determined_threshold(params)
        case TopFraction(alpha_frac=a):
            k = math.floor(a * params.m + 0.5)
            return top_k_threshold(y, min(k, params.m))
        case PoissonK(alpha=a):
            # the normal quantile can overshoot m when m p is close to m
            return top_k_threshold(y, min(poisson_normal_k(params, a), params.m))
        case FixedC(c=c):
            return float(c)
    raise TypeError(f"not a threshold method: {method!r}")
