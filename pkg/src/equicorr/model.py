"""Generative model for equicorrelated two-variance Gaussian data and the
Bayes risk of a fixed cut.

Each coordinate is a signal with probability ``p`` (variance
``sigma0_sq + tau_sq``) or a null (variance ``sigma0_sq``). Given the signal
pattern, the vector is jointly normal with an equicorrelated correlation
matrix. A coordinate is flagged as a signal when ``|y_i| > C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .stats import abs_normal_tail, squared_normal_cdf


class DegenerateThresholdError(ValueError):
    """The closed-form cut has no positive solution for these parameters."""


def rho_lower_bound(m: int) -> float:
    """Open lower limit of the equicorrelation for an m x m matrix."""
    return -1.0 / (m - 1) if m > 1 else -1.0


def check_rho(rho: float, m: int, name: str = "rho") -> None:
    lo = rho_lower_bound(m)
    if not (lo < rho <= 1.0):
        raise ValueError(
            f"{name}={rho} is outside the valid equicorrelation range "
            f"({lo:.6g}, 1] for m={m} (requires -1/(m-1) < {name} <= 1)"
        )


@dataclass(frozen=True)
class ModelParams:
    """All generative and loss parameters of one simulation cell.

    Sparsity is given either by ``beta`` (p = m**-beta) or by an explicit
    ``p``; exactly one of the two must be set. ``eps_sd``/``rho1`` describe
    optional equicorrelated measurement noise added on top of the signal
    layer and default to a noiseless observation.
    """

    m: int
    sigma0_sq: float
    tau_sq: float
    rho: float = 0.0
    beta: float | None = None
    p: float | None = None
    delta0: float = 1.0
    deltaA: float = 1.0
    eps_sd: float = 0.0
    rho1: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        for name in ("sigma0_sq", "tau_sq", "delta0", "deltaA"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not (math.isfinite(self.eps_sd) and self.eps_sd >= 0):
            raise ValueError(f"eps_sd must be >= 0, got {self.eps_sd!r}")
        if self.beta is not None and not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        check_rho(self.rho, self.m, "rho")
        check_rho(self.rho1, self.m, "rho1")
        p = resolve_p(self)
        if not (0.0 < p < 1.0):
            raise ValueError(f"resolved p={p!r} must lie strictly inside (0, 1)")

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.sigma0_sq)

    @property
    def sigma1(self) -> float:
        """Standard deviation of a signal coordinate."""
        return math.sqrt(self.sigma0_sq + self.tau_sq)


def resolve_p(params: ModelParams) -> float:
    has_beta = params.beta is not None
    has_p = params.p is not None
    if has_beta == has_p:
        raise ValueError("exactly one of 'beta' or 'p' must be given")
    if has_p:
        return float(params.p)
    return math.exp(-params.beta * math.log(params.m))


def draw_signals(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """m independent Bernoulli(p) indicators as an int8 array."""
    p = resolve_p(params)
    return (rng.random(params.m) < p).astype(np.int8)


class TrialSample(NamedTuple):
    nu: np.ndarray
    y: np.ndarray


def equicorrelated_normal(m: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """One N(0, R) draw where R has unit diagonal and common off-diagonal rho.

    Uses the eigen-decomposition of R: the grand mean of iid normals carries
    the eigenvalue 1 + (m-1) rho and the deviations from it carry 1 - rho.
    Costs O(m) and stays exact for negative rho down to -1/(m-1).
    """
    z = rng.standard_normal(m)
    zbar = z.mean()
    return math.sqrt(1.0 - rho) * (z - zbar) + math.sqrt(1.0 + (m - 1) * rho) * zbar


def coordinate_sd(params: ModelParams, nu: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(nu) == 1, params.sigma1, params.sigma0)


def draw_observations(params: ModelParams, nu: np.ndarray, rng: np.random.Generator) -> TrialSample:
    nu = np.asarray(nu)
    if nu.shape != (params.m,):
        raise ValueError(f"nu must have length m={params.m}, got shape {nu.shape}")
    check_rho(params.rho, params.m)
    y = coordinate_sd(params, nu) * equicorrelated_normal(params.m, params.rho, rng)
    if params.eps_sd > 0:
        y = y + params.eps_sd * equicorrelated_normal(params.m, params.rho1, rng)
    return TrialSample(nu=nu, y=y)


def model_covariance(params: ModelParams, nu: np.ndarray) -> np.ndarray:
    """Covariance of y given nu: D R2 D + eps_sd^2 R1."""
    m = params.m
    sd = coordinate_sd(params, nu)
    r2 = np.full((m, m), params.rho)
    np.fill_diagonal(r2, 1.0)
    cov = sd[:, None] * r2 * sd[None, :]
    if params.eps_sd > 0:
        r1 = np.full((m, m), params.rho1)
        np.fill_diagonal(r1, 1.0)
        cov = cov + params.eps_sd**2 * r1
    return cov


@dataclass(frozen=True)
class RiskBreakdown:
    t11: float  # P[null coordinate is flagged]
    t21: float  # P[signal coordinate is missed]
    expected_fp: float
    expected_fn: float
    risk: float


def exact_risk(params: ModelParams, C: float) -> RiskBreakdown:
    """Expected weighted error count of the fixed rule ``|y_i| > C``.

    Only the marginal laws enter, so the value is the same for every
    correlation. Measurement noise, when present, widens both marginals.
    """
    if C < 0:
        raise ValueError(f"C must be >= 0, got {C}")
    p = resolve_p(params)
    noise = params.eps_sd**2
    sd_null = math.sqrt(params.sigma0_sq + noise)
    sd_signal = math.sqrt(params.sigma0_sq + params.tau_sq + noise)
    t11 = abs_normal_tail(C, sd_null)
    t21 = squared_normal_cdf(C * C, sd_signal)
    expected_fp = params.m * (1.0 - p) * t11
    expected_fn = params.m * p * t21
    risk = params.delta0 * expected_fp + params.deltaA * expected_fn
    return RiskBreakdown(t11=t11, t21=t21, expected_fp=expected_fp, expected_fn=expected_fn, risk=risk)


@dataclass(frozen=True)
class ApproxRisk:
    U: float
    V: float
    a: float
    f_of_C: float
    fprime_of_C: float


def approx_risk(params: ModelParams, C: float) -> ApproxRisk:
    """Smooth surrogate f(C) = (V/C) exp(-a C^2) + U C of the exact risk.

    The null tail is replaced by the upper Mills bound and the signal
    miss probability by its linearisation at zero. f is convex on C > 0.
    """
    if not C > 0:
        raise ValueError(f"C must be > 0, got {C}")
    p = resolve_p(params)
    m = params.m
    U = 2.0 * params.deltaA * m * p / math.sqrt(2.0 * math.pi * (params.sigma0_sq + params.tau_sq))
    V = params.sigma0 * params.delta0 * m * (1.0 - p) * math.sqrt(2.0 / math.pi)
    a = 1.0 / (2.0 * params.sigma0_sq)
    decay = math.exp(-a * C * C)
    f = V / C * decay + U * C
    fprime = U - V * decay * (1.0 / (C * C) + 2.0 * a)
    return ApproxRisk(U=U, V=V, a=a, f_of_C=f, fprime_of_C=fprime)


def determined_threshold(params: ModelParams) -> float:
    """Closed-form cut sqrt(2 sigma0^2 log(delta0 (1-p) / (deltaA p) * sqrt(1 + tau^2/sigma0^2))).

    It is the root of f'(C) once the 1/C^2 term is dropped against 2a.
    """
    p = resolve_p(params)
    arg = params.delta0 * (1.0 - p) / (params.deltaA * p) * math.sqrt(1.0 + params.tau_sq / params.sigma0_sq)
    if not arg > 1.0:
        raise DegenerateThresholdError(
            f"no positive threshold: log argument {arg:.6g} <= 1 (dense or low-contrast regime)"
        )
    return math.sqrt(2.0 * params.sigma0_sq * math.log(arg))
