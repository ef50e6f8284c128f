"""Reference multiple-testing procedures used for comparison.

Two baselines ship here: Benjamini-Hochberg on two-sided p-values and an
oracle that thresholds the true local FDR of a known three-component normal
model. Anything else (weighted or side-aware variants, external packages)
plugs in through the same call shape: values in, rejected index set out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "bh",
    "OracleTruth",
    "oracle_lfdr",
    "oracle_procedure",
    "IndexProcedure",
]


@runtime_checkable
class IndexProcedure(Protocol):
    """Call shape shared by every pluggable procedure: a vector of values
    (p-values or z-scores, by the procedure's own convention) and a target
    level in, a sorted array of rejected indices out."""

    def __call__(self, values: np.ndarray, alpha: float) -> np.ndarray: ...


def bh(p_values, alpha: float) -> np.ndarray:
    """Benjamini-Hochberg step-up at level ``alpha``.

    Rejects the k* smallest p-values where k* is the largest k with
    p_(k) <= k*alpha/n; returns their indices sorted ascending (ties at
    the cutoff resolve by original index order).
    """
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("need a nonempty 1-d vector of p-values")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("p-values must lie in [0, 1]")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = p.size
    order = np.argsort(p, kind="stable")
    thresholds = alpha * np.arange(1, n + 1) / n
    ok = np.flatnonzero(p[order] <= thresholds)
    if ok.size == 0:
        return np.array([], dtype=np.intp)
    k_star = int(ok[-1]) + 1
    return np.sort(order[:k_star])


@dataclass(frozen=True)
class OracleTruth:
    """Ground-truth three-component normal model: z ~ (1-p1-p2) N(0,1)
    + p1 N(mu1,1) + p2 N(mu2,1) with mu1 < 0 < mu2."""

    p1: float
    p2: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if self.p1 < 0 or self.p2 < 0 or self.p1 + self.p2 > 1.0:
            raise ValueError(f"need p1, p2 >= 0 with p1 + p2 <= 1, got {self.p1}, {self.p2}")
        if not (self.mu1 < 0.0 < self.mu2):
            raise ValueError(f"need mu1 < 0 < mu2, got {self.mu1}, {self.mu2}")

    @property
    def pi0(self) -> float:
        return 1.0 - self.p1 - self.p2


def oracle_lfdr(z, truth: OracleTruth):
    """True local FDR pi0*phi(z) / f(z) under the known model.

    Computed through log space so extreme z-scores give 0/1 limits instead
    of 0/0.
    """
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if np.any(~np.isfinite(z_arr)):
        raise ValueError("z-scores must be finite")
    with np.errstate(divide="ignore"):
        log_parts = np.vstack(
            [
                np.log(truth.pi0) - 0.5 * z_arr**2,
                np.log(truth.p1) - 0.5 * (z_arr - truth.mu1) ** 2,
                np.log(truth.p2) - 0.5 * (z_arr - truth.mu2) ** 2,
            ]
        )
    out = np.exp(log_parts[0] - logsumexp(log_parts, axis=0))
    return float(out[0]) if scalar else out


def oracle_procedure(z_values, truth: OracleTruth, alpha: float) -> np.ndarray:
    """Oracle lfdr thresholding: sort by true lfdr ascending and reject the
    largest prefix whose running mean stays at or below ``alpha``."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    z = np.asarray(z_values, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("need a nonempty 1-d vector of z-scores")
    lfdr = oracle_lfdr(z, truth)
    order = np.argsort(lfdr, kind="stable")
    running_mean = np.cumsum(lfdr[order]) / np.arange(1, z.size + 1)
    k_star = int(np.count_nonzero(running_mean <= alpha))
    return np.sort(order[:k_star])
