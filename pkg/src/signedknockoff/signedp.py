"""Signed p-values and their knockoffs.

A test statistic t with two-sided p-value p maps to the signed p-value
q = sign(t) * (1 - p), which keeps the direction of the effect and is
Uniform(-1, 1) under a continuous symmetric null. The knockoff of q is its
mirror image about sign(q)/2, distributed like q under the null.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .special import normal_cdf, t_cdf

__all__ = [
    "TestStatistic",
    "two_sided_p",
    "signed_p",
    "signed_p_values",
    "knockoff",
    "knockoff_values",
    "pair_bit",
    "sanitize_p",
    "P_FLOOR",
]

P_FLOOR = 1e-15


@dataclass(frozen=True)
class TestStatistic:
    """A test statistic with an optional t reference distribution.

    ``df`` absent means the statistic is referred to the standard normal.
    """

    value: float
    df: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"statistic must be finite, got {self.value}")
        if self.df is not None and not (math.isfinite(self.df) and self.df > 0):
            raise ValueError(f"df must be positive, got {self.df}")


def two_sided_p(stat: TestStatistic) -> float:
    """Two-sided p-value 2*(1 - F(|t|)) under the statistic's reference CDF."""
    a = -abs(stat.value)
    # lower-tail evaluation keeps tiny tails accurate
    if stat.df is None:
        return min(2.0 * normal_cdf(a), 1.0)
    return min(2.0 * t_cdf(a, stat.df), 1.0)


def signed_p(stat: TestStatistic, p: float) -> float:
    """Signed p-value sign(t) * (1 - p).

    A statistic of exactly 0 gets sign +1 (a measure-zero event under a
    continuous model); a warning is emitted so callers can flag the row.
    """
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if stat.value > 0:
        sign = 1.0
    elif stat.value < 0:
        sign = -1.0
    else:
        warnings.warn("statistic is exactly 0; assigning positive sign", RuntimeWarning)
        sign = 1.0
    return sign * (1.0 - p)


def signed_p_values(stats: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Vectorized ``signed_p``; zero statistics get sign +1 (one warning)."""
    stats = np.asarray(stats, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p > 1.0)):
        raise ValueError("p-values must lie in (0, 1]")
    sign = np.where(stats >= 0.0, 1.0, -1.0)
    n_zero = int(np.count_nonzero(stats == 0.0))
    if n_zero:
        warnings.warn(
            f"{n_zero} statistic(s) are exactly 0; assigning positive sign",
            RuntimeWarning,
        )
    return sign * (1.0 - p)


def knockoff(q: float) -> float:
    """Mirror value sign(q) - q; an involution on (-1, 0) and (0, 1)."""
    if not (0.0 < abs(q) < 1.0):
        raise ValueError(f"signed p-value must lie in (-1,0) or (0,1), got {q}")
    return math.copysign(1.0, q) - q


def knockoff_values(q: np.ndarray) -> np.ndarray:
    """Vectorized ``knockoff``."""
    q = np.asarray(q, dtype=float)
    if np.any((q == 0.0) | (np.abs(q) >= 1.0)):
        raise ValueError("signed p-values must lie in (-1,0) or (0,1)")
    return np.sign(q) - q


def pair_bit(q) -> np.ndarray:
    """Indicator that |q| exceeds 1/2, i.e. q is the extreme element of its pair.

    |q| == 1/2 exactly (q equals its knockoff) is deterministically treated
    as 1 for reproducibility.
    """
    return np.abs(np.asarray(q, dtype=float)) >= 0.5


def sanitize_p(p) -> np.ndarray:
    """Clamp p-values into [P_FLOOR, 1 - P_FLOOR].

    In float arithmetic an extreme statistic can give p = 0 (q = +-1) and a
    zero statistic gives p = 1 (q = 0); both fall outside the open interval
    the pair construction needs. The clamp is far below any level anyone
    tests at, so rejections are unaffected.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p_arr)) or np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise ValueError("p-values must lie in [0, 1]")
    return np.clip(p_arr, P_FLOOR, 1.0 - P_FLOOR)
