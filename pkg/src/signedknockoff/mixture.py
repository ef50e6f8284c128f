"""Two-group mixture model on signed p-values and its masked-data EM fitter.

The null density is uniform on (-1, 1); the alternative is a two-component
mixture of beta densities transformed to (-1, 1), one strictly decreasing
component feeding the negative tail and one strictly increasing component
feeding the positive tail (shapes constrained to (0, 1]).

The EM treats three pieces of missing information: the null status of each
hypothesis, the alternative component label, and, for masked pairs, which
element of {q, q~} is the true signed p-value. Revealed values carry three
latent configurations (null / left / right); masked pairs carry five (null
merges the two identities since the null density is flat). All density work
happens in log space, so values arbitrarily close to +-1 are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .procedure import MaskedView

__all__ = [
    "MixtureParams",
    "EMReport",
    "f1_density",
    "pair_density",
    "lfdr_pair",
    "log_likelihood",
    "fit_em",
    "default_init",
    "sample_mixture",
]

_LN2 = math.log(2.0)
_SHAPE_FLOOR = 1e-4


@dataclass(frozen=True)
class MixtureParams:
    """Null proportion, mixing weight of the negative-side component, and
    the two beta shapes (left = decreasing toward -1, right = increasing
    toward +1)."""

    pi0: float
    lam: float
    shape_left: float
    shape_right: float

    def __post_init__(self):
        if not (0.0 <= self.pi0 <= 1.0):
            raise ValueError(f"pi0 must lie in [0, 1], got {self.pi0}")
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")
        for name, s in (("shape_left", self.shape_left), ("shape_right", self.shape_right)):
            if not (0.0 < s <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {s}")


@dataclass(frozen=True)
class EMReport:
    """Fit outcome: parameters, log-likelihood trace, iteration count."""

    params: MixtureParams
    loglik_trace: list[float]
    iterations: int
    converged: bool


def _log_components(x: np.ndarray, params: MixtureParams) -> tuple[np.ndarray, np.ndarray]:
    """Log of the two alternative components *including* their mixing
    weights: (log lam*fL(x), log (1-lam)*fR(x))."""
    a = params.shape_left
    b = params.shape_right
    lx = np.log1p(x) - _LN2  # log((x+1)/2)
    lmx = np.log1p(-x) - _LN2  # log((1-x)/2)
    with np.errstate(divide="ignore"):
        log_lam = np.log(params.lam)
        log_mlam = np.log1p(-params.lam) if params.lam < 1.0 else -np.inf
    left = log_lam + math.log(a) - _LN2 + (a - 1.0) * lx
    right = log_mlam + math.log(b) - _LN2 + (b - 1.0) * lmx
    return left, right


def _validate_open_interval(x: np.ndarray):
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) >= 1.0):
        raise ValueError("signed p-values must lie strictly inside (-1, 1)")


def f1_density(q, params: MixtureParams):
    """Alternative density lam*fL + (1-lam)*fR on (-1, 1)."""
    q_arr = np.asarray(q, dtype=float)
    scalar = q_arr.ndim == 0
    q_arr = np.atleast_1d(q_arr)
    _validate_open_interval(q_arr)
    left, right = _log_components(q_arr, params)
    out = np.exp(np.logaddexp(left, right))
    return float(out[0]) if scalar else out


def _check_pair(q: float, q_tilde: float):
    if not (np.isfinite(q) and np.isfinite(q_tilde)):
        raise ValueError("pair values must be finite")
    if abs(q) >= 1.0 or abs(q_tilde) >= 1.0:
        raise ValueError("pair values must lie strictly inside (-1, 1)")
    s = 1.0 if q > 0 else -1.0
    if abs((q + q_tilde) - s) > 1e-9:
        raise ValueError(f"{{{q}, {q_tilde}}} is not a valid signed-p/knockoff pair")


def pair_density(q: float, q_tilde: float, params: MixtureParams) -> float:
    """Density of the unordered pair: pi0 + (1-pi0)*(f1(q) + f1(q~))."""
    _check_pair(q, q_tilde)
    alt = f1_density(q, params) + f1_density(q_tilde, params)
    return params.pi0 + (1.0 - params.pi0) * alt


def lfdr_pair(q: float, q_tilde: float, params: MixtureParams) -> float:
    """Local FDR of an unordered pair: pi0 / pair density; always in [0, 1]."""
    return params.pi0 / pair_density(q, q_tilde, params)


def _split_view(view: MaskedView) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(revealed values, masked u, masked v) from a masked view."""
    x = view.revealed_values()
    u, v = view.masked_pair_values()
    return np.asarray(x, dtype=float), np.asarray(u, dtype=float), np.asarray(v, dtype=float)


def _log_pi(params: MixtureParams) -> tuple[float, float]:
    with np.errstate(divide="ignore"):
        log_pi0 = math.log(params.pi0) if params.pi0 > 0 else -math.inf
        log_alt = math.log1p(-params.pi0) if params.pi0 < 1 else -math.inf
    return log_pi0, log_alt


def _revealed_log_weights(x: np.ndarray, params: MixtureParams) -> np.ndarray:
    """(3, r) log joint weights for a revealed value: null, left, right."""
    log_pi0, log_alt = _log_pi(params)
    left, right = _log_components(x, params)
    return np.vstack([np.full_like(x, log_pi0 - _LN2), log_alt + left, log_alt + right])


def _masked_log_weights(u: np.ndarray, v: np.ndarray, params: MixtureParams) -> np.ndarray:
    """(5, m) log joint weights for a masked pair: null, uL, uR, vL, vR."""
    log_pi0, log_alt = _log_pi(params)
    u_left, u_right = _log_components(u, params)
    v_left, v_right = _log_components(v, params)
    return np.vstack(
        [
            np.full_like(u, log_pi0),
            log_alt + u_left,
            log_alt + u_right,
            log_alt + v_left,
            log_alt + v_right,
        ]
    )


def log_likelihood(view: MaskedView, params: MixtureParams) -> float:
    """Masked-data log-likelihood: revealed values contribute their marginal
    density, masked pairs the density of the unordered pair."""
    x, u, v = _split_view(view)
    _validate_open_interval(x)
    _validate_open_interval(u)
    total = 0.0
    if x.size:
        total += float(np.sum(logsumexp(_revealed_log_weights(x, params), axis=0)))
    if u.size:
        total += float(np.sum(logsumexp(_masked_log_weights(u, v, params), axis=0)))
    return total


def default_init(view: MaskedView) -> MixtureParams:
    """Mild, data-informed starting point: pi0 = 0.9, lam = share of
    negative pairs among pairs far from +-1/2, shapes 0.3. lam is kept off
    the boundary so neither component starts dead."""
    far = view.distance > 0.25
    n_far = int(np.count_nonzero(far))
    if n_far == 0:
        lam = 0.5
    else:
        lam = float(np.count_nonzero(view.sign[far] < 0)) / n_far
    lam = min(max(lam, 0.02), 0.98)
    return MixtureParams(pi0=0.9, lam=lam, shape_left=0.3, shape_right=0.3)


def _m_step(
    params: MixtureParams,
    n: int,
    s_null: float,
    s_left: float,
    s_right: float,
    d_left: float,
    d_right: float,
) -> MixtureParams:
    pi0 = min(max(s_null / n, 0.0), 1.0)
    s_alt = s_left + s_right
    lam = s_left / s_alt if s_alt > 0 else params.lam
    # closed-form weighted Beta(a, 1) MLE, clamped into (0, 1]
    if s_left > 0 and d_left < 0:
        shape_left = min(max(-s_left / d_left, _SHAPE_FLOOR), 1.0)
    else:
        shape_left = params.shape_left
    if s_right > 0 and d_right < 0:
        shape_right = min(max(-s_right / d_right, _SHAPE_FLOOR), 1.0)
    else:
        shape_right = params.shape_right
    return MixtureParams(pi0=pi0, lam=lam, shape_left=shape_left, shape_right=shape_right)


def fit_em(
    view: MaskedView,
    init: MixtureParams | None = None,
    max_iter: int = 200,
    tol: float = 1e-8,
) -> EMReport:
    """Fit the mixture to a masked view by EM.

    E-step responsibilities follow the latent structure in the module
    docstring; M-step updates are closed forms (null share, component
    share, weighted Beta(a,1) shape MLEs clamped into (0, 1]). Stops when
    the log-likelihood changes by less than ``tol`` or after ``max_iter``
    updates; the recorded trace is nondecreasing up to roundoff.
    """
    x, u, v = _split_view(view)
    n = x.size + u.size
    if n == 0:
        raise ValueError("cannot fit a mixture to an empty view")
    _validate_open_interval(x)
    _validate_open_interval(u)
    _validate_open_interval(v)

    params = init if init is not None else default_init(view)

    # data-side log terms are fixed across iterations
    lx = np.log1p(x) - _LN2
    lmx = np.log1p(-x) - _LN2
    lu = np.log1p(u) - _LN2
    lmu = np.log1p(-u) - _LN2
    lv = np.log1p(v) - _LN2
    lmv = np.log1p(-v) - _LN2

    trace: list[float] = []
    converged = False
    iterations = 0

    def _e_step(p: MixtureParams):
        s_null = s_left = s_right = 0.0
        d_left = d_right = 0.0
        ll = 0.0
        if x.size:
            w = _revealed_log_weights(x, p)
            norm = logsumexp(w, axis=0)
            g = np.exp(w - norm)
            ll += float(np.sum(norm))
            s_null += float(np.sum(g[0]))
            s_left += float(np.sum(g[1]))
            s_right += float(np.sum(g[2]))
            d_left += float(np.dot(g[1], lx))
            d_right += float(np.dot(g[2], lmx))
        if u.size:
            w = _masked_log_weights(u, v, p)
            norm = logsumexp(w, axis=0)
            g = np.exp(w - norm)
            ll += float(np.sum(norm))
            s_null += float(np.sum(g[0]))
            s_left += float(np.sum(g[1]) + np.sum(g[3]))
            s_right += float(np.sum(g[2]) + np.sum(g[4]))
            d_left += float(np.dot(g[1], lu) + np.dot(g[3], lv))
            d_right += float(np.dot(g[2], lmu) + np.dot(g[4], lmv))
        return ll, s_null, s_left, s_right, d_left, d_right

    while iterations < max_iter:
        ll, s_null, s_left, s_right, d_left, d_right = _e_step(params)
        if not math.isfinite(ll):
            raise ArithmeticError(f"non-finite log-likelihood at {params}")
        trace.append(ll)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < tol:
            converged = True
            break
        params = _m_step(params, n, s_null, s_left, s_right, d_left, d_right)
        iterations += 1

    if not converged:
        # record the likelihood at the final parameters as well
        ll, *_ = _e_step(params)
        if not math.isfinite(ll):
            raise ArithmeticError(f"non-finite log-likelihood at {params}")
        trace.append(ll)

    return EMReport(params=params, loglik_trace=trace, iterations=iterations, converged=converged)


def sample_mixture(params: MixtureParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw signed p-values from the two-group model (inverse-CDF for the
    beta components); values are nudged off 0 and +-1."""
    labels = rng.choice(
        3,
        size=size,
        p=[
            params.pi0,
            (1.0 - params.pi0) * params.lam,
            (1.0 - params.pi0) * (1.0 - params.lam),
        ],
    )
    out = np.empty(size)
    n0 = int(np.count_nonzero(labels == 0))
    n1 = int(np.count_nonzero(labels == 1))
    n2 = int(np.count_nonzero(labels == 2))
    out[labels == 0] = rng.uniform(-1.0, 1.0, size=n0)
    out[labels == 1] = 2.0 * rng.random(n1) ** (1.0 / params.shape_left) - 1.0
    out[labels == 2] = 1.0 - 2.0 * rng.random(n2) ** (1.0 / params.shape_right)
    out = np.clip(out, -1.0 + 1e-12, 1.0 - 1e-12)
    out[out == 0.0] = 1e-12
    return out
