"""Stepwise knockoff-pair procedure with masked filtration.

Each hypothesis contributes an unordered pair {q, q~} (a signed p-value and
its mirror). Pairs are ordered on each side by distance to +-1/2 and the
rejection region [-1, L) u (U, 1] shrinks toward the endpoints by accepting
one pair at a time. Which element of a pair is the true q stays masked until
the pair is accepted; side-selection strategies only ever see the masked
view, which makes their choices measurable with respect to the revealed
information by construction.

The estimated FDR at each step is (1 + #knockoffs in region) / max(1, #q in
region); the procedure stops the first time it drops to the target level,
or when every pair has been accepted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .signedp import knockoff_values, pair_bit

__all__ = [
    "Side",
    "SideStrategy",
    "SignedPair",
    "PairSet",
    "RejectionRegion",
    "ProcedureState",
    "MaskedView",
    "ProcedureResult",
    "build_pairs",
    "region_for",
    "region_counts",
    "fdr_hat",
    "masked_view",
    "run",
]


class Side(enum.Enum):
    """Which side of the origin to accept the next pair from."""

    POSITIVE = "positive"
    NEGATIVE = "negative"


# A strategy maps the masked view to a side; it must not see anything else.
SideStrategy = Callable[["MaskedView"], Side]


@dataclass(frozen=True)
class SignedPair:
    """One hypothesis's unordered pair and its masked/revealed state."""

    index: int
    q: float
    knockoff: float
    b: bool
    revealed: bool


def _readonly(a: np.ndarray) -> np.ndarray:
    v = a.view()
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class PairSet:
    """All pairs, split by sign and ordered by distance to +-1/2.

    ``pos_order``/``neg_order`` hold original indices, nearest pair first,
    ties broken by index ascending. ``sorted_q``/``sorted_knockoff`` are
    value-sorted copies used for region counting.
    """

    q: np.ndarray
    knockoff: np.ndarray
    sign: np.ndarray
    b: np.ndarray
    distance: np.ndarray
    pair_min: np.ndarray
    pos_order: np.ndarray
    neg_order: np.ndarray
    sorted_q: np.ndarray
    sorted_knockoff: np.ndarray

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def n_plus(self) -> int:
        return self.pos_order.shape[0]

    @property
    def n_minus(self) -> int:
        return self.neg_order.shape[0]

    def pair(self, index: int, revealed: bool = False) -> SignedPair:
        return SignedPair(
            index=index,
            q=float(self.q[index]),
            knockoff=float(self.knockoff[index]),
            b=bool(self.b[index]),
            revealed=revealed,
        )


def build_pairs(q_values: Iterable[float]) -> PairSet:
    """Construct the pair set for a vector of signed p-values.

    Every value must lie in (-1, 0) or (0, 1); zeros must be sanitized
    upstream (see ``signedp.signed_p``).
    """
    q = np.asarray(list(q_values) if not isinstance(q_values, np.ndarray) else q_values, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("need a nonempty 1-d vector of signed p-values")
    if np.any(~np.isfinite(q)) or np.any(q == 0.0) or np.any(np.abs(q) >= 1.0):
        raise ValueError("signed p-values must be finite, nonzero and inside (-1, 1)")

    qt = knockoff_values(q)
    sign = np.where(q > 0, 1, -1).astype(np.int8)
    b = pair_bit(q)
    distance = np.abs(np.abs(q) - 0.5)

    pos_idx = np.flatnonzero(sign > 0)
    neg_idx = np.flatnonzero(sign < 0)
    # stable sort on distance keeps index-ascending order within ties
    pos_order = pos_idx[np.argsort(distance[pos_idx], kind="stable")]
    neg_order = neg_idx[np.argsort(distance[neg_idx], kind="stable")]

    return PairSet(
        q=_readonly(q.copy()),
        knockoff=_readonly(qt),
        sign=_readonly(sign),
        b=_readonly(b),
        distance=_readonly(distance),
        pair_min=_readonly(np.minimum(q, qt)),
        pos_order=_readonly(pos_order),
        neg_order=_readonly(neg_order),
        sorted_q=_readonly(np.sort(q)),
        sorted_knockoff=_readonly(np.sort(qt)),
    )


@dataclass(frozen=True)
class RejectionRegion:
    """The set [-1, neg_boundary) u (pos_boundary, 1], open at the boundaries."""

    neg_boundary: float
    pos_boundary: float

    def __post_init__(self):
        if not (-1.0 <= self.neg_boundary <= -0.5):
            raise ValueError(f"negative boundary must lie in [-1, -0.5], got {self.neg_boundary}")
        if not (0.5 <= self.pos_boundary <= 1.0):
            raise ValueError(f"positive boundary must lie in [0.5, 1], got {self.pos_boundary}")

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x < self.neg_boundary) | (x > self.pos_boundary)


def region_for(pairs: PairSet, i: int, j: int) -> RejectionRegion:
    """Rejection region once the i nearest positive and j nearest negative
    pairs have been accepted.

    The positive boundary is the max element of the i-th nearest positive
    pair (0.5 when i=0, 1 when the side has no pairs); the negative boundary
    mirrors it.
    """
    if not (0 <= i <= pairs.n_plus):
        raise ValueError(f"i must lie in [0, {pairs.n_plus}], got {i}")
    if not (0 <= j <= pairs.n_minus):
        raise ValueError(f"j must lie in [0, {pairs.n_minus}], got {j}")

    if pairs.n_plus == 0:
        upper = 1.0
    elif i == 0:
        upper = 0.5
    else:
        k = pairs.pos_order[i - 1]
        upper = max(pairs.q[k], pairs.knockoff[k])

    if pairs.n_minus == 0:
        lower = -1.0
    elif j == 0:
        lower = -0.5
    else:
        k = pairs.neg_order[j - 1]
        lower = min(pairs.q[k], pairs.knockoff[k])

    return RejectionRegion(neg_boundary=float(lower), pos_boundary=float(upper))


def region_counts(pairs: PairSet, region: RejectionRegion) -> tuple[int, int]:
    """(#signed p-values in region, #knockoffs in region), strict boundaries."""

    def _count(sorted_vals: np.ndarray) -> int:
        below = int(np.searchsorted(sorted_vals, region.neg_boundary, side="left"))
        above = sorted_vals.size - int(np.searchsorted(sorted_vals, region.pos_boundary, side="right"))
        return below + above

    return _count(pairs.sorted_q), _count(pairs.sorted_knockoff)


def fdr_hat(pairs: PairSet, region: RejectionRegion) -> float:
    """Estimated FDR: (1 + #knockoffs in region) / max(1, #q in region)."""
    n_q, n_knock = region_counts(pairs, region)
    return (1.0 + n_knock) / max(n_q, 1)


@dataclass
class ProcedureState:
    """Mutable per-run bookkeeping: step count, per-side acceptances, region,
    accepted mask and the estimated-FDR trajectory."""

    k: int
    i: int
    j: int
    region: RejectionRegion
    accepted: np.ndarray
    fdr_hat_trace: list[float] = field(default_factory=list)
    ij_trace: list[tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class MaskedView:
    """What a side-selection strategy is allowed to see.

    For every pair: the smaller element, the sign and the distance to
    +-1/2 (all identity-free). For accepted pairs only: the true signed
    p-value. Never the hidden bit of an unaccepted pair.
    """

    pair_min: np.ndarray
    sign: np.ndarray
    distance: np.ndarray
    pos_order: np.ndarray
    neg_order: np.ndarray
    accepted: np.ndarray
    revealed_q: np.ndarray  # NaN where not accepted
    i_accepted: int
    j_accepted: int

    @property
    def n(self) -> int:
        return self.pair_min.shape[0]

    @property
    def n_plus(self) -> int:
        return self.pos_order.shape[0]

    @property
    def n_minus(self) -> int:
        return self.neg_order.shape[0]

    def pair_values(self, index: int) -> tuple[float, float]:
        """The unordered pair {u, v} of a hypothesis, identity-free."""
        u = float(self.pair_min[index])
        return u, float(self.sign[index]) - u

    def next_positive(self) -> int | None:
        """Index of the nearest not-yet-accepted positive pair."""
        if self.i_accepted >= self.n_plus:
            return None
        return int(self.pos_order[self.i_accepted])

    def next_negative(self) -> int | None:
        if self.j_accepted >= self.n_minus:
            return None
        return int(self.neg_order[self.j_accepted])

    def masked_pair_values(self) -> tuple[np.ndarray, np.ndarray]:
        """(u, v) arrays over unaccepted pairs."""
        m = ~self.accepted
        u = self.pair_min[m]
        return u, self.sign[m].astype(float) - u

    def revealed_values(self) -> np.ndarray:
        """True signed p-values of accepted pairs."""
        return self.revealed_q[self.accepted]


def masked_view(pairs: PairSet, state: ProcedureState) -> MaskedView:
    """The masked filtration after ``state.k`` steps.

    Per-pair location arrays are shared (immutable); the accepted mask and
    revealed values are snapshots, so a view stays consistent even if the
    engine advances afterwards.
    """
    revealed = np.where(state.accepted, pairs.q, np.nan)
    return MaskedView(
        pair_min=pairs.pair_min,
        sign=pairs.sign,
        distance=pairs.distance,
        pos_order=pairs.pos_order,
        neg_order=pairs.neg_order,
        accepted=_readonly(state.accepted.copy()),
        revealed_q=_readonly(revealed),
        i_accepted=state.i,
        j_accepted=state.j,
    )


@dataclass(frozen=True, eq=False)
class ProcedureResult:
    """Outcome of a run: rejections, final region, stop reason and traces."""

    rejected: np.ndarray
    region: RejectionRegion
    stopped_by: str  # "fdr_threshold" | "exhaustion"
    fdr_hat_trace: list[float]
    ij_trace: list[tuple[int, int]]
    steps: int
    n_pos_rejected: int
    n_neg_rejected: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProcedureResult):
            return NotImplemented
        return (
            np.array_equal(self.rejected, other.rejected)
            and self.region == other.region
            and self.stopped_by == other.stopped_by
            and self.fdr_hat_trace == other.fdr_hat_trace
            and self.ij_trace == other.ij_trace
            and self.steps == other.steps
            and self.n_pos_rejected == other.n_pos_rejected
            and self.n_neg_rejected == other.n_neg_rejected
        )


def _initial_state(pairs: PairSet) -> ProcedureState:
    i0 = 1 if pairs.n_plus > 0 else 0
    j0 = 1 if pairs.n_minus > 0 else 0
    accepted = np.zeros(pairs.n, dtype=bool)
    if i0:
        accepted[pairs.pos_order[0]] = True
    if j0:
        accepted[pairs.neg_order[0]] = True
    return ProcedureState(k=0, i=i0, j=j0, region=region_for(pairs, i0, j0), accepted=accepted)


def run(pairs: PairSet, strategy: SideStrategy, alpha: float) -> ProcedureResult:
    """Run the stepwise procedure at target FDR level ``alpha``.

    Starts with one accepted pair per populated side, consults ``strategy``
    only when neither side is exhausted (choices are forced at the bounds),
    and stops the first time the estimated FDR drops to ``alpha`` or every
    pair is accepted. The stopping condition is also checked on the initial
    region, before any shrinkage. Rejects every hypothesis whose true signed
    p-value lies in the final region.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")

    state = _initial_state(pairs)
    fh = fdr_hat(pairs, state.region)
    state.fdr_hat_trace.append(fh)
    state.ij_trace.append((state.i, state.j))

    while not (fh <= alpha or (state.i == pairs.n_plus and state.j == pairs.n_minus)):
        if state.j == pairs.n_minus:
            side = Side.POSITIVE
        elif state.i == pairs.n_plus:
            side = Side.NEGATIVE
        else:
            side = strategy(masked_view(pairs, state))
            if not isinstance(side, Side):
                raise TypeError(f"strategy must return a Side, got {side!r}")
        if side is Side.POSITIVE:
            state.accepted[pairs.pos_order[state.i]] = True
            state.i += 1
        else:
            state.accepted[pairs.neg_order[state.j]] = True
            state.j += 1
        state.k += 1
        state.region = region_for(pairs, state.i, state.j)
        fh = fdr_hat(pairs, state.region)
        state.fdr_hat_trace.append(fh)
        state.ij_trace.append((state.i, state.j))

    rejected = np.flatnonzero(state.region.contains(pairs.q))
    stopped_by = "fdr_threshold" if fh <= alpha else "exhaustion"
    return ProcedureResult(
        rejected=rejected,
        region=state.region,
        stopped_by=stopped_by,
        fdr_hat_trace=state.fdr_hat_trace,
        ij_trace=state.ij_trace,
        steps=state.k,
        n_pos_rejected=int(np.count_nonzero(pairs.q[rejected] > 0)),
        n_neg_rejected=int(np.count_nonzero(pairs.q[rejected] < 0)),
    )
