"""Deliberately naive transcription of the stepwise procedure.

This module re-states the procedure with plain Python loops and no shared
logic with the fast engine: pairs are re-sorted from scratch, regions are
counted by scanning, and the masked view is rebuilt at every consult. It
exists so the engine can be checked against an independent reading of the
same rules; ``equivalence_suite`` runs both on random instances and demands
bit-identical results. Keep it slow and obvious.
"""

from __future__ import annotations

import numpy as np

from .procedure import (
    MaskedView,
    ProcedureResult,
    RejectionRegion,
    Side,
    SideStrategy,
    build_pairs,
    run,
)

__all__ = ["naive_run", "random_instance", "equivalence_suite"]


def naive_run(q_values, strategy: SideStrategy, alpha: float) -> ProcedureResult:
    """Run the stepwise procedure by literal enumeration.

    Same contract as the fast engine: signed p-values in, result out.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    q = [float(val) for val in np.asarray(q_values, dtype=float)]
    n = len(q)
    if n == 0:
        raise ValueError("need at least one signed p-value")
    for val in q:
        if not np.isfinite(val) or val == 0.0 or abs(val) >= 1.0:
            raise ValueError(f"signed p-value {val} outside (-1, 0) u (0, 1)")

    knock = [(1.0 if val > 0 else -1.0) - val for val in q]
    dist = [abs(abs(val) - 0.5) for val in q]
    pos_order = sorted((i for i in range(n) if q[i] > 0), key=lambda i: (dist[i], i))
    neg_order = sorted((i for i in range(n) if q[i] < 0), key=lambda i: (dist[i], i))
    n_plus = len(pos_order)
    n_minus = len(neg_order)

    def boundaries(i: int, j: int) -> tuple[float, float]:
        if n_plus == 0:
            upper = 1.0
        elif i == 0:
            upper = 0.5
        else:
            idx = pos_order[i - 1]
            upper = max(q[idx], knock[idx])
        if n_minus == 0:
            lower = -1.0
        elif j == 0:
            lower = -0.5
        else:
            idx = neg_order[j - 1]
            lower = min(q[idx], knock[idx])
        return lower, upper

    def inside(val: float, lower: float, upper: float) -> bool:
        return val < lower or val > upper

    def fdr_hat(lower: float, upper: float) -> float:
        n_q = sum(1 for val in q if inside(val, lower, upper))
        n_knock = sum(1 for val in knock if inside(val, lower, upper))
        return (1 + n_knock) / max(n_q, 1)

    def view(accepted: set[int], i: int, j: int) -> MaskedView:
        acc = np.array([idx in accepted for idx in range(n)], dtype=bool)
        revealed = np.array([q[idx] if idx in accepted else np.nan for idx in range(n)])
        return MaskedView(
            pair_min=np.array([min(q[idx], knock[idx]) for idx in range(n)]),
            sign=np.array([1 if q[idx] > 0 else -1 for idx in range(n)], dtype=np.int8),
            distance=np.array(dist),
            pos_order=np.array(pos_order, dtype=np.intp),
            neg_order=np.array(neg_order, dtype=np.intp),
            accepted=acc,
            revealed_q=revealed,
            i_accepted=i,
            j_accepted=j,
        )

    i = 1 if n_plus > 0 else 0
    j = 1 if n_minus > 0 else 0
    accepted = set(pos_order[:i]) | set(neg_order[:j])
    lower, upper = boundaries(i, j)
    current = fdr_hat(lower, upper)
    trace = [current]
    ij_trace = [(i, j)]

    while current > alpha and not (i == n_plus and j == n_minus):
        if j == n_minus:
            side = Side.POSITIVE
        elif i == n_plus:
            side = Side.NEGATIVE
        else:
            side = strategy(view(accepted, i, j))
            if not isinstance(side, Side):
                raise TypeError(f"strategy returned {side!r}, expected a Side")
        if side is Side.POSITIVE:
            accepted.add(pos_order[i])
            i += 1
        else:
            accepted.add(neg_order[j])
            j += 1
        lower, upper = boundaries(i, j)
        current = fdr_hat(lower, upper)
        trace.append(current)
        ij_trace.append((i, j))

    region = RejectionRegion(neg_boundary=lower, pos_boundary=upper)
    rejected = [idx for idx in range(n) if inside(q[idx], lower, upper)]
    return ProcedureResult(
        rejected=np.array(rejected, dtype=np.intp),
        region=region,
        stopped_by="fdr_threshold" if current <= alpha else "exhaustion",
        fdr_hat_trace=trace,
        ij_trace=ij_trace,
        steps=len(trace) - 1,
        n_pos_rejected=sum(1 for idx in rejected if q[idx] > 0),
        n_neg_rejected=sum(1 for idx in rejected if q[idx] < 0),
    )


def random_instance(rng: np.random.Generator, max_n: int = 12) -> tuple[np.ndarray, float]:
    """Small random instance: n in [1, max_n], one-sided about 20% of the
    time, occasional near-boundary values, alpha in (0.02, 0.95)."""
    n = int(rng.integers(1, max_n + 1))
    q = np.clip(rng.uniform(-1.0, 1.0, size=n), -1.0 + 1e-12, 1.0 - 1e-12)
    shape = rng.choice(["both", "pos", "neg"], p=[0.8, 0.1, 0.1])
    if shape == "pos":
        q = np.abs(q)
    elif shape == "neg":
        q = -np.abs(q)
    if rng.random() < 0.2:
        # push a couple of values near the interesting boundaries
        k = min(n, 2)
        spots = rng.choice(n, size=k, replace=False)
        q[spots] = np.sign(q[spots]) * rng.choice([0.5, 0.5 + 1e-9, 1.0 - 1e-9], size=k)
    q[q == 0.0] = 0.5
    alpha = float(rng.uniform(0.02, 0.95))
    return q, alpha


def equivalence_suite(
    n_instances: int,
    seed: int,
    strategy_factories: dict[str, object],
    max_n: int = 12,
) -> tuple[int, list[str]]:
    """Run fast engine and naive transcription on random instances.

    ``strategy_factories`` maps a label to a zero-argument factory; a fresh
    strategy feeds each run so stateful strategies cannot leak between
    implementations. Returns (number of checks, mismatch descriptions).
    """
    rng = np.random.default_rng(seed)
    mismatches: list[str] = []
    checks = 0
    for case in range(n_instances):
        q, alpha = random_instance(rng, max_n=max_n)
        for label, factory in strategy_factories.items():
            fast = run(build_pairs(q), factory(), alpha)
            slow = naive_run(q, factory(), alpha)
            checks += 1
            if fast != slow:
                mismatches.append(
                    f"case {case} strategy {label}: alpha={alpha!r} q={q.tolist()!r} "
                    f"fast={fast} slow={slow}"
                )
    return checks, mismatches
