"""Adapters that let heterogeneous procedures run on the same replicate.

A candidate is anything with a ``name`` and a call ``(data, alpha) ->
rejected indices`` where ``data`` is a ``ReplicateData``. The three bundled
candidates cover the stepwise signed-knockoff procedure (``sk``), the BH
step-up (``bh``) and the oracle lfdr procedure (``orc``); external
index-set procedures (see ``baselines.IndexProcedure``) wrap via
``PValueCandidate`` / ``ZValueCandidate``. Candidates must be picklable so
studies can fan replicates out to worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from .baselines import IndexProcedure, OracleTruth, bh, oracle_procedure
from .procedure import build_pairs, run
from .strategies import make_strategy

__all__ = [
    "ReplicateData",
    "Candidate",
    "SignedKnockoffCandidate",
    "BHCandidate",
    "OracleCandidate",
    "PValueCandidate",
    "ZValueCandidate",
    "make_candidate",
    "parse_candidates",
    "available_candidates",
]


@dataclass(frozen=True)
class ReplicateData:
    """One dataset in every representation a candidate might need.

    ``labels``: 0 null, 1 down-regulated, 2 up-regulated; None for real
    tables. ``truth``/``z_values`` are None when unknown (t designs, real
    data with no ground truth).
    """

    statistics: np.ndarray
    df: Optional[float]
    p_values: np.ndarray
    signed_p: np.ndarray
    labels: Optional[np.ndarray] = None
    truth: Optional[OracleTruth] = None
    z_values: Optional[np.ndarray] = None


@runtime_checkable
class Candidate(Protocol):
    name: str

    def __call__(self, data: ReplicateData, alpha: float) -> np.ndarray: ...


@dataclass(frozen=True)
class SignedKnockoffCandidate:
    """The stepwise procedure on signed p-values, one fresh strategy per call."""

    strategy: str = "lfdr"
    strategy_options: dict = field(default_factory=dict)
    name: str = "sk"

    def __call__(self, data: ReplicateData, alpha: float) -> np.ndarray:
        pairs = build_pairs(data.signed_p)
        strat = make_strategy(self.strategy, **self.strategy_options)
        return run(pairs, strat, alpha).rejected


@dataclass(frozen=True)
class BHCandidate:
    name: str = "bh"

    def __call__(self, data: ReplicateData, alpha: float) -> np.ndarray:
        return bh(data.p_values, alpha)


@dataclass(frozen=True)
class OracleCandidate:
    name: str = "orc"

    def __call__(self, data: ReplicateData, alpha: float) -> np.ndarray:
        if data.truth is None or data.z_values is None:
            raise ValueError("oracle candidate needs z-values and known generative truth")
        return oracle_procedure(data.z_values, data.truth, alpha)


@dataclass(frozen=True)
class PValueCandidate:
    """Wrap an external index procedure that consumes two-sided p-values."""

    procedure: IndexProcedure
    name: str

    def __call__(self, data: ReplicateData, alpha: float) -> np.ndarray:
        return np.asarray(self.procedure(data.p_values, alpha), dtype=np.intp)


@dataclass(frozen=True)
class ZValueCandidate:
    """Wrap an external index procedure that consumes z-scores."""

    procedure: IndexProcedure
    name: str

    def __call__(self, data: ReplicateData, alpha: float) -> np.ndarray:
        if data.z_values is None:
            raise ValueError(f"candidate {self.name!r} needs z-values")
        return np.asarray(self.procedure(data.z_values, alpha), dtype=np.intp)


def available_candidates() -> list[str]:
    return ["sk", "bh", "orc"]


def make_candidate(name: str, strategy: str = "lfdr", strategy_options: dict | None = None):
    """Bundled candidate by name; strategy settings apply to ``sk`` only."""
    if name == "sk":
        return SignedKnockoffCandidate(strategy=strategy, strategy_options=strategy_options or {})
    if name == "bh":
        return BHCandidate()
    if name == "orc":
        return OracleCandidate()
    raise ValueError(f"unknown candidate {name!r}; available: {', '.join(available_candidates())}")


def parse_candidates(spec: str, strategy: str = "lfdr", strategy_options: dict | None = None) -> list:
    """Comma-separated candidate names -> candidate list (duplicates rejected)."""
    names = [part.strip() for part in spec.split(",") if part.strip()]
    if not names:
        raise ValueError("no candidates named")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate candidate in {spec!r}")
    return [make_candidate(n, strategy=strategy, strategy_options=strategy_options) for n in names]
