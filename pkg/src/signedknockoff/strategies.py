"""Side-selection strategies for the stepwise engine.

A strategy is any callable mapping a masked view to a ``Side``. The engine
consults it only when both sides still have unaccepted pairs, so a strategy
may assume ``next_positive()`` and ``next_negative()`` are not None. All
strategies here depend on the view alone, which keeps every run driven by
masked information only.
"""

from __future__ import annotations

import math

from .mixture import EMReport, MixtureParams, default_init, fit_em, lfdr_pair
from .procedure import MaskedView, Side, SideStrategy

__all__ = [
    "alternate_strategy",
    "nearest_strategy",
    "lfdr_strategy",
    "LfdrSides",
    "make_strategy",
    "available_strategies",
]


class _AlternatingSides:
    """Positive on even accepted-count parity, negative on odd."""

    def __call__(self, view: MaskedView) -> Side:
        if (view.i_accepted + view.j_accepted) % 2 == 0:
            return Side.POSITIVE
        return Side.NEGATIVE


class _NearestSides:
    """Advance the side whose next pair sits closest to +-1/2."""

    def __call__(self, view: MaskedView) -> Side:
        i = view.next_positive()
        j = view.next_negative()
        if i is None or j is None:
            raise RuntimeError("nearest strategy consulted with an exhausted side")
        if view.distance[i] <= view.distance[j]:
            return Side.POSITIVE
        return Side.NEGATIVE


class LfdrSides:
    """Model-based side selection.

    Fits the two-group mixture to the masked view on first consult and
    advances the side whose next pair has the larger estimated local FDR
    (the pair more likely to be null gets accepted first; ties go
    positive). The fit is refreshed from the previous parameters after
    every ``refit_interval`` newly accepted pairs; ``None`` picks
    ``max(1, n // 50)`` and ``math.inf`` fits exactly once.
    """

    def __init__(
        self,
        refit_interval: float | None = None,
        init: MixtureParams | None = None,
        max_iter: int = 100,
        tol: float = 1e-6,
    ):
        if refit_interval is not None and refit_interval != math.inf:
            if not float(refit_interval).is_integer() or refit_interval < 1:
                raise ValueError("refit_interval must be a positive integer, None, or math.inf")
        self.refit_interval = refit_interval
        self.init = init
        self.max_iter = max_iter
        self.tol = tol
        self.report: EMReport | None = None
        self._accepted_at_fit: int | None = None

    @property
    def params(self) -> MixtureParams | None:
        return self.report.params if self.report is not None else None

    def _maybe_fit(self, view: MaskedView):
        accepted = view.i_accepted + view.j_accepted
        if self.report is None:
            init = self.init if self.init is not None else default_init(view)
            self.report = fit_em(view, init=init, max_iter=self.max_iter, tol=self.tol)
            self._accepted_at_fit = accepted
            return
        interval = self.refit_interval
        if interval is None:
            interval = max(1, view.pair_min.size // 50)
        if interval == math.inf:
            return
        if accepted - self._accepted_at_fit >= interval:
            # warm start from the current parameters
            self.report = fit_em(view, init=self.report.params, max_iter=self.max_iter, tol=self.tol)
            self._accepted_at_fit = accepted

    def __call__(self, view: MaskedView) -> Side:
        self._maybe_fit(view)
        i = view.next_positive()
        j = view.next_negative()
        if i is None or j is None:
            raise RuntimeError("lfdr strategy consulted with an exhausted side")
        pos = lfdr_pair(*view.pair_values(i), self.report.params)
        neg = lfdr_pair(*view.pair_values(j), self.report.params)
        if pos >= neg:
            return Side.POSITIVE
        return Side.NEGATIVE


def alternate_strategy() -> SideStrategy:
    """Strictly alternating sides; useful as a model-free default."""
    return _AlternatingSides()


def nearest_strategy() -> SideStrategy:
    """Greedy by distance to +-1/2."""
    return _NearestSides()


def lfdr_strategy(
    refit_interval: float | None = None,
    init: MixtureParams | None = None,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> LfdrSides:
    """Fresh model-based strategy instance (one per run)."""
    return LfdrSides(refit_interval=refit_interval, init=init, max_iter=max_iter, tol=tol)


_REGISTRY = {
    "lfdr": lfdr_strategy,
    "alternate": alternate_strategy,
    "nearest": nearest_strategy,
}


def available_strategies() -> list[str]:
    return sorted(_REGISTRY)


def make_strategy(name: str, **options) -> SideStrategy:
    """Instantiate a strategy by registry name.

    Unknown names raise ValueError listing the registry; options are
    forwarded to the factory (only ``lfdr`` takes any).
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown strategy {name!r}; available: {', '.join(available_strategies())}"
        ) from None
    return factory(**options)
