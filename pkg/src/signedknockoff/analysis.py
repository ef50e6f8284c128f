"""Real-data analysis: run the procedure on a table, build a round-trippable
report, and serialize it.

The structured report is plain JSON types only, written with sorted keys and
fixed indentation so write -> read -> write is byte-stable. Rejection-count
curves from an alpha sweep additionally go to CSV with the fixed column
schema ``alpha,total,neg,pos``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings as _warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .procedure import build_pairs, run
from .signedp import sanitize_p, signed_p_values
from .special import normal_cdf, normal_quantile, t_cdf, t_quantile
from .strategies import LfdrSides, make_strategy
from .tables import MODE_PVALUES, MODE_STATISTICS, StatTable

__all__ = [
    "AnalysisReport",
    "analyze",
    "table_signed_p",
    "statistic_boundary",
    "write_report",
    "read_report",
    "write_curve_csv",
]


def table_signed_p(table: StatTable) -> tuple[np.ndarray, np.ndarray]:
    """(two-sided p, signed p) for a table, degenerate endpoints clamped."""
    if table.mode == MODE_STATISTICS:
        stats = table.statistics
        p = np.empty(table.n)
        normal = np.isnan(table.df)
        if normal.any():
            p[normal] = 2.0 * normal_cdf(-np.abs(stats[normal]))
        for df in np.unique(table.df[~normal]):
            sel = table.df == df
            p[sel] = 2.0 * t_cdf(-np.abs(stats[sel]), float(df))
        p = sanitize_p(np.minimum(p, 1.0))
        return p, signed_p_values(stats, p)
    p = sanitize_p(table.p_values)
    return p, table.signs * (1.0 - p)


def statistic_boundary(q_boundary: float, df: float) -> Optional[float]:
    """Map a q-scale rejection boundary to the statistic scale.

    ``df`` is NaN for the normal reference. The positive boundary U maps to
    the statistic above which q > U, i.e. quantile((1+U)/2); the negative
    boundary L maps to quantile((1+L)/2) < 0. Degenerate boundaries at +-1
    (an empty side) have no finite preimage and give None.
    """
    tail = (1.0 + q_boundary) / 2.0
    if not (0.0 < tail < 1.0):
        return None
    if math.isnan(df):
        return float(normal_quantile(tail))
    return float(t_quantile(tail, df))


@dataclass(frozen=True)
class AnalysisReport:
    """Everything a run produced, in JSON-ready types."""

    alpha: float
    n: int
    n_plus: int
    n_minus: int
    strategy: dict
    seed: Optional[int]
    rejected: list  # [{"id": ..., "side": "positive"|"negative"}], input order
    n_rejected: int
    n_pos_rejected: int
    n_neg_rejected: int
    region: dict  # {"neg_boundary": L, "pos_boundary": U}
    stat_boundaries: Optional[dict]  # statistic-scale equivalents, or None
    stopped_by: str
    steps: int
    fdr_hat_trace: list
    mixture: Optional[dict]
    sweep: Optional[list]  # [{"alpha","total","neg","pos","neg_boundary","pos_boundary"}]
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _mixture_dict(strategy) -> Optional[dict]:
    if not isinstance(strategy, LfdrSides) or strategy.report is None:
        return None
    report = strategy.report
    return {
        "pi0": report.params.pi0,
        "lam": report.params.lam,
        "shape_left": report.params.shape_left,
        "shape_right": report.params.shape_right,
        "loglik": report.loglik_trace[-1],
        "iterations": report.iterations,
        "converged": report.converged,
    }


def _run_once(q: np.ndarray, strategy_name: str, strategy_options: dict, alpha: float):
    pairs = build_pairs(q)
    strategy = make_strategy(strategy_name, **strategy_options)
    result = run(pairs, strategy, alpha)
    return pairs, strategy, result


def analyze(
    table: StatTable,
    alpha: float,
    strategy: str = "lfdr",
    strategy_options: Optional[dict] = None,
    sweep_alphas: Optional[list] = None,
    seed: Optional[int] = None,
) -> AnalysisReport:
    """Run the procedure on a table and assemble the report.

    ``sweep_alphas`` additionally reruns the full procedure (fresh strategy
    each time) at every level and records the rejection-count curves. The
    procedure itself is deterministic; ``seed`` is echoed for bookkeeping.
    """
    options = dict(strategy_options or {})
    notes: list[str] = []
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        p, q = table_signed_p(table)
    notes.extend(str(w.message) for w in caught)

    pairs, strat, result = _run_once(q, strategy, options, alpha)

    common_df = table.common_df()
    if common_df is None:
        stat_bounds = None
        if table.mode == MODE_STATISTICS:
            notes.append("rows use mixed reference distributions; statistic-scale boundaries omitted")
    else:
        stat_bounds = {
            "neg": statistic_boundary(result.region.neg_boundary, common_df),
            "pos": statistic_boundary(result.region.pos_boundary, common_df),
        }

    rejected_rows = [
        {"id": table.ids[idx], "side": "positive" if q[idx] > 0 else "negative"}
        for idx in result.rejected.tolist()
    ]

    sweep_rows = None
    if sweep_alphas is not None:
        sweep_rows = []
        for level in sweep_alphas:
            _, _, res = _run_once(q, strategy, options, float(level))
            sweep_rows.append(
                {
                    "alpha": float(level),
                    "total": int(res.rejected.size),
                    "neg": res.n_neg_rejected,
                    "pos": res.n_pos_rejected,
                    "neg_boundary": res.region.neg_boundary,
                    "pos_boundary": res.region.pos_boundary,
                }
            )

    # keep the echo JSON-clean: an infinite refit interval reads back as "once"
    echo = {k: ("once" if isinstance(v, float) and math.isinf(v) else v) for k, v in options.items()}
    return AnalysisReport(
        alpha=float(alpha),
        n=pairs.n,
        n_plus=pairs.n_plus,
        n_minus=pairs.n_minus,
        strategy={"name": strategy, **echo},
        seed=seed,
        rejected=rejected_rows,
        n_rejected=int(result.rejected.size),
        n_pos_rejected=result.n_pos_rejected,
        n_neg_rejected=result.n_neg_rejected,
        region={
            "neg_boundary": result.region.neg_boundary,
            "pos_boundary": result.region.pos_boundary,
        },
        stat_boundaries=stat_bounds,
        stopped_by=result.stopped_by,
        steps=result.steps,
        fdr_hat_trace=[float(v) for v in result.fdr_hat_trace],
        mixture=_mixture_dict(strat),
        sweep=sweep_rows,
        warnings=notes,
    )


def write_report(report: AnalysisReport, path) -> None:
    """Write the structured report as JSON (byte-stable)."""
    path = Path(path)
    try:
        path.write_text(report.to_json())
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def read_report(path) -> AnalysisReport:
    path = Path(path)
    try:
        return AnalysisReport.from_json(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc.strerror or exc}") from exc


def write_curve_csv(sweep_rows: list, path) -> None:
    """Rejection-count curves with the fixed schema ``alpha,total,neg,pos``."""
    path = Path(path)
    try:
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["alpha", "total", "neg", "pos"])
            for row in sweep_rows:
                writer.writerow([row["alpha"], row["total"], row["neg"], row["pos"]])
    except OSError as exc:
        raise OSError(f"cannot write curves to {path}: {exc.strerror or exc}") from exc
