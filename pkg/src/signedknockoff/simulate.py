"""Data generators and the Monte Carlo study runner.

Two designs: independent three-component normal z-scores, and blockwise
AR(1)-correlated expression data summarized by two-sample t-statistics.
``run_study`` evaluates any set of candidates on shared replicates and
records realized FDP and power per replicate. Replicate r draws from the
substream seeded by (design.seed, r), so results are reproducible and
independent of the parallelism degree.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from typing import Optional, Union

import numpy as np
from scipy.linalg import toeplitz

from .baselines import OracleTruth
from .candidates import Candidate, ReplicateData
from .signedp import sanitize_p, signed_p_values
from .special import normal_cdf, normal_quantile, t_cdf

__all__ = [
    "NormalDesign",
    "TDesign",
    "Design",
    "ProcedureStudy",
    "StudyResult",
    "gen_normal",
    "gen_dependent_t",
    "t_to_z",
    "ar1_cholesky",
    "run_study",
    "fdp_power",
    "replicate_data",
    "design_to_dict",
]


def _check_shared(n, p1, p2, mu1, mu2, alpha, reps, seed):
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be positive")
    if p1 < 0 or p2 < 0 or p1 + p2 > 1.0:
        raise ValueError(f"need p1, p2 >= 0 with p1 + p2 <= 1, got {p1}, {p2}")
    if not (mu1 < 0.0 < mu2):
        raise ValueError(f"need mu1 < 0 < mu2, got {mu1}, {mu2}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if seed < 0:
        raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class NormalDesign:
    """z ~ (1-p1-p2) N(0,1) + p1 N(mu1,1) + p2 N(mu2,1), independent."""

    n: int = 2000
    p1: float = 0.1
    p2: float = 0.1
    mu1: float = -3.0
    mu2: float = 3.0
    alpha: float = 0.1
    reps: int = 100
    seed: int = 1

    def __post_init__(self):
        _check_shared(self.n, self.p1, self.p2, self.mu1, self.mu2, self.alpha, self.reps, self.seed)

    def truth(self) -> OracleTruth:
        return OracleTruth(p1=self.p1, p2=self.p2, mu1=self.mu1, mu2=self.mu2)


@dataclass(frozen=True)
class TDesign:
    """Blockwise AR(1)-correlated expression data, two groups of subjects,
    pooled-variance two-sample t per gene (df = n_treat + n_control - 2).

    Effects shift the treatment-group expression levels of non-null genes.
    """

    n: int = 2000
    p1: float = 0.1
    p2: float = 0.1
    mu1: float = -3.0
    mu2: float = 3.0
    block_size: int = 20
    rho: float = -0.7
    n_treat: int = 3
    n_control: int = 3
    alpha: float = 0.1
    reps: int = 100
    seed: int = 1

    def __post_init__(self):
        _check_shared(self.n, self.p1, self.p2, self.mu1, self.mu2, self.alpha, self.reps, self.seed)
        if self.block_size < 1 or self.n % self.block_size != 0:
            raise ValueError(f"block_size must divide n, got {self.block_size} vs {self.n}")
        if abs(self.rho) >= 1.0:
            raise ValueError(f"|rho| must be < 1, got {self.rho}")
        if self.n_treat < 2 or self.n_control < 2:
            raise ValueError("need at least 2 subjects per group for a pooled variance")

    @property
    def df(self) -> int:
        return self.n_treat + self.n_control - 2


Design = Union[NormalDesign, TDesign]


def _rng_for(design: Design, rep: int) -> np.random.Generator:
    # one substream per replicate; parallel workers cannot perturb it
    return np.random.default_rng([design.seed, rep])


def _labels(rng: np.random.Generator, design: Design) -> np.ndarray:
    return rng.choice(3, size=design.n, p=[1.0 - design.p1 - design.p2, design.p1, design.p2])


def gen_normal(design: NormalDesign, rep: int) -> tuple[np.ndarray, np.ndarray]:
    """(z-scores, labels) for one replicate; labels 0 null / 1 down / 2 up."""
    rng = _rng_for(design, rep)
    labels = _labels(rng, design)
    means = np.array([0.0, design.mu1, design.mu2])[labels]
    z = means + rng.standard_normal(design.n)
    return z, labels


def ar1_cholesky(size: int, rho: float) -> np.ndarray:
    """Lower Cholesky factor of the AR(1) correlation matrix (rho^|i-j|)."""
    if abs(rho) >= 1.0:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    return np.linalg.cholesky(toeplitz(rho ** np.arange(size)))


def gen_dependent_t(design: TDesign, rep: int) -> tuple[np.ndarray, np.ndarray]:
    """(t-statistics, labels) for one replicate.

    Expression levels within a block are MVN(0, AR1(rho)) across genes and
    independent across blocks and subjects; non-null genes get their effect
    added to the treatment group, then genes are summarized by the pooled
    two-sample t.
    """
    rng = _rng_for(design, rep)
    labels = _labels(rng, design)
    b = design.block_size
    n_blocks = design.n // b
    n_sub = design.n_treat + design.n_control
    chol = ar1_cholesky(b, design.rho)

    eps = rng.standard_normal((n_blocks, n_sub, b))
    x = (eps @ chol.T).transpose(0, 2, 1).reshape(design.n, n_sub)

    effect = np.array([0.0, design.mu1, design.mu2])[labels]
    treat = x[:, : design.n_treat] + effect[:, None]
    ctrl = x[:, design.n_treat :]

    mean_diff = treat.mean(axis=1) - ctrl.mean(axis=1)
    pooled = (
        (design.n_treat - 1) * treat.var(axis=1, ddof=1)
        + (design.n_control - 1) * ctrl.var(axis=1, ddof=1)
    ) / design.df
    se = np.sqrt(pooled * (1.0 / design.n_treat + 1.0 / design.n_control))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = mean_diff / se
    # se == 0 has probability zero; keep such genes finite but extreme
    t = np.nan_to_num(t, nan=0.0, posinf=1e15, neginf=-1e15)
    return t, labels


def t_to_z(t, df: float):
    """Map t-statistics to equally extreme z-scores: Phi^-1(F_t(t)).

    Evaluated through the lower tail of |t| and reflected, so very large
    statistics keep their magnitude instead of saturating near the center.
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    tail = t_cdf(-np.abs(t_arr), df)
    tail = np.clip(tail, 1e-310, 0.5)
    z = -normal_quantile(tail)
    out = np.where(t_arr < 0, -z, z)  # t == 0 maps to +quantile(0.5) == 0
    return float(out[0]) if scalar else out


def replicate_data(design: Design, rep: int) -> ReplicateData:
    """Generate one replicate and derive every representation candidates use."""
    if isinstance(design, NormalDesign):
        z, labels = gen_normal(design, rep)
        p = sanitize_p(2.0 * normal_cdf(-np.abs(z)))
        return ReplicateData(
            statistics=z,
            df=None,
            p_values=p,
            signed_p=signed_p_values(z, p),
            labels=labels,
            truth=design.truth(),
            z_values=z,
        )
    t, labels = gen_dependent_t(design, rep)
    p = sanitize_p(2.0 * t_cdf(-np.abs(t), design.df))
    return ReplicateData(
        statistics=t,
        df=float(design.df),
        p_values=p,
        signed_p=signed_p_values(t, p),
        labels=labels,
        truth=None,
        z_values=t_to_z(t, design.df),
    )


def fdp_power(labels: np.ndarray, rejected: np.ndarray) -> tuple[float, float]:
    """Realized (FDP, power) against truth labels.

    FDP = #{null and rejected} / max(#rejected, 1); power is the rejected
    share of the non-null hypotheses, NaN when there are none.
    """
    labels = np.asarray(labels)
    rejected = np.asarray(rejected, dtype=np.intp)
    n_rej = rejected.size
    n_false = int(np.count_nonzero(labels[rejected] == 0))
    fdp = n_false / max(n_rej, 1)
    n_alt = int(np.count_nonzero(labels != 0))
    power = math.nan if n_alt == 0 else (n_rej - n_false) / n_alt
    return fdp, power


@dataclass(frozen=True, eq=False)
class ProcedureStudy:
    """Per-procedure replicate metrics plus their Monte Carlo summaries."""

    name: str
    fdp: np.ndarray
    power: np.ndarray  # NaN where a replicate had no alternatives or errored
    errors: tuple[tuple[int, str], ...] = ()

    @property
    def mean_fdp(self) -> float:
        return float(np.mean(self.fdp)) if self.fdp.size else math.nan

    @property
    def mcse_fdp(self) -> float:
        if self.fdp.size < 2:
            return 0.0
        return float(np.std(self.fdp, ddof=1) / math.sqrt(self.fdp.size))

    @property
    def mean_power(self) -> float:
        with np.errstate(invalid="ignore"):
            return float(np.nanmean(self.power)) if np.any(np.isfinite(self.power)) else math.nan

    @property
    def mcse_power(self) -> float:
        ok = self.power[np.isfinite(self.power)]
        if ok.size < 2:
            return 0.0
        return float(np.std(ok, ddof=1) / math.sqrt(ok.size))


@dataclass(frozen=True)
class StudyResult:
    """A completed study: the design, one ProcedureStudy per candidate, and
    the seed actually used."""

    design: Design
    procedures: dict[str, ProcedureStudy]
    seed: int
    reps: int

    def summary_rows(self) -> list[dict]:
        rows = []
        for name, proc in self.procedures.items():
            rows.append(
                {
                    "procedure": name,
                    "mean_fdp": proc.mean_fdp,
                    "mcse_fdp": proc.mcse_fdp,
                    "mean_power": proc.mean_power,
                    "mcse_power": proc.mcse_power,
                    "errors": len(proc.errors),
                }
            )
        return rows


def _replicate_metrics(design: Design, candidates: tuple, rep: int) -> list[tuple[float, float, Optional[str]]]:
    """Worker body: one replicate, all candidates. Errors are contained."""
    data = replicate_data(design, rep)
    out = []
    for cand in candidates:
        try:
            rejected = cand(data, design.alpha)
            fdp, power = fdp_power(data.labels, rejected)
            out.append((fdp, power, None))
        except Exception as exc:  # noqa: BLE001 - candidate code is arbitrary
            out.append((math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
    return out


def run_study(design: Design, procedures: list, parallelism: int = 1) -> StudyResult:
    """Evaluate candidates on ``design.reps`` shared replicates.

    A candidate failure on a replicate is recorded (NaN metrics plus an
    error entry) and the study continues. Results are identical for any
    ``parallelism`` because each replicate owns its RNG substream.
    """
    if not procedures:
        raise ValueError("need at least one procedure")
    names = [proc.name for proc in procedures]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate procedure names: {names}")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")

    candidates = tuple(procedures)
    reps = design.reps
    if parallelism == 1 or reps == 1:
        per_rep = [_replicate_metrics(design, candidates, rep) for rep in range(reps)]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            per_rep = list(
                pool.map(
                    _replicate_metrics,
                    [design] * reps,
                    [candidates] * reps,
                    range(reps),
                    chunksize=max(1, reps // (4 * parallelism)),
                )
            )

    studies = {}
    for pos, name in enumerate(names):
        fdp = np.array([per_rep[r][pos][0] for r in range(reps)])
        power = np.array([per_rep[r][pos][1] for r in range(reps)])
        errors = tuple(
            (r, per_rep[r][pos][2]) for r in range(reps) if per_rep[r][pos][2] is not None
        )
        # an errored replicate contributes no FDP either
        fdp = fdp[np.isfinite(fdp)] if errors else fdp
        studies[name] = ProcedureStudy(name=name, fdp=fdp, power=power, errors=errors)

    return StudyResult(design=design, procedures=studies, seed=design.seed, reps=reps)


def design_to_dict(design: Design) -> dict:
    out = asdict(design)
    out["kind"] = "normal" if isinstance(design, NormalDesign) else "t"
    return out
