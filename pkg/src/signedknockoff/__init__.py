"""Finite-sample FDR control with directional information.

Test statistics map to signed p-values q = sign(t) * (1 - p); each q is
paired with a mirrored knockoff and a stepwise procedure shrinks a
two-sided rejection region until the estimated FDR (1 + #knockoffs in
region) / max(1, #q in region) reaches the target level. Which pair to
reveal next is chosen by a strategy that only ever sees masked
information, the default being a local-FDR ranking under a two-group beta
mixture fitted by a masked-data EM.
"""

from .analysis import AnalysisReport, analyze, read_report, write_curve_csv, write_report
from .baselines import IndexProcedure, OracleTruth, bh, oracle_lfdr, oracle_procedure
from .candidates import (
    BHCandidate,
    Candidate,
    OracleCandidate,
    PValueCandidate,
    ReplicateData,
    SignedKnockoffCandidate,
    ZValueCandidate,
    make_candidate,
)
from .mixture import (
    EMReport,
    MixtureParams,
    default_init,
    f1_density,
    fit_em,
    lfdr_pair,
    log_likelihood,
    pair_density,
    sample_mixture,
)
from .procedure import (
    MaskedView,
    PairSet,
    ProcedureResult,
    RejectionRegion,
    Side,
    SideStrategy,
    SignedPair,
    build_pairs,
    fdr_hat,
    masked_view,
    region_counts,
    region_for,
    run,
)
from .reference import equivalence_suite, naive_run
from .signedp import (
    TestStatistic,
    knockoff,
    knockoff_values,
    pair_bit,
    sanitize_p,
    signed_p,
    signed_p_values,
    two_sided_p,
)
from .simulate import (
    NormalDesign,
    ProcedureStudy,
    StudyResult,
    TDesign,
    fdp_power,
    gen_dependent_t,
    gen_normal,
    replicate_data,
    run_study,
    t_to_z,
)
from .special import normal_cdf, normal_quantile, regularized_incomplete_beta, t_cdf, t_quantile
from .strategies import (
    LfdrSides,
    alternate_strategy,
    lfdr_strategy,
    make_strategy,
    nearest_strategy,
)
from .tables import StatTable, TableParseError, read_stat_table

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "analyze",
    "read_report",
    "write_curve_csv",
    "write_report",
    "IndexProcedure",
    "OracleTruth",
    "bh",
    "oracle_lfdr",
    "oracle_procedure",
    "BHCandidate",
    "Candidate",
    "OracleCandidate",
    "PValueCandidate",
    "ReplicateData",
    "SignedKnockoffCandidate",
    "ZValueCandidate",
    "make_candidate",
    "EMReport",
    "MixtureParams",
    "default_init",
    "f1_density",
    "fit_em",
    "lfdr_pair",
    "log_likelihood",
    "pair_density",
    "sample_mixture",
    "MaskedView",
    "PairSet",
    "ProcedureResult",
    "RejectionRegion",
    "Side",
    "SideStrategy",
    "SignedPair",
    "build_pairs",
    "fdr_hat",
    "masked_view",
    "region_counts",
    "region_for",
    "run",
    "equivalence_suite",
    "naive_run",
    "TestStatistic",
    "knockoff",
    "knockoff_values",
    "pair_bit",
    "sanitize_p",
    "signed_p",
    "signed_p_values",
    "two_sided_p",
    "NormalDesign",
    "ProcedureStudy",
    "StudyResult",
    "TDesign",
    "fdp_power",
    "gen_dependent_t",
    "gen_normal",
    "replicate_data",
    "run_study",
    "t_to_z",
    "normal_cdf",
    "normal_quantile",
    "regularized_incomplete_beta",
    "t_cdf",
    "t_quantile",
    "LfdrSides",
    "alternate_strategy",
    "lfdr_strategy",
    "make_strategy",
    "nearest_strategy",
    "StatTable",
    "TableParseError",
    "read_stat_table",
    "__version__",
]
