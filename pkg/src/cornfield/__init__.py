"""Cornfield conditions for unmeasured confounding on the relative-risk and
risk-difference scales, for binary and categorical confounders."""

from .conditions import (
    Scale,
    Tag,
    ThresholdReport,
    ThresholdSpec,
    assess,
    classical_rr_thresholds,
    lee_max_threshold,
    lee_min_threshold,
    rd_binary_thresholds,
    rd_categorical_thresholds,
    rd_monotone_thresholds,
    rr_binary_a1_threshold,
    threshold,
    thresholds,
)
from .distribution import (
    AVERAGE_NULL,
    CONDITIONAL_NULL,
    Assumption,
    AssumptionLevel,
    JointLaw,
    check_assumption,
    lemma1_decomposition,
    marginal_measures,
    summarize,
)
from .ingest import observed_from_table, parse_table
from .measures import (
    AssociationMeasures,
    StratifiedTable,
    TwoByTwo,
    measures_from_table,
    orient_exposure,
)

__version__ = "0.1.0"
