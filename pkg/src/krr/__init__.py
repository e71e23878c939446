"""Reliability of crowdsourced annotations for single and aggregate ratings.

Inter-rater reliability (IRR) measures agreement between individual ratings.
k-rater reliability (kRR) measures agreement between replications of
k-rating aggregates, which is the quantity that matters whenever a dataset is
consumed as per-item means or majority votes.
"""

from .core import (
    AggregateVector,
    AggregationFn,
    RatingTable,
    ReliabilityReport,
    aggregate,
    column_subsample,
    pair_aggregates,
)
from .agreement import cohens_kappa, coincidence_matrix, krippendorff_alpha
from .icc import VarianceComponents, icc_k, sb_curve, spearman_brown, variance_components
from .engine import KrrConfig, k_curve, krr_bootstrap, krr_empirical
from .simulate import GeneratorParams, generate, true_icc
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
